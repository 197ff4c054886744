"""The strategy-script language: aspectdef / select / apply / condition.

Scripts are parsed into a validated AspectProgram and interpreted against a
WeaveSession. There is no embedded scripting; the action algebra is fixed
(insert / setType / clone / built-in strategies) plus %{...} interpolation
of join-point attributes and $parameters inside strings.
"""

import re
from dataclasses import dataclass, field

from .errors import (
    AspectRuntimeError, AspectSyntaxError, RecursionCycle, UnknownAspectRef,
    UnknownSelectRef, WeaveError,
)
from .weave import LEGAL_CHILDREN, SelectStep, WeaveSession

KINDS = {"file", "function", "decl", "stmt", "loop", "call", "pragma", "varref"}
OPS = {"==", "!=", "contains"}


# ---------------------------------------------------------------- program

@dataclass
class Param:
    name: str
    default: object = None
    has_default: bool = False


@dataclass
class Step:
    kind: str
    attr: str = None
    op: str = None
    operand: tuple = None     # ('str'|'num'|'param', value)


@dataclass
class SelectDecl:
    name: str
    steps: list
    line: int


@dataclass
class Action:
    op: str                   # insert | setType | clone | builtin
    where: str = None         # insert position
    template: str = None
    builtin: str = None
    args: dict = field(default_factory=dict)
    line: int = 0


@dataclass
class Apply:
    select_name: str
    cond: object
    actions: list
    line: int


@dataclass
class CallMember:
    name: str
    args: dict
    line: int


@dataclass
class Aspect:
    name: str
    params: list
    members: list             # SelectDecl | Apply | CallMember, textual order
    line: int

    def selects(self):
        return {m.name: m for m in self.members if isinstance(m, SelectDecl)}


@dataclass
class AspectProgram:
    aspects: dict
    order: list

    @property
    def entry(self):
        return self.order[0]

    def sloc(self):
        """Logical lines: one per input decl, select, apply, condition,
        action and call."""
        n = 0
        for name in self.order:
            a = self.aspects[name]
            n += len(a.params)
            for m in a.members:
                if isinstance(m, SelectDecl):
                    n += 1
                elif isinstance(m, Apply):
                    n += 1 + len(m.actions) + (1 if m.cond is not None else 0)
                elif isinstance(m, CallMember):
                    n += 1
        return n


def count_aspect_sloc(text):
    program = parse_aspect(text)
    return program.sloc(), len(program.order)


# --------------------------------------------------------------- tokenizer

_AW_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>//[^\n]*)
      | (?P<str>"(?:[^"\\]|\\.)*")
      | (?P<num>-?\d+(?:\.\d+)?)
      | (?P<param>\$[A-Za-z_]\w*)
      | (?P<word>[A-Za-z_]\w*)
      | (?P<op>==|!=|&&|\|\||[{}().,:=!])
    """, re.VERBOSE)


def _aw_tokenize(text):
    toks = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _AW_TOKEN_RE.match(text, pos)
        if m is None:
            raise AspectSyntaxError(line, f"unexpected character {text[pos]!r}")
        val = m.group(0)
        group = m.lastgroup
        if group in ("ws", "comment"):
            line += val.count("\n")
        else:
            toks.append((group, val, line))
        pos = m.end()
    return toks


class _P:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None, self._line())

    def next(self):
        tok = self.peek()
        if tok[0] is None:
            raise AspectSyntaxError(tok[2], "unexpected end of script")
        self.i += 1
        return tok

    def expect_word(self, word):
        kind, val, line = self.next()
        if kind != "word" or val != word:
            raise AspectSyntaxError(line, f"expected {word!r}, got {val!r}")
        return val

    def expect_kind(self, kind, what):
        k, val, line = self.next()
        if k != kind:
            raise AspectSyntaxError(line, f"expected {what}, got {val!r}")
        return val, line

    def at_word(self, word):
        kind, val, _ = self.peek()
        return kind == "word" and val == word

    def _line(self):
        return self.toks[-1][2] if self.toks else 1


# ------------------------------------------------------------------ parser

def parse_aspect(text):
    """Parse and validate a strategy script."""
    p = _P(_aw_tokenize(text))
    aspects = {}
    order = []
    while p.peek()[0] is not None:
        a = _parse_one_aspect(p)
        if a.name in aspects:
            raise AspectSyntaxError(a.line, f"duplicate aspect {a.name!r}")
        aspects[a.name] = a
        order.append(a.name)
    if not order:
        raise AspectSyntaxError(1, "script declares no aspects")
    program = AspectProgram(aspects, order)
    _validate(program)
    return program


def _parse_one_aspect(p):
    p.expect_word("aspectdef")
    name, line = p.expect_kind("word", "aspect name")
    params = []
    if p.at_word("input"):
        p.next()
        while True:
            pname, _ = p.expect_kind("param", "input parameter ($name)")
            param = Param(pname[1:])
            if p.peek()[1] == "=":
                p.next()
                param.default = _parse_operand(p)[1]
                param.has_default = True
            params.append(param)
            if p.peek()[1] == ",":
                p.next()
                continue
            break
        p.expect_word("end")
    members = []
    while not p.at_word("end"):
        kind, val, mline = p.peek()
        if kind is None:
            raise AspectSyntaxError(mline, f"aspect {name!r} missing 'end'")
        if val == "select":
            members.append(_parse_select(p))
        elif val == "apply":
            members.append(_parse_apply(p))
        elif val == "call":
            members.append(_parse_call(p))
        else:
            raise AspectSyntaxError(mline, f"expected select/apply/call, got {val!r}")
    p.next()   # end
    return Aspect(name, params, members, line)


def _parse_select(p):
    p.expect_word("select")
    name, line = p.expect_kind("word", "select name")
    _, colon, cline = p.next()
    if colon != ":":
        raise AspectSyntaxError(cline, f"expected ':', got {colon!r}")
    steps = [_parse_step(p)]
    while p.peek()[1] == ".":
        p.next()
        steps.append(_parse_step(p))
    p.expect_word("end")
    return SelectDecl(name, steps, line)


def _parse_step(p):
    kind, line = p.expect_kind("word", "join point kind")
    if kind not in KINDS:
        raise AspectSyntaxError(line, f"unknown join point kind {kind!r}")
    step = Step(kind)
    if p.peek()[1] == "{":
        p.next()
        attr, _ = p.expect_kind("word", "attribute name")
        opk, opv, opline = p.next()
        if not (opv in ("==", "!=") or (opk == "word" and opv == "contains")):
            raise AspectSyntaxError(opline, f"expected ==, != or contains, got {opv!r}")
        operand = _parse_operand(p)
        _, close, closeline = p.next()
        if close != "}":
            raise AspectSyntaxError(closeline, f"expected '}}', got {close!r}")
        step.attr, step.op, step.operand = attr, opv, operand
    return step


def _parse_operand(p):
    kind, val, line = p.next()
    if kind == "str":
        return ("str", _unquote(val))
    if kind == "num":
        return ("num", float(val) if "." in val else int(val))
    if kind == "param":
        return ("param", val[1:])
    if kind == "word" and val in ("true", "false"):
        return ("str", val)
    raise AspectSyntaxError(line, f"expected a literal or $param, got {val!r}")


def _unquote(s):
    return s[1:-1].replace('\\"', '"').replace("\\n", "\n").replace("\\\\", "\\")


def _parse_apply(p):
    p.expect_word("apply")
    p.expect_word("to")
    name, line = p.expect_kind("word", "select name")
    cond = None
    if p.at_word("if"):
        p.next()
        cond = _parse_or(p)
    actions = []
    while not p.at_word("end"):
        actions.append(_parse_action(p))
    p.next()
    if not actions:
        raise AspectSyntaxError(line, "apply without actions")
    return Apply(name, cond, actions, line)


def _parse_action(p):
    kind, val, line = p.peek()
    if kind != "word":
        raise AspectSyntaxError(line, f"expected an action, got {val!r}")
    if val == "insert":
        p.next()
        _, where, wline = p.next()
        if where not in ("before", "after", "replace"):
            raise AspectSyntaxError(wline, f"expected before/after/replace, got {where!r}")
        tmpl, _ = p.expect_kind("str", "a code string")
        return Action("insert", where=where, template=_unquote(tmpl), line=line)
    if val == "setType":
        p.next()
        tmpl, _ = p.expect_kind("str", "a type string")
        return Action("setType", template=_unquote(tmpl), line=line)
    if val == "clone":
        p.next()
        tmpl, _ = p.expect_kind("str", "a name string")
        return Action("clone", template=_unquote(tmpl), line=line)
    # built-in strategy invocation: name(arg=value, ...)
    p.next()
    if p.peek()[1] != "(":
        raise AspectSyntaxError(line, f"unknown action {val!r}")
    args = _parse_args(p)
    return Action("builtin", builtin=val, args=args, line=line)


def _parse_args(p):
    _, open_, line = p.next()
    if open_ != "(":
        raise AspectSyntaxError(line, "expected '('")
    args = {}
    if p.peek()[1] == ")":
        p.next()
        return args
    while True:
        name, _ = p.expect_kind("word", "argument name")
        _, eq, eline = p.next()
        if eq != "=":
            raise AspectSyntaxError(eline, f"expected '=', got {eq!r}")
        args[name] = _parse_operand(p)
        k, sep, sline = p.next()
        if sep == ")":
            return args
        if sep != ",":
            raise AspectSyntaxError(sline, f"expected ',' or ')', got {sep!r}")


def _parse_call(p):
    p.expect_word("call")
    name, line = p.expect_kind("word", "aspect name")
    args = _parse_args(p)
    return CallMember(name, args, line)


def _parse_or(p):
    left = _parse_and(p)
    while p.peek()[1] == "||":
        p.next()
        left = ("or", left, _parse_and(p))
    return left


def _parse_and(p):
    left = _parse_not(p)
    while p.peek()[1] == "&&":
        p.next()
        left = ("and", left, _parse_not(p))
    return left


def _parse_not(p):
    if p.peek()[1] == "!":
        p.next()
        return ("not", _parse_not(p))
    if p.peek()[1] == "(":
        p.next()
        inner = _parse_or(p)
        _, close, line = p.next()
        if close != ")":
            raise AspectSyntaxError(line, f"expected ')', got {close!r}")
        return inner
    return _parse_term(p)


def _parse_term(p):
    name, line = p.expect_kind("word", "an attribute reference")
    kind = None
    attr = name
    if p.peek()[1] == ".":
        p.next()
        attr, _ = p.expect_kind("word", "attribute name")
        kind = name
        if kind not in KINDS:
            raise AspectSyntaxError(line, f"unknown join point kind {kind!r}")
    opk, opv, opline = p.next()
    if not (opv in ("==", "!=") or (opk == "word" and opv == "contains")):
        raise AspectSyntaxError(opline, f"expected ==, != or contains, got {opv!r}")
    operand = _parse_operand(p)
    return ("term", kind, attr, opv, operand)


# -------------------------------------------------------------- validation

BUILTIN_NAMES = {
    "changePrecision", "cloneFunction", "cloneCallTree", "createTypedVersion",
    "createFloatVersion", "multiversion", "memoize", "autoParallelize",
    "disableNestedParallelPragmas",
}


def _validate(program):
    for name in program.order:
        a = program.aspects[name]
        selects = a.selects()
        for m in a.members:
            if isinstance(m, Apply):
                if m.select_name not in selects:
                    raise UnknownSelectRef(
                        f"apply at line {m.line} references undeclared select "
                        f"{m.select_name!r} in aspect {a.name!r}")
                _check_chain(m, selects[m.select_name])
            elif isinstance(m, CallMember):
                if m.name not in program.aspects and m.name not in BUILTIN_NAMES:
                    raise UnknownAspectRef(
                        f"call at line {m.line} references unknown aspect "
                        f"{m.name!r}")
    _check_cycles(program)


def _check_chain(apply_member, select_decl):
    if apply_member.cond is None:
        return
    kinds = {s.kind for s in select_decl.steps} | {"file"}

    def visit(expr):
        if expr[0] == "term":
            _, kind, _, _, _ = expr
            if kind is not None and kind not in kinds:
                raise UnknownSelectRef(
                    f"condition at line {apply_member.line} references kind "
                    f"{kind!r} not bound by select {select_decl.name!r}")
        elif expr[0] == "not":
            visit(expr[1])
        else:
            visit(expr[1])
            visit(expr[2])

    visit(apply_member.cond)


def _check_cycles(program):
    edges = {}
    for name in program.order:
        edges[name] = [m.name for m in program.aspects[name].members
                       if isinstance(m, CallMember) and m.name in program.aspects]
    state = {}

    def visit(name, trail):
        state[name] = "visiting"
        for callee in edges[name]:
            if state.get(callee) == "visiting":
                cycle = " -> ".join(trail + [callee])
                raise RecursionCycle(f"aspect call cycle: {cycle}")
            if state.get(callee) is None:
                visit(callee, trail + [callee])
        state[name] = "done"

    for name in program.order:
        if state.get(name) is None:
            visit(name, [name])


# ------------------------------------------------------------- interpreter

_INTERP_RE = re.compile(r"%\{([^}]+)\}")


def run_aspects(program, ast, args=None):
    """Execute a program's entry aspect against a tree.

    Returns the WeaveSession whose ast was mutated and whose report holds
    the cumulative counters.
    """
    session = WeaveSession(ast)
    entry = program.aspects[program.entry]
    env = _bind_params(entry, dict(args or {}), program.entry, {})
    _run_aspect(program, session, entry, env)
    return session


def _bind_params(aspect, given, name, _env):
    env = {}
    for p in aspect.params:
        if p.name in given:
            env[p.name] = given.pop(p.name)
        elif p.has_default:
            env[p.name] = p.default
        else:
            raise WeaveError(
                f"aspect {name!r} needs an argument for ${p.name}")
    if given:
        extra = ", ".join(sorted(given))
        raise WeaveError(f"aspect {name!r} got unknown arguments: {extra}")
    return env


def _run_aspect(program, session, aspect, env):
    for m in aspect.members:
        try:
            if isinstance(m, Apply):
                _run_apply(session, aspect, m, env)
            elif isinstance(m, CallMember):
                _run_call(program, session, aspect, m, env)
        except WeaveError as exc:
            if isinstance(exc, AspectRuntimeError):
                raise
            raise AspectRuntimeError(aspect.name, m.line, exc) from exc


def _run_apply(session, aspect, m, env):
    decl = aspect.selects()[m.select_name]
    steps = []
    for s in decl.steps:
        if s.attr is None:
            steps.append(SelectStep(s.kind, None))
        else:
            steps.append(SelectStep(s.kind, (s.attr, s.op, _operand_value(s.operand, env))))
    for bound in session.select(steps):
        if m.cond is not None and not _eval_cond(session, m.cond, bound, env):
            continue
        for action in m.actions:
            _run_action(session, action, bound, env)


def _run_call(program, session, aspect, m, env):
    values = {k: _arg_value(session, v, (), env) for k, v in m.args.items()}
    if m.name in program.aspects:
        callee = program.aspects[m.name]
        callee_env = _bind_params(callee, values, m.name, env)
        _run_aspect(program, session, callee, callee_env)
    else:
        _run_builtin(session, m.name, None, values)


def _run_action(session, action, bound, env):
    target = bound[-1] if bound else None
    if action.op == "insert":
        text = _interpolate(session, action.template, bound, env)
        session.insert(target, action.where, text)
    elif action.op == "setType":
        session.set_type(target, _interpolate(session, action.template, bound, env))
    elif action.op == "clone":
        session.clone_function(target, _interpolate(session, action.template, bound, env))
    else:
        _run_builtin(session, action.builtin, target,
                     {k: _arg_value(session, v, bound, env)
                      for k, v in action.args.items()})


def _operand_value(operand, env):
    kind, value = operand
    if kind == "param":
        if value not in env:
            raise WeaveError(f"unbound parameter ${value}")
        return env[value]
    return value


def _arg_value(session, operand, bound, env):
    """Operand value with %{...} interpolation applied to string literals."""
    value = _operand_value(operand, env)
    if isinstance(value, str) and "%{" in value:
        return _interpolate(session, value, bound, env)
    return value


def _eval_cond(session, expr, bound, env):
    op = expr[0]
    if op == "or":
        return _eval_cond(session, expr[1], bound, env) or \
            _eval_cond(session, expr[2], bound, env)
    if op == "and":
        return _eval_cond(session, expr[1], bound, env) and \
            _eval_cond(session, expr[2], bound, env)
    if op == "not":
        return not _eval_cond(session, expr[1], bound, env)
    _, kind, attr, relop, operand = expr
    jp = _resolve_jp(bound, kind)
    actual = _to_str(session.attribute(jp, attr))
    wanted = _to_str(_operand_value(operand, env))
    if relop == "==":
        return actual == wanted
    if relop == "!=":
        return actual != wanted
    return wanted in actual


def _resolve_jp(bound, kind):
    if kind is None:
        return bound[-1]
    for jp in reversed(bound):
        if jp.kind == kind:
            return jp
    raise WeaveError(f"no bound join point of kind {kind!r}")


def _to_str(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _interpolate(session, template, bound, env):
    def repl(m):
        ref = m.group(1).strip()
        if ref.startswith("$"):
            name = ref[1:]
            if name not in env:
                raise WeaveError(f"unbound parameter ${name}")
            return _to_str(env[name])
        if "." in ref:
            kind, attr = ref.split(".", 1)
            return _to_str(session.attribute(_resolve_jp(bound, kind), attr))
        return _to_str(session.attribute(bound[-1], ref))

    return _INTERP_RE.sub(repl, template)


# ---------------------------------------------------------------- builtins

def _run_builtin(session, name, target, args):
    from . import strategies
    from .strategies.multiversion import find_call_statement

    def need(key, default=None):
        if key in args:
            return args[key]
        if default is not None:
            return default
        raise WeaveError(f"builtin {name!r} needs argument {key!r}")

    def target_function():
        if "func" in args:
            return str(args["func"])
        if target is not None and target.kind == "function":
            return session.attribute(target, "name")
        raise WeaveError(f"builtin {name!r} needs func=... or a function join point")

    if name == "changePrecision":
        pmap = strategies.default_precision_map(str(need("old")), str(need("new")))
        strategies.change_precision(session, target_function(), pmap)
    elif name == "cloneFunction":
        jp = session.function_jp(target_function())
        if jp is None:
            raise WeaveError(f"no function {target_function()!r}")
        session.clone_function(jp, str(need("newName")))
    elif name == "cloneCallTree":
        strategies.clone_call_tree(session, target_function(), str(need("suffix")))
    elif name in ("createTypedVersion", "createFloatVersion"):
        old = str(need("old", "double"))
        new = str(need("new", "float"))
        pmap = strategies.default_precision_map(old, new)
        strategies.create_typed_version(session, target_function(),
                                        str(need("suffix")), pmap)
    elif name == "multiversion":
        versions = [v.strip() for v in str(need("versions")).split(",") if v.strip()]
        if target is not None and target.kind == "call":
            jp = target
        else:
            occurrence = int(need("occurrence", 0) or 0)
            jp = find_call_statement(session, str(need("call")), occurrence)
        strategies.multiversion(session, jp, versions, str(need("knob")))
    elif name == "memoize":
        cfg = strategies.MemoConfig(
            function_name=target_function(),
            table_size=int(need("tableSize", 256)),
            policy=str(need("policy", "REPLACE")).upper(),
            enabled_by_default=str(need("enabled", "1")) not in ("0", "false"),
            force=str(need("force", "0")) in ("1", "true"),
        )
        strategies.memoize(session, cfg)
    elif name == "autoParallelize":
        strategies.auto_parallelize(session)
    elif name == "disableNestedParallelPragmas":
        strategies.disable_nested_parallel_pragmas(session)
    else:
        raise UnknownAspectRef(f"unknown builtin {name!r}")
