"""Join-point model, select-chain evaluation, weaving actions and counters.

A WeaveSession owns one SourceUnit plus the session counters (selects,
attributes, actions, inserts, native SLoC). Attribute reads never mutate
the tree; actions do, and every action keeps the target's neighbourhood
local so diffs stay reviewable.
"""

from dataclasses import dataclass, field

from . import ctype
from .errors import (
    DuplicateName, IllegalChain, InvalidAnchor, NotADecl, ParseErrorInFragment,
    UnknownAttribute, UnsupportedConstruct, CSyntaxError,
)
from .frontend import scan
from .frontend.lexer import Token, is_trivia
from .frontend.nodes import (
    CompoundNode, DeclStmtNode, FunctionNode, GeneratedNode, GlobalDeclNode,
    IfNode, LoopNode, Node, OpaqueStmtNode, ParamNode, PragmaNode, ReturnNode,
    SourceUnit, SwitchNode, deep_copy_node, indent_of, make_ws,
)
from .frontend.parser import parse, parse_fragment
from .frontend.sloc import count_sloc

LEGAL_CHILDREN = {
    "file": {"function"},
    "function": {"decl", "stmt", "loop", "call", "pragma"},
    "loop": {"stmt", "call", "loop", "pragma"},
    "stmt": {"call", "varref"},
}

STMT_KINDS = (OpaqueStmtNode, ReturnNode, IfNode, SwitchNode)


@dataclass
class WeaveReport:
    selects: int = 0
    attributes: int = 0
    actions: int = 0
    inserts: int = 0
    native_sloc: int = 0

    CSV_HEADER = "Selects,Attributes,Actions,Inserts,NativeSLoC"

    def csv_row(self):
        return f"{self.selects},{self.attributes},{self.actions},{self.inserts},{self.native_sloc}"


@dataclass
class StaticMetricsRow:
    aspect_sloc: int
    aspect_count: int
    input_sloc: int
    input_funcs: int
    woven_sloc: int
    woven_funcs: int

    @property
    def delta_sloc(self):
        return self.woven_sloc - self.input_sloc

    @property
    def delta_funcs(self):
        return self.woven_funcs - self.input_funcs

    CSV_HEADER = ("AspectSLoC,Aspects,InputSLoC,InputFuncs,"
                  "WovenSLoC,WovenFuncs,DeltaSLoC,DeltaFuncs")

    def csv_row(self):
        return (f"{self.aspect_sloc},{self.aspect_count},{self.input_sloc},"
                f"{self.input_funcs},{self.woven_sloc},{self.woven_funcs},"
                f"{self.delta_sloc},{self.delta_funcs}")


class JoinPoint:
    """Typed reference into the tree exposing named attributes."""

    def __init__(self, kind, node, session, extra=None):
        self.kind = kind
        self.node = node
        self.session = session
        self.extra = extra or {}

    def _check_alive(self):
        if self.node.detached:
            raise InvalidAnchor(f"{self.kind} join point refers to a removed node")

    def attr_names(self):
        return sorted(ATTRIBUTES.get(self.kind, {}).keys())

    def __repr__(self):
        return f"<jp {self.kind} line {self.node.start_line()}>"


@dataclass
class SelectStep:
    kind: str
    filter: tuple = None     # (attr, op, value) with op in ==, !=, contains


class WeaveSession:
    def __init__(self, ast):
        self.ast = ast
        self.report = WeaveReport()
        self.support_files = {}    # generated C sources the woven unit needs

    # ------------------------------------------------------------- selects

    def select(self, chain):
        """Evaluate a select chain; returns a list of join-point tuples in
        depth-first source order."""
        steps = [SelectStep(s, None) if isinstance(s, str) else
                 (s if isinstance(s, SelectStep) else SelectStep(*s)) for s in chain]
        prev = "file"
        for step in steps:
            if step.kind == "file" and prev == "file":
                continue
            if step.kind not in LEGAL_CHILDREN.get(prev, set()):
                raise IllegalChain(prev, step.kind)
            prev = step.kind
        self.report.selects += 1
        root = JoinPoint("file", self.ast, self)
        results = []
        self._expand(root, steps, (), results)
        return results

    def _expand(self, jp, steps, bound, results):
        if not steps:
            results.append(bound)
            return
        step = steps[0]
        if step.kind == "file" and jp.kind == "file":
            if self._passes(jp, step):
                self._expand(jp, steps[1:], bound + (jp,), results)
            return
        for child in self._children_of(jp, step.kind):
            if self._passes(child, step):
                self._expand(child, steps[1:], bound + (child,), results)

    def _passes(self, jp, step):
        if step.filter is None:
            return True
        attr, op, value = step.filter
        actual = _stringify(self.attribute(jp, attr))
        wanted = _stringify(value)
        if op == "==":
            return actual == wanted
        if op == "!=":
            return actual != wanted
        if op == "contains":
            return wanted in actual
        raise IllegalChain(jp.kind, f"filter op {op!r}")

    def _children_of(self, jp, kind):
        node = jp.node
        if jp.kind == "file":
            if kind == "function":
                return [JoinPoint("function", f, self) for f in node.functions()]
            return []
        if jp.kind == "function":
            scope = node.body
        elif jp.kind == "loop":
            scope = node
        elif jp.kind == "stmt":
            if kind == "call":
                return [JoinPoint("call", c.stmt, self, {"call": c})
                        for c in scan.calls_in_stmt(node)]
            if kind == "varref":
                return [JoinPoint("varref", node, self, {"tok": t})
                        for t in scan.varrefs_in_stmt(node)]
            return []
        else:
            return []

        if kind == "decl":
            out = []
            for n in _walk_scope(scope):
                if isinstance(n, DeclStmtNode) and not isinstance(n, GlobalDeclNode):
                    for d in n.declarators:
                        out.append(JoinPoint("decl", n, self, {"declarator": d}))
            return out
        if kind == "stmt":
            return [JoinPoint("stmt", n, self)
                    for n in _walk_scope(scope) if isinstance(n, STMT_KINDS)]
        if kind == "loop":
            return [JoinPoint("loop", n, self)
                    for n in _walk_scope(scope) if isinstance(n, LoopNode)]
        if kind == "call":
            calls = []
            if jp.kind == "loop":
                calls.extend(scan.calls_in_stmt(node))
                for n in _walk_scope(node):
                    calls.extend(scan.calls_in_stmt(n))
            else:
                for n in _walk_scope(scope):
                    calls.extend(scan.calls_in_stmt(n))
                calls.extend(scan.calls_in_stmt(scope))
            calls.sort(key=lambda c: (c.name_tok.line, c.name_tok.col))
            return [JoinPoint("call", c.stmt, self, {"call": c}) for c in calls]
        if kind == "pragma":
            return [JoinPoint("pragma", n, self)
                    for n in _walk_scope(scope) if isinstance(n, PragmaNode)]
        return []

    # ---------------------------------------------------------- attributes

    def attribute(self, jp, name):
        jp._check_alive()
        table = ATTRIBUTES.get(jp.kind)
        if table is None or name not in table:
            raise UnknownAttribute(jp.kind, name)
        self.report.attributes += 1
        return table[name](jp)

    # ------------------------------------------------------------- actions

    def insert(self, jp, where, fragment):
        """Insert code before/after a statement, or replace it."""
        if where not in ("before", "after", "replace"):
            raise ValueError(f"bad insert position {where!r}")
        jp._check_alive()
        target = _anchor_stmt(jp)
        try:
            if target.parent is self.ast:
                _, sloc = parse_fragment(fragment, "top")
            else:
                _, sloc = parse_fragment(fragment, "stmts")
        except CSyntaxError as exc:
            raise ParseErrorInFragment(str(exc)) from exc
        parent = target.parent
        if parent is None:
            raise InvalidAnchor("join point is no longer part of the tree")
        indent = indent_of(target)
        body = _reindent(fragment, indent)
        if where == "replace":
            lead = target.lead_trivia()
            for t in lead:
                target.parts.remove(t)
            gen = GeneratedNode(body, parts=lead, sloc=sloc)
            parent.replace_part(target, gen)
        else:
            gen = GeneratedNode("\n" + indent + body, sloc=sloc)
            if where == "before":
                parent.insert_part_before(target, gen)
            else:
                parent.insert_part_after(target, gen)
        self.report.actions += 1
        self.report.inserts += 1
        self.report.native_sloc += sloc
        return gen

    def set_type(self, jp, new_type):
        """Rewrite a declaration's type to the canonical rendering."""
        jp._check_alive()
        if jp.kind != "decl":
            raise NotADecl(f"setType applies to decl join points, not {jp.kind}")
        new = new_type if isinstance(new_type, ctype.CType) else ctype.parse(new_type)
        node = jp.node
        decl = jp.extra.get("declarator")
        if decl is not None:
            _rewrite_declared_type(node, node.base_toks, decl, new)
        elif isinstance(node, ParamNode):
            _rewrite_param_type(node, new)
        elif isinstance(node, FunctionNode):
            _rewrite_return_type(node, new)
        else:
            raise NotADecl("unrecognized decl join point")
        self.report.actions += 1

    def clone_function(self, jp, new_name):
        """Deep-copy a function under a new name, appended after the original."""
        jp._check_alive()
        if jp.kind != "function" or not isinstance(jp.node, FunctionNode):
            raise NotADecl("clone applies to function join points")
        if _name_defined(self.ast, new_name):
            raise DuplicateName(f"{new_name!r} is already defined")
        orig = jp.node
        dup = deep_copy_node(orig)
        for t in dup.lead_trivia():
            dup.parts.remove(t)
        dup.parts.insert(0, make_ws("\n\n"))
        dup.name_tok.text = new_name
        self.ast.insert_part_after(orig, dup)
        self.report.actions += 1
        return JoinPoint("function", dup, self)

    # -------------------------------------------------------------- helpers

    def function_jp(self, name):
        fn = self.ast.function(name)
        if fn is None:
            return None
        return JoinPoint("function", fn, self)


def _walk_scope(scope):
    for n in scope.walk():
        if n is not scope:
            yield n


def _stringify(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _anchor_stmt(jp):
    node = jp.node
    if jp.kind in ("call", "varref"):
        # act on the statement containing the reference
        while node is not None and not isinstance(
                node, STMT_KINDS + (DeclStmtNode, LoopNode, PragmaNode)):
            node = node.parent
        if node is None:
            raise InvalidAnchor("reference has no containing statement")
        return node
    return node


def _reindent(fragment, indent):
    lines = fragment.strip("\n").split("\n")
    out = [lines[0].rstrip()]
    for line in lines[1:]:
        out.append(indent + line.rstrip() if line.strip() else "")
    return "\n".join(out)


def _name_defined(ast, name):
    for fn in ast.functions():
        if fn.name == name:
            return True
    for n in ast.children():
        if isinstance(n, GlobalDeclNode):
            for d in n.declarators:
                if d.name == name:
                    return True
    return name in ast.typedefs


# ------------------------------------------------------------ type rewrites

def blank_tokens(node, toks):
    """Erase tokens (and one preceding space run each) from a node's parts."""
    for tok in toks:
        idx = None
        for i, p in enumerate(node.parts):
            if p is tok:
                idx = i
                break
        if idx is None:
            tok.text = ""
            continue
        prev = node.parts[idx - 1] if idx > 0 else None
        if isinstance(prev, Token) and prev.kind == "whitespace" and "\n" not in prev.text:
            prev.text = ""
        tok.text = ""


def _base_words(new):
    return list(new.quals) + [new.base]


def _rewrite_base(node, base_toks, new):
    live = [t for t in base_toks if t.text != ""]
    if not live:
        raise NotADecl("declaration has no type tokens")
    live[0].text = " ".join(_base_words(new))
    blank_tokens(node, live[1:])


def declared_type(base_text, ptr_toks, array_runs):
    text = base_text + "".join(t.text for t in ptr_toks)
    for run in array_runs:
        text += "".join(t.text for t in run)
    return ctype.parse(text)


def _rewrite_declared_type(node, base_toks, decl, new):
    _rewrite_base(node, base_toks, new)
    cur = declared_type(" ".join(t.text for t in base_toks if t.text), decl.ptr_toks, decl.array_runs)
    if cur.ptr == new.ptr and list(cur.arrays) == list(new.arrays):
        return
    if len(node.declarators) > 1:
        raise UnsupportedConstruct(
            node.start_line(),
            "setType with declarator changes on a multi-declarator statement")
    # rebuild the pointer run
    blank_tokens(node, decl.ptr_toks)
    if new.ptr:
        star = Token("punctuator", "*" * new.ptr)
        node.insert_part_before(decl.name_tok, star)
        decl.ptr_toks = [star]
    else:
        decl.ptr_toks = []
    # rebuild the array extents
    anchor = decl.name_tok
    for run in decl.array_runs:
        blank_tokens(node, run)
    if new.arrays:
        ext = Token("punctuator", "".join(f"[{e}]" for e in new.arrays))
        node.insert_part_after(anchor, ext)
        decl.array_runs = [[ext]]
    else:
        decl.array_runs = []


def _rewrite_param_type(node, new):
    _rewrite_base(node, node.base_toks, new)
    base = " ".join(t.text for t in node.base_toks if t.text)
    cur = declared_type(base, node.ptr_toks, node.array_runs)
    if cur.ptr == new.ptr and list(cur.arrays) == list(new.arrays):
        return
    blank_tokens(node, node.ptr_toks)
    node.ptr_toks = []
    if new.ptr:
        star = Token("punctuator", "*" * new.ptr)
        if node.name_tok is not None:
            node.insert_part_before(node.name_tok, star)
        else:
            node.parts.append(star)
        node.ptr_toks = [star]
    for run in node.array_runs:
        blank_tokens(node, run)
    node.array_runs = []
    if new.arrays:
        ext = Token("punctuator", "".join(f"[{e}]" for e in new.arrays))
        if node.name_tok is not None:
            node.insert_part_after(node.name_tok, ext)
        else:
            node.parts.append(ext)
        node.array_runs = [[ext]]


def _rewrite_return_type(node, new):
    _rewrite_base(node, node.ret_base_toks, new)
    stars = sum(t.text.count("*") for t in node.ret_ptr_toks)
    if stars != new.ptr:
        blank_tokens(node, node.ret_ptr_toks)
        node.ret_ptr_toks = []
        if new.ptr:
            star = Token("punctuator", "*" * new.ptr)
            node.insert_part_before(node.name_tok, star)
            node.ret_ptr_toks = [star]


# -------------------------------------------------------------- attributes

def _decl_type(jp):
    node = jp.node
    d = jp.extra.get("declarator")
    if d is not None:
        base = " ".join(t.text for t in node.base_toks if t.text)
        return declared_type(base, d.ptr_toks, d.array_runs).render()
    if isinstance(node, ParamNode):
        base = " ".join(t.text for t in node.base_toks if t.text)
        return declared_type(base, node.ptr_toks, node.array_runs).render()
    if isinstance(node, FunctionNode):
        return ctype.parse(node.return_type_text()).render()
    raise UnknownAttribute("decl", "type")


def _decl_name(jp):
    d = jp.extra.get("declarator")
    if d is not None:
        return d.name
    if isinstance(jp.node, ParamNode):
        return jp.node.name
    if isinstance(jp.node, FunctionNode):
        return jp.node.name
    return ""


def _decl_has_init(jp):
    d = jp.extra.get("declarator")
    return bool(d is not None and d.has_init)


def _loop_index_var(jp):
    node = jp.node
    if node.loop_kind != "for":
        return ""
    groups = scan.split_top(scan.significant(node.header_toks), ";")
    if not groups or not groups[0]:
        return ""
    for t in groups[0]:
        if t.kind == "identifier":
            return t.text
    return ""


def _loop_is_innermost(jp):
    return not any(isinstance(n, LoopNode)
                   for n in jp.node.body.walk() if n is not jp.node.body)


def _fn_param_types(jp):
    out = []
    for p in jp.node.params:
        base = " ".join(t.text for t in p.base_toks if t.text)
        out.append(declared_type(base, p.ptr_toks, p.array_runs).render())
    return ",".join(out)


ATTRIBUTES = {
    "file": {
        "name": lambda jp: jp.node.file_name,
    },
    "function": {
        "name": lambda jp: jp.node.name,
        "returnType": lambda jp: ctype.parse(jp.node.return_type_text()).render(),
        "paramTypes": _fn_param_types,
    },
    "decl": {
        "name": _decl_name,
        "type": _decl_type,
        "hasInit": _decl_has_init,
    },
    "call": {
        "name": lambda jp: jp.extra["call"].name,
        "argCount": lambda jp: jp.extra["call"].arg_count,
    },
    "loop": {
        "kind": lambda jp: jp.node.loop_kind,
        "indexVar": _loop_index_var,
        "isInnermost": _loop_is_innermost,
        "hasPragma": lambda jp: bool(jp.node.pragmas),
    },
    "pragma": {
        "text": lambda jp: jp.node.pragma_text,
    },
    "stmt": {
        "code": lambda jp: jp.node.text().strip(),
    },
    "varref": {
        "name": lambda jp: jp.extra["tok"].text,
    },
}


# ------------------------------------------------------------ staticMetrics

def static_metrics(input_ast, woven_ast, aspect_text=""):
    """Table-1-style row comparing input and woven units."""
    from .aspects import count_aspect_sloc
    if aspect_text:
        aspect_sloc, aspect_count = count_aspect_sloc(aspect_text)
    else:
        aspect_sloc, aspect_count = 0, 0
    woven_reparsed = parse(woven_ast.text() if isinstance(woven_ast, Node)
                           else woven_ast, "<woven>")
    return StaticMetricsRow(
        aspect_sloc=aspect_sloc,
        aspect_count=aspect_count,
        input_sloc=count_sloc(input_ast),
        input_funcs=len(input_ast.functions()),
        woven_sloc=count_sloc(woven_reparsed),
        woven_funcs=len(woven_reparsed.functions()),
    )
