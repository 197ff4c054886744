"""Precision tuning: rewrite declared types, literals and libm calls inside
one function, and enumerate mixed-precision assignments for clone trees."""

import itertools
from dataclasses import dataclass, field

from .. import ctype
from ..errors import FunctionNotFound, WeaveError
from ..frontend import scan
from ..frontend.lexer import is_float_literal
from ..frontend.nodes import DeclStmtNode
from ..weave import JoinPoint, blank_tokens

LIBM_DOUBLE_TO_FLOAT = {
    "sqrt": "sqrtf", "fabs": "fabsf", "pow": "powf", "exp": "expf",
    "log": "logf",
}

_TYPE_WORDS = {
    "void", "char", "short", "int", "long", "float", "double", "signed",
    "unsigned", "_Bool", "const", "volatile",
}


@dataclass
class PrecisionMap:
    old_base: str
    new_base: str
    libm_map: dict = field(default_factory=dict)
    literal_suffix: str = ""

    def __post_init__(self):
        if self.old_base == self.new_base:
            raise WeaveError("precision map must change the base type")


def default_precision_map(old="double", new="float"):
    if (old, new) == ("double", "float"):
        return PrecisionMap(old, new, dict(LIBM_DOUBLE_TO_FLOAT), "f")
    if (old, new) == ("float", "double"):
        back = {v: k for k, v in LIBM_DOUBLE_TO_FLOAT.items()}
        return PrecisionMap(old, new, back, "")
    return PrecisionMap(old, new, {}, "")


def change_type(declared, old_base, new_base):
    """Compound-type aware base swap; see ctype.change_base."""
    return ctype.change_base(declared, old_base, new_base)


def change_precision(session, function_name, pmap):
    """Rewrite one function in place: declared types (locals, parameters,
    return, cast targets), floating literals and mapped libm calls. Nothing
    outside the function is touched."""
    ast = session.ast
    fn = ast.function(function_name)
    if fn is None:
        raise FunctionNotFound(f"no function {function_name!r}")

    ret = ctype.parse(fn.return_type_text())
    if ret.base == pmap.old_base:
        session.set_type(JoinPoint("decl", fn, session),
                         ret.with_base(pmap.new_base))
    for param in fn.params:
        jp = JoinPoint("decl", param, session)
        cur = ctype.parse(session.attribute(jp, "type"))
        if cur.base == pmap.old_base:
            session.set_type(jp, cur.with_base(pmap.new_base))
    for node in fn.body.walk():
        if isinstance(node, DeclStmtNode):
            for d in node.declarators:
                jp = JoinPoint("decl", node, session, {"declarator": d})
                cur = ctype.parse(session.attribute(jp, "type"))
                if cur.base == pmap.old_base:
                    session.set_type(jp, cur.with_base(pmap.new_base))

    for node in fn.body.walk():
        if _rewrite_casts(session, node, pmap):
            pass
    _rewrite_literals(session, fn, pmap)
    _rewrite_libm_calls(session, fn, pmap)
    return fn


def _rewrite_casts(session, node, pmap):
    """Rewrite (old)->(new) cast targets in a node's own tokens."""
    sig = scan.own_significant(node)
    old_words = pmap.old_base.split()
    changed = False
    for i, tok in enumerate(sig):
        if tok.text != "(":
            continue
        if i > 0 and (sig[i - 1].kind == "identifier" or sig[i - 1].text in (")", "]")):
            continue    # call or parenthesized expression, not a cast
        j = i + 1
        words = []
        while j < len(sig) and (sig[j].text in _TYPE_WORDS):
            words.append(sig[j])
            j += 1
        while j < len(sig) and sig[j].text == "*":
            j += 1
        if j >= len(sig) or sig[j].text != ")" or not words:
            continue
        if [w.text for w in words] != old_words:
            continue
        words[0].text = pmap.new_base
        blank_tokens(node, words[1:])
        session.report.actions += 1
        changed = True
    return changed


def _rewrite_literals(session, fn, pmap):
    for tok in fn.body.all_tokens():
        if tok.kind != "literal" or not is_float_literal(tok.text):
            continue
        if pmap.literal_suffix:
            if not tok.text[-1] in "fFlL":
                tok.text += pmap.literal_suffix
                session.report.actions += 1
        elif pmap.old_base == "float" and tok.text[-1] in "fF":
            tok.text = tok.text[:-1]
            session.report.actions += 1


def _rewrite_libm_calls(session, fn, pmap):
    for call in scan.calls_under(fn.body):
        new_name = pmap.libm_map.get(call.name)
        if new_name is not None:
            call.name_tok.text = new_name
            session.report.actions += 1


# ----------------------------------------------------- mixed-precision mixes

def enumerate_precision_mixes(order, edges, count):
    """Per-function base assignments over {double, float}.

    order: function names in call-tree discovery order. edges: (caller,
    callee) pairs. Assignments are produced in lexicographic order (double
    before float per position), filtered by the rule that a double consumer
    must not call a float producer, and capped at count. The all-double
    assignment (the original mix) is skipped.
    """
    mixes = []
    for combo in itertools.product(("double", "float"), repeat=len(order)):
        assignment = dict(zip(order, combo))
        if all(v == "double" for v in combo):
            continue
        ok = all(not (assignment[u] == "double" and assignment[v] == "float")
                 for u, v in edges if u in assignment and v in assignment)
        if not ok:
            continue
        mixes.append(assignment)
        if len(mixes) >= count:
            break
    return mixes


def create_mixed_versions(session, root_function, count, old="double",
                          new="float"):
    """Clone the call tree once per admissible precision mix and retype the
    clones assigned the new base. Returns [(suffix, assignment)]."""
    from .clone import call_graph, clone_call_tree
    graph = call_graph(session.ast)
    if root_function not in graph:
        raise FunctionNotFound(f"no function {root_function!r}")
    order = _reachable_order(graph, root_function)
    edges = [(u, v) for u in order for v in graph.get(u, []) if v in order]
    mixes = enumerate_precision_mixes(order, edges, count)
    out = []
    for i, assignment in enumerate(mixes):
        suffix = f"_m{i}"
        clone_call_tree(session, root_function, suffix)
        pmap = default_precision_map(old, new)
        for name in order:
            if assignment[name] == new:
                change_precision(session, name + suffix, pmap)
        out.append((suffix, assignment))
    return out


def _reachable_order(graph, root):
    order = []
    seen = set()

    def visit(name):
        if name in seen or name not in graph:
            return
        seen.add(name)
        order.append(name)
        for callee in graph[name]:
            visit(callee)

    visit(root)
    return order
