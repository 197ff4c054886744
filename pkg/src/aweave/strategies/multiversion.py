"""Version dispatch: replace a call statement with a knob-driven switch whose
arms time each version and report to the metric feed."""

from .. import ctype
from ..errors import (
    FunctionNotFound, NotAStatementCall, SignatureMismatch,
)
from ..frontend import scan
from ..frontend.nodes import DirectiveNode, OpaqueStmtNode, TypedefNode
from ..weave import JoinPoint
from ..csupport import runtime_sources

_FLOATING = {"float", "double"}


def find_call_statement(session, callee, occurrence=0):
    """The call join point for the n-th statement-level call to callee."""
    seen = 0
    for fn in session.ast.functions():
        for node in fn.body.walk():
            if not isinstance(node, OpaqueStmtNode):
                continue
            for call in scan.calls_in_stmt(node):
                if call.name == callee:
                    if seen == occurrence:
                        return JoinPoint("call", node, session, {"call": call})
                    seen += 1
    raise NotAStatementCall(
        f"no statement-level call to {callee!r} (occurrence {occurrence})")


def multiversion(session, call_jp, versions, knob_name):
    """Dispatch between versions on an integer knob; knob 0 is the original.

    The call statement is replaced by a switch; each arm runs one version
    bracketed by timing code that reports to the metric feed, and the default
    arm flags knob_oob then falls back to version 0. Returns the runtime
    support sources the woven unit expects to be built with.
    """
    ast = session.ast
    fns = {}
    for name in versions:
        fn = ast.function(name)
        if fn is None:
            raise FunctionNotFound(f"version {name!r} is not defined")
        fns[name] = fn
    _check_signatures(session, [fns[n] for n in versions])

    call = call_jp.extra.get("call")
    node = call_jp.node
    if call is None or not isinstance(node, OpaqueStmtNode) or node.body is not None:
        raise NotAStatementCall("the dispatch target must be a full call statement")

    sig = scan.own_significant(node)
    texts = [t.text for t in sig]
    try:
        callee_idx = next(i for i, t in enumerate(sig) if t is call.name_tok)
    except StopIteration:
        raise NotAStatementCall("call token not found in its statement")

    arms = []
    for i, name in enumerate(versions):
        stmt_texts = list(texts)
        stmt_texts[callee_idx] = name
        arms.append((i, name, _join(stmt_texts)))

    lines = ["{"]
    lines.append(f'    int {knob_name} = aw_knob_read("{knob_name}", 0);')
    lines.append(f"    switch ({knob_name}) {{")
    for i, name, stmt in arms:
        lines.append(f"    case {i}: {{")
        lines.append("        double aw_t0 = aw_now_us();")
        lines.append(f"        {stmt}")
        lines.append(f'        aw_feed_call("{knob_name}", {i}, "{name}", '
                     "aw_now_us() - aw_t0);")
        lines.append("        break;")
        lines.append("    }")
    zero_i, zero_name, zero_stmt = arms[0]
    lines.append("    default: {")
    lines.append(f'        aw_feed_oob("{knob_name}", {knob_name});')
    lines.append("        double aw_t0 = aw_now_us();")
    lines.append(f"        {zero_stmt}")
    lines.append(f'        aw_feed_call("{knob_name}", {zero_i}, "{zero_name}", '
                 "aw_now_us() - aw_t0);")
    lines.append("        break;")
    lines.append("    }")
    lines.append("    }")
    lines.append("}")

    session.insert(call_jp, "replace", "\n".join(lines))
    ensure_runtime_include(session)
    support = runtime_sources()
    session.support_files.update(support)
    return support


def ensure_runtime_include(session):
    ast = session.ast
    for n in ast.children():
        if isinstance(n, DirectiveNode) and "aw_runtime.h" in n.text():
            return
    anchor = None
    for n in ast.children():
        if not isinstance(n, (DirectiveNode, TypedefNode)):
            anchor = n
            break
    if anchor is None:
        return
    jp = JoinPoint(anchor.kind, anchor, session)
    session.insert(jp, "before", '#include "aw_runtime.h"')


def _check_signatures(session, fns):
    base = fns[0]
    base_params = _param_types(base)
    base_ret = ctype.parse(base.return_type_text())
    for fn in fns[1:]:
        params = _param_types(fn)
        if len(params) != len(base_params):
            raise SignatureMismatch(
                f"{fn.name!r} takes {len(params)} args, "
                f"{base.name!r} takes {len(base_params)}")
        for a, b in zip(base_params, params):
            if not _compatible(a, b):
                raise SignatureMismatch(
                    f"parameter type {b.render()!r} of {fn.name!r} is not "
                    f"compatible with {a.render()!r}")
        if not _compatible(base_ret, ctype.parse(fn.return_type_text())):
            raise SignatureMismatch(
                f"return type of {fn.name!r} is not compatible with "
                f"{base.name!r}")


def _param_types(fn):
    from ..weave import declared_type
    out = []
    for p in fn.params:
        base = " ".join(t.text for t in p.base_toks if t.text)
        out.append(declared_type(base, p.ptr_toks, p.array_runs))
    return out


def _compatible(a, b):
    """Equal, or differing only in a float/double base (value conversion)."""
    if a == b:
        return True
    return (a.ptr == b.ptr == 0 and not a.arrays and not b.arrays
            and a.base in _FLOATING and b.base in _FLOATING)


_NO_SPACE_BEFORE = {",", ";", ")", "]", "(", "["}
_NO_SPACE_AFTER = {"(", "[", "!", "~"}


def _join(texts):
    out = []
    for t in texts:
        if out and t not in _NO_SPACE_BEFORE and out[-1] not in _NO_SPACE_AFTER:
            out.append(" ")
        out.append(t)
    return "".join(out)
