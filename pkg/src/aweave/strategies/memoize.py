"""Memoization: conservative purity detection, call-site rewiring and
generation of the per-function table support source."""

from dataclasses import dataclass

from ..csupport import memo_sources
from ..errors import FunctionNotFound, UnsupportedSignature, WeaveError
from ..frontend import scan
from ..frontend.nodes import DeclStmtNode
from ..weave import JoinPoint, declared_type
from .analysis import (
    LIBM_PURE, NUMERIC_BASES, local_names, pointerish_params, writes_in_tokens,
)


@dataclass
class MemoConfig:
    function_name: str
    table_size: int = 256
    policy: str = "REPLACE"        # REPLACE | KEEP
    enabled_by_default: bool = True
    force: bool = False            # memoize even if not detected pure

    def __post_init__(self):
        if self.table_size < 1 or self.table_size & (self.table_size - 1):
            raise WeaveError("table size must be a power of two >= 1")
        if self.policy not in ("REPLACE", "KEEP"):
            raise WeaveError(f"unknown conflict policy {self.policy!r}")


def pure_functions(ast):
    """Greatest fixpoint of: no global/static writes, no writes through
    indirection, no IO or unknown external calls, and calls only into the
    set itself (or whitelisted libm)."""
    defined = {fn.name for fn in ast.functions()}
    candidates = set()
    callees = {}
    for fn in ast.functions():
        locally_ok, called = _locally_pure(fn, defined)
        callees[fn.name] = called
        if locally_ok:
            candidates.add(fn.name)
    changed = True
    while changed:
        changed = False
        for name in sorted(candidates):
            for callee in callees[name]:
                if callee in defined and callee not in candidates:
                    candidates.discard(name)
                    changed = True
                    break
    return candidates


def _locally_pure(fn, defined):
    locals_ = local_names(fn)
    ptr_params = pointerish_params(fn)
    called = set()
    for node in fn.body.walk():
        if isinstance(node, DeclStmtNode) and any(
                t.text == "static" for t in node.storage_toks):
            return False, called    # static local state survives calls
        sig = scan.own_significant(node)
        for call in scan.calls_in_tokens(sig, node):
            called.add(call.name)
            if call.name not in defined and call.name not in LIBM_PURE:
                return False, called    # IO or unknown external call
        for w in writes_in_tokens(sig):
            if w.deref or not w.target:
                return False, called
            if w.target in ptr_params:
                return False, called    # write through a pointer argument
            if w.target not in locals_:
                return False, called    # global write
    return True, called


def memoizable_signature(fn):
    """(arg_type, ret_type, arg_count) for a by-value numeric signature,
    uniform across arguments; None when the function does not qualify."""
    if not fn.params:
        return None
    types = []
    for p in fn.params:
        base = " ".join(t.text for t in p.base_toks if t.text)
        t = declared_type(base, p.ptr_toks, p.array_runs)
        if t.ptr or t.arrays or t.base not in NUMERIC_BASES:
            return None
        types.append(t.render())
    if len(set(types)) != 1:
        return None
    from .. import ctype
    ret = ctype.parse(fn.return_type_text())
    if ret.ptr or ret.arrays or ret.base not in NUMERIC_BASES:
        return None
    return types[0], ret.render(), len(types)


def detect_memoizable(ast):
    """Functions safe to memoize by argument value, in source order."""
    pure = pure_functions(ast)
    out = []
    for fn in ast.functions():
        if fn.name in pure and memoizable_signature(fn) is not None:
            out.append(fn.name)
    return out


def memoize(session, cfg):
    """Wrap one function behind a table: rewrite all in-unit call sites to
    <fn>_wrapper, declare the runtime controls, and return the generated
    support sources (aw_memo_<fn>.c/.h)."""
    ast = session.ast
    fn = ast.function(cfg.function_name)
    if fn is None:
        raise FunctionNotFound(f"no function {cfg.function_name!r}")
    sig = memoizable_signature(fn)
    if sig is None:
        raise UnsupportedSignature(
            f"{cfg.function_name!r} needs uniform by-value numeric arguments "
            "and a numeric return type")
    arg_type, ret_type, arg_count = sig
    if not cfg.force and cfg.function_name not in pure_functions(ast):
        raise UnsupportedSignature(
            f"{cfg.function_name!r} was not detected pure; pass force to "
            "memoize it anyway")

    wrapper = cfg.function_name + "_wrapper"
    # every in-unit call site, recursive self-calls included, goes through
    # the wrapper; the original stays as the wrapper's delegate
    for other in ast.functions():
        for call in scan.calls_under(other.body):
            if call.name == cfg.function_name:
                call.name_tok.text = wrapper
                session.report.actions += 1

    decls = [
        f"extern {ret_type} {wrapper}({', '.join([arg_type] * arg_count)});",
        f"extern int {cfg.function_name}_memo_enabled;",
        f"extern int {cfg.function_name}_memo_policy;",
    ]
    first_fn = ast.functions()[0]
    session.insert(JoinPoint("function", first_fn, session), "before",
                   "\n".join(decls))
    support = memo_sources(cfg.function_name, arg_type, ret_type, arg_count,
                           cfg.table_size, cfg.policy, cfg.enabled_by_default)
    session.support_files.update(support)
    return support
