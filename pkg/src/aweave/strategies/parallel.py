"""OpenMP auto-parallelization of canonical for loops, plus disabling of
nested parallel-for pragmas.

Safety here is purely syntactic and errs on refusal: canonical induction,
array writes indexed by the induction variable, recognized scalar
reductions (+, *, min, max), no break/goto/return, calls only to functions
detected pure (or libm)."""

import re
from dataclasses import dataclass, field

from ..frontend import scan
from ..frontend.lexer import Token
from ..frontend.nodes import LoopNode, PragmaNode, indent_of
from .analysis import LIBM_PURE, declared_in, for_init_decls, writes_in_tokens
from .memoize import pure_functions

PARALLEL_FOR_RE = re.compile(r"#\s*pragma\s+omp\s+parallel\s+for\b")

_REL_OPS = {"<", "<=", ">", ">="}


@dataclass
class LoopVerdict:
    loop_id: str
    parallelizable: bool
    reason: str = ""
    reduction_vars: list = field(default_factory=list)   # (op, name)

    def as_dict(self):
        return {
            "loopId": self.loop_id,
            "parallelizable": self.parallelizable,
            "reason": self.reason,
            "reductionVars": [f"{op}:{name}" for op, name in self.reduction_vars],
        }


def auto_parallelize(session):
    """Insert '#pragma omp parallel for' above every for loop detected safe;
    unsafe loops are skipped with a reason. Returns the per-loop report."""
    ast = session.ast
    pure = pure_functions(ast)
    verdicts = []
    for fn in ast.functions():
        fn_locals = declared_in(fn.body) | {p.name for p in fn.params if p.name}
        for node in fn.body.walk():
            if not isinstance(node, LoopNode) or node.loop_kind != "for":
                continue
            loop_id = f"{fn.name}:{node.kw_tok.line}"
            if any(PARALLEL_FOR_RE.search(p.pragma_text) for p in node.pragmas):
                verdicts.append(LoopVerdict(loop_id, True, "already parallelized"))
                continue
            verdict = _analyze_for(node, loop_id, pure)
            verdicts.append(verdict)
            if verdict.parallelizable:
                _attach_pragma(session, node, verdict.reduction_vars)
    return verdicts


def _analyze_for(loop, loop_id, pure):
    header = scan.significant(loop.header_toks)
    groups = scan.split_top(header, ";")
    if len(groups) != 3:
        return LoopVerdict(loop_id, False, "non-canonical header")
    init, cond, inc = groups
    ivar = _induction_from_init(init)
    if ivar is None:
        return LoopVerdict(loop_id, False, "non-canonical init")
    if not _canonical_cond(cond, ivar):
        return LoopVerdict(loop_id, False, "non-canonical test")
    if not _canonical_inc(inc, ivar):
        return LoopVerdict(loop_id, False, "non-canonical increment")

    body = loop.body
    body_locals = declared_in(body)
    body_sig = []
    for n in body.walk():
        body_sig.extend(scan.own_significant(n))

    for t in body_sig:
        if t.text in ("break", "goto", "return"):
            return LoopVerdict(loop_id, False, "control flow escapes the loop")

    for n in body.walk():
        for call in scan.calls_in_tokens(scan.own_significant(n), n):
            if call.name not in pure and call.name not in LIBM_PURE:
                return LoopVerdict(loop_id, False,
                                   f"call to impure function {call.name!r}")

    reductions = {}
    written_arrays = set()
    reduction_stmts = []
    for n in body.walk():
        sig = scan.own_significant(n)
        for w in writes_in_tokens(sig):
            if w.deref or not w.target:
                return LoopVerdict(loop_id, False, "write through indirection")
            if w.target == ivar:
                return LoopVerdict(loop_id, False,
                                   "induction variable written in the body")
            if w.subscripts:
                if not w.subscripts[0] == [ivar]:
                    return LoopVerdict(
                        loop_id, False, "loop-carried dependence: array write "
                        "not indexed by the induction variable")
                written_arrays.add(w.target)
                continue
            if w.target in body_locals:
                continue    # private to an iteration
            op = _reduction_op(w)
            if op is None:
                return LoopVerdict(
                    loop_id, False,
                    f"write to shared scalar {w.target!r} is not a "
                    "recognized reduction")
            prev = reductions.get(w.target)
            if prev is not None and prev != op:
                return LoopVerdict(loop_id, False,
                                   f"conflicting reduction ops on {w.target!r}")
            reductions[w.target] = op
            reduction_stmts.append((n, w.target))

    # a written array read at another index is a loop-carried dependence
    for arr in written_arrays:
        for n in body.walk():
            sig = scan.own_significant(n)
            for i, t in enumerate(sig):
                if t.text != arr or t.kind != "identifier":
                    continue
                if i + 1 >= len(sig) or sig[i + 1].text != "[":
                    return LoopVerdict(loop_id, False,
                                       f"array {arr!r} escapes without a subscript")
                close = scan.balanced_run(sig, i + 1)
                sub = [x.text for x in sig[i + 2:close]]
                if sub != [ivar]:
                    return LoopVerdict(
                        loop_id, False, "loop-carried dependence: array "
                        f"{arr!r} accessed at another index")

    # a reduction variable may appear only inside its reduction statements,
    # and never in the loop header (the bound must stay invariant)
    header_names = {t.text for t in cond + inc if t.kind == "identifier"}
    red_nodes = {id(n) for n, _ in reduction_stmts}
    for name in reductions:
        if name in header_names:
            return LoopVerdict(loop_id, False,
                               f"loop bound {name!r} is modified in the body")
        for n in body.walk():
            if id(n) in red_nodes:
                continue
            for t in scan.own_significant(n):
                if t.kind == "identifier" and t.text == name:
                    return LoopVerdict(
                        loop_id, False,
                        f"reduction variable {name!r} used outside its update")

    pairs = sorted((op, name) for name, op in reductions.items())
    return LoopVerdict(loop_id, True, "", pairs)


def _induction_from_init(init):
    if not init:
        return None
    toks = list(init)
    if toks[0].kind == "keyword" or (len(toks) > 1 and toks[0].kind == "identifier"
                                     and toks[1].kind == "identifier"):
        toks = toks[1:]    # drop a leading type word ('int i = 0')
    if len(toks) >= 2 and toks[0].kind == "identifier" and toks[1].text == "=":
        return toks[0].text
    return None


def _canonical_cond(cond, ivar):
    if len(cond) < 3:
        return False
    if not (cond[0].kind == "identifier" and cond[0].text == ivar):
        return False
    if cond[1].text not in _REL_OPS:
        return False
    return all(t.text != ivar for t in cond[2:])


def _canonical_inc(inc, ivar):
    texts = [t.text for t in inc]
    if texts in ([ivar, "++"], ["++", ivar], [ivar, "--"], ["--", ivar]):
        return True
    if len(texts) >= 3 and texts[0] == ivar and texts[1] in ("+=", "-="):
        return ivar not in texts[2:]
    if len(texts) >= 5 and texts[0] == ivar and texts[1] == "=" \
            and texts[2] == ivar and texts[3] in ("+", "-"):
        return ivar not in texts[4:]
    return False


def _reduction_op(w):
    """+, *, min or max when the write is a recognized reduction update."""
    if w.op == "+=" or w.op in ("++",):
        return "+"
    if w.op == "*=":
        return "*"
    if w.op == "=" and w.rhs:
        if len(w.rhs) >= 3 and w.rhs[0] == w.target and w.rhs[1] in ("+", "*"):
            if w.target not in w.rhs[2:]:
                return w.rhs[1]
        if len(w.rhs) >= 4 and w.rhs[0] in ("fmin", "fminf", "min") \
                and w.rhs[1] == "(" and w.rhs[2] == w.target:
            return "min"
        if len(w.rhs) >= 4 and w.rhs[0] in ("fmax", "fmaxf", "max") \
                and w.rhs[1] == "(" and w.rhs[2] == w.target:
            return "max"
    return None


def _attach_pragma(session, loop, reduction_pairs):
    text = "#pragma omp parallel for"
    by_op = {}
    for op, name in reduction_pairs:
        by_op.setdefault(op, []).append(name)
    for op in sorted(by_op):
        text += f" reduction({op}:{','.join(sorted(by_op[op]))})"
    indent = indent_of(loop)
    ptok = Token("pragma-text", text)
    node = PragmaNode([Token("whitespace", "\n" + indent), ptok], ptok)
    node.generated = True
    parent = loop.parent
    parent.insert_part_before(loop, node)
    loop.pragmas.append(node)
    session.report.actions += 1
    session.report.inserts += 1


def disable_nested_parallel_pragmas(session):
    """Turn parallel-for pragmas on nested loops into inline comments; only
    the outermost parallelized loops keep active pragmas."""
    ast = session.ast
    bearing = [n for n in ast.walk() if isinstance(n, LoopNode)
               and any(PARALLEL_FOR_RE.search(p.pragma_text) for p in n.pragmas)]
    bearing_ids = {id(n) for n in bearing}
    changed = 0
    for outer in bearing:
        for inner in outer.body.walk():
            if isinstance(inner, LoopNode) and id(inner) in bearing_ids:
                for p in inner.pragmas:
                    if PARALLEL_FOR_RE.search(p.pragma_text) \
                            and p.pragma_tok.kind == "pragma-text":
                        p.to_comment()
                        session.report.actions += 1
                        changed += 1
    return changed
