"""Token-level side-effect analysis shared by purity detection and the loop
parallelizer. Deliberately conservative: anything we cannot classify is a
write we refuse to reason about."""

from dataclasses import dataclass, field

from ..frontend import scan
from ..frontend.nodes import DeclStmtNode, LoopNode

ASSIGN_OPS = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=",
}

LIBM_PURE = frozenset("""
sqrt sqrtf fabs fabsf pow powf exp expf log logf log2 log10 sin sinf cos
cosf tan tanf floor floorf ceil ceilf fmin fminf fmax fmaxf fmod fmodf
atan atan2 abs labs
""".split())

NUMERIC_BASES = {
    "char", "short", "int", "long", "float", "double",
    "signed char", "unsigned char", "short int", "unsigned short",
    "unsigned", "unsigned int", "long int", "unsigned long",
    "unsigned long long", "long long", "long double",
}


@dataclass
class Write:
    target: str            # written name, or "" for an unresolved target
    subscripts: list       # token-text runs, one per [..] level
    op: str                # assignment operator or ++/--
    rhs: list              # rhs token texts (assignments only)
    deref: bool = False    # write through * or member access


def writes_in_tokens(sig):
    """Write events in a significant-token run."""
    events = []
    for i, tok in enumerate(sig):
        if tok.text in ASSIGN_OPS:
            events.append(_classify_target(sig, i))
        elif tok.text in ("++", "--"):
            name = None
            if i + 1 < len(sig) and sig[i + 1].kind == "identifier":
                name = sig[i + 1].text
            elif i > 0 and sig[i - 1].kind == "identifier":
                name = sig[i - 1].text
            elif i > 0 and sig[i - 1].text == "]":
                events.append(_classify_target(sig, i))
                continue
            if name is not None:
                events.append(Write(name, [], tok.text, []))
    return events


def _classify_target(sig, op_idx):
    op = sig[op_idx].text
    rhs = _rhs_run(sig, op_idx)
    j = op_idx - 1
    subs = []
    while j >= 0 and sig[j].text == "]":
        depth = 0
        k = j
        while k >= 0:
            if sig[k].text == "]":
                depth += 1
            elif sig[k].text == "[":
                depth -= 1
                if depth == 0:
                    break
            k -= 1
        subs.insert(0, [t.text for t in sig[k + 1:j]])
        j = k - 1
    if j >= 0 and sig[j].kind == "identifier":
        name = sig[j].text
        deref = False
        if j > 0 and sig[j - 1].text in (".", "->"):
            deref = True
        elif j > 0 and sig[j - 1].text == "*" and not subs:
            # '*p = ...' (a '*' that is not a multiplication)
            if j == 1 or sig[j - 2].text in ASSIGN_OPS or sig[j - 2].text in (
                    "(", ",", ";", "{", "return"):
                deref = True
        return Write(name, subs, op, rhs, deref=deref)
    return Write("", subs, op, rhs, deref=True)


def _rhs_run(sig, op_idx):
    out = []
    depth = 0
    for t in sig[op_idx + 1:]:
        if t.text in ("(", "[", "{"):
            depth += 1
        elif t.text in (")", "]", "}"):
            if depth == 0:
                break
            depth -= 1
        elif depth == 0 and t.text in (",", ";"):
            break
        out.append(t.text)
    return out


def local_names(fn):
    """Names declared inside a function: parameters, local declarations and
    for-header init declarations."""
    names = {p.name for p in fn.params if p.name}
    names.update(declared_in(fn.body))
    return names


def declared_in(subtree):
    names = set()
    for node in subtree.walk():
        if isinstance(node, DeclStmtNode):
            if any(t.text == "extern" for t in node.storage_toks):
                continue    # names external state, not a local
            for d in node.declarators:
                names.add(d.name)
        elif isinstance(node, LoopNode) and node.loop_kind == "for":
            names.update(for_init_decls(node))
    return names


def for_init_decls(loop):
    """Names declared in a for-loop's init clause (e.g. 'int i = 0')."""
    groups = scan.split_top(scan.significant(loop.header_toks), ";")
    if not groups:
        return set()
    init = groups[0]
    if not init or init[0].kind not in ("keyword", "identifier"):
        return set()
    if init[0].kind == "keyword" or (len(init) > 1 and init[1].kind == "identifier"):
        for i, t in enumerate(init):
            if t.kind == "identifier" and i > 0:
                return {t.text}
    return set()


def pointerish_params(fn):
    """Parameter names that are pointers or arrays (writes through them are
    writes through indirection)."""
    out = set()
    for p in fn.params:
        if p.name and (p.ptr_toks or p.array_runs):
            out.add(p.name)
    return out
