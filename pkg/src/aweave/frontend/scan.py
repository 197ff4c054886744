"""Token-run scanning: calls, variable references, balanced splitting.

These work on significant-token lists. Calls and varrefs are attributed to
the node whose own tokens contain them, so a call belongs to its innermost
statement (or to a loop/if header).
"""

from dataclasses import dataclass

from .lexer import Token, is_trivia
from .nodes import Node

_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {")", "]", "}"}


def significant(tokens):
    return [t for t in tokens if not is_trivia(t) and t.text != ""]


def own_significant(node):
    return significant(node.own_tokens())


@dataclass
class CallSite:
    name_tok: Token
    stmt: Node          # node whose own tokens contain the call
    arg_count: int

    @property
    def name(self):
        return self.name_tok.text


def calls_in_tokens(sig, stmt):
    """Call sites in a significant-token run: identifier directly before '('."""
    out = []
    for i, tok in enumerate(sig):
        if tok.kind != "identifier":
            continue
        if i + 1 >= len(sig) or sig[i + 1].text != "(":
            continue
        out.append(CallSite(tok, stmt, _count_args(sig, i + 1)))
    return out


def _count_args(sig, open_idx):
    depth = 0
    commas = 0
    any_tokens = False
    for j in range(open_idx, len(sig)):
        t = sig[j].text
        if t in _OPEN:
            depth += 1
        elif t in _CLOSE:
            depth -= 1
            if depth == 0:
                break
        elif depth == 1:
            any_tokens = True
            if t == ",":
                commas += 1
    if not any_tokens:
        return 0
    return commas + 1


def calls_in_stmt(node):
    return calls_in_tokens(own_significant(node), node)


def calls_under(node):
    """All call sites in a subtree, in source order."""
    out = []
    for n in node.walk():
        out.extend(calls_in_stmt(n))
    out.sort(key=lambda c: (c.name_tok.line, c.name_tok.col))
    return out


def varrefs_in_stmt(node):
    """Name-based variable references in a statement's own tokens."""
    sig = own_significant(node)
    out = []
    for i, tok in enumerate(sig):
        if tok.kind != "identifier":
            continue
        if i + 1 < len(sig) and sig[i + 1].text == "(":
            continue    # a call, not a varref
        if i > 0 and sig[i - 1].text in (".", "->"):
            continue    # member access
        out.append(tok)
    return out


def split_top(sig, sep):
    """Split a significant-token run on a separator at bracket depth 0."""
    groups = [[]]
    depth = 0
    for t in sig:
        if t.text in _OPEN:
            depth += 1
        elif t.text in _CLOSE:
            depth -= 1
        if depth == 0 and t.text == sep:
            groups.append([])
        else:
            groups[-1].append(t)
    return groups


def balanced_run(sig, open_idx):
    """Indices [open_idx, close_idx] of a balanced bracket run."""
    depth = 0
    for j in range(open_idx, len(sig)):
        t = sig[j].text
        if t in _OPEN:
            depth += 1
        elif t in _CLOSE:
            depth -= 1
            if depth == 0:
                return j
    return len(sig) - 1


def texts(sig):
    return [t.text for t in sig]
