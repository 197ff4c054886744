"""Canonical textual C types: base word + declarator suffixes.

A CType decomposes a type like ``const unsigned long*[8]`` into qualifiers,
base words, indirection levels and array extents. render() produces the one
canonical spelling (single spaces between words, ``*`` glued to the left),
so parse(render(t)) == t and render(parse(s)) is a fixpoint.
"""

from dataclasses import dataclass, field

from .errors import TypeSyntaxError

QUALIFIERS = ("const", "volatile")

# Multi-word bases are built from these; a lone qualifier implies int.
BASE_WORDS = {
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "_Bool",
}

TAG_WORDS = {"struct", "union", "enum"}


@dataclass(frozen=True)
class CType:
    base: str                      # canonical base, e.g. "unsigned long" or "struct point"
    quals: tuple = ()              # leading qualifiers, source order deduplicated
    ptr: int = 0                   # indirection levels
    arrays: tuple = ()             # array extents as raw text, "" for []

    def render(self):
        words = list(self.quals) + [self.base]
        out = " ".join(words) + "*" * self.ptr
        for extent in self.arrays:
            out += f"[{extent}]"
        return out

    def with_base(self, base):
        return CType(base=base, quals=self.quals, ptr=self.ptr, arrays=self.arrays)

    def __str__(self):
        return self.render()


def parse(text):
    """Parse a textual C type into a CType. Raises TypeSyntaxError."""
    s = text.strip()
    if not s:
        raise TypeSyntaxError("empty type")
    # split off array extents from the right
    arrays = []
    while s.endswith("]"):
        open_idx = s.rfind("[")
        if open_idx < 0:
            raise TypeSyntaxError(f"unbalanced ] in {text!r}")
        arrays.insert(0, s[open_idx + 1:-1].strip())
        s = s[:open_idx].rstrip()
    ptr = 0
    while s.endswith("*"):
        ptr += 1
        s = s[:-1].rstrip()
    words = s.split()
    if not words:
        raise TypeSyntaxError(f"no base type in {text!r}")
    quals = []
    while words and words[0] in QUALIFIERS:
        if words[0] not in quals:
            quals.append(words[0])
        words = words[1:]
    if not words:
        raise TypeSyntaxError(f"qualifiers without a base in {text!r}")
    if words[0] in TAG_WORDS:
        if len(words) != 2:
            raise TypeSyntaxError(f"expected tag name in {text!r}")
        base = " ".join(words)
    else:
        for w in words:
            if w not in BASE_WORDS and not _is_identifier(w):
                raise TypeSyntaxError(f"bad base word {w!r} in {text!r}")
        base = " ".join(words)
    return CType(base=base, quals=tuple(quals), ptr=ptr, arrays=tuple(arrays))


def _is_identifier(w):
    return (w[0].isalpha() or w[0] == "_") and all(c.isalnum() or c == "_" for c in w)


def change_base(declared, old_base, new_base):
    """Swap the base of a declared type when it matches old_base.

    Declarator suffixes (pointers, arrays, qualifiers) are preserved; a
    non-matching base comes back unchanged, so (int, double, float) -> int
    while (double*, double, float) -> float*.
    """
    t = declared if isinstance(declared, CType) else parse(declared)
    old = old_base.strip()
    if t.base != old:
        return t
    return t.with_base(new_base.strip())
