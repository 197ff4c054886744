import random

import pytest
from hypothesis import given, strategies as st

from aweave import ctype
from aweave.errors import TypeSyntaxError

BASES = ["void", "char", "int", "long", "float", "double", "unsigned",
         "unsigned long", "long long", "short", "signed char"]
QUALS = [(), ("const",), ("volatile",), ("const", "volatile")]


def build_text(quals, base, ptr, arrays):
    """Structural rendering, independent of ctype.render."""
    words = list(quals) + [base]
    return " ".join(words) + "*" * ptr + "".join(f"[{e}]" for e in arrays)


types_st = st.builds(
    lambda q, b, p, a: (q, b, p, tuple(a)),
    st.sampled_from(QUALS), st.sampled_from(BASES),
    st.integers(0, 3),
    st.lists(st.sampled_from(["4", "8", "16", "N", ""]), max_size=2))


@given(types_st)
def test_parse_render_round_trip(t):
    quals, base, ptr, arrays = t
    text = build_text(quals, base, ptr, arrays)
    parsed = ctype.parse(text)
    assert parsed.render() == text
    assert ctype.parse(parsed.render()) == parsed


def test_render_canonicalizes_spacing():
    assert ctype.parse("double  *").render() == "double*"
    assert ctype.parse(" unsigned   long ").render() == "unsigned long"
    assert ctype.parse("double * [8]").render() == "double*[8]"


def test_parse_rejects_junk():
    for bad in ("", "   ", "*", "const", "double]", "1nt"):
        with pytest.raises(TypeSyntaxError):
            ctype.parse(bad)


def test_change_base_table_from_type_rules():
    # the two prescribed cases: compound base swap, non-matching untouched
    assert ctype.change_base("double*", "double", "float").render() == "float*"
    assert ctype.change_base("int", "double", "float").render() == "int"
    assert ctype.change_base("double[16]", "double", "float").render() == "float[16]"


def test_change_base_idempotent_and_base_local():
    t = ctype.change_base("double*[4]", "double", "float")
    assert t.render() == "float*[4]"
    assert ctype.change_base(t, "double", "float") == t


def test_change_base_property_sweep_against_structural_oracle():
    # 200 generated types; expectation constructed structurally, never via
    # the code under test
    rng = random.Random(20240817)
    for _ in range(200):
        quals = rng.choice(QUALS)
        base = rng.choice(BASES)
        ptr = rng.randrange(0, 4)
        arrays = tuple(rng.choice(["2", "32", "N"])
                       for _ in range(rng.randrange(0, 3)))
        old = rng.choice([base, "double", "int"])
        new = rng.choice(["float", "double", "unsigned long"])
        if old == new:
            continue
        declared = build_text(quals, base, ptr, arrays)
        expected_base = new if base == old else base
        expected = build_text(quals, expected_base, ptr, arrays)
        got = ctype.change_base(declared, old, new)
        assert got.render() == expected, (declared, old, new)
