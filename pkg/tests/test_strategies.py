import re

import pytest

from aweave.errors import (
    DuplicateName, FunctionNotFound, NotAStatementCall, SignatureMismatch,
)
from aweave.frontend import emit, parse
from aweave.strategies import (
    change_precision, clone_call_tree, create_mixed_versions,
    create_typed_version, default_precision_map, enumerate_precision_mixes,
    multiversion,
)
from aweave.strategies.multiversion import find_call_statement
from aweave.weave import WeaveSession

CHAIN = """#include <math.h>

double leaf(double v) {
    return sqrt(v);
}

double mid(double a) {
    return leaf(a) + fabs(a);
}

double top(double a, double b) {
    double t = mid(a);
    return t + leaf(b);
}

long fact(long n) {
    if (n <= 1) {
        return 1;
    }
    return n * fact(n - 1);
}

int main(void) {
    double r;
    r = top(1.0, 2.0);
    return (int)(r + fact(3));
}
"""


_C_KEYWORDS = {"if", "for", "while", "switch", "return", "sizeof", "do"}


def call_names_oracle(c_text, fn_name):
    """Regex call-graph oracle, independent of the weaver's token scanner."""
    body = _body_oracle(c_text, fn_name)
    return [n for n in re.findall(r"\b([A-Za-z_]\w*)\s*\(", body)
            if n not in _C_KEYWORDS]


def _body_oracle(c_text, fn_name):
    m = re.search(r"^[a-z][\w ]*\b" + re.escape(fn_name) + r"\s*\([^)]*\)\s*\{",
                  c_text, re.M)
    assert m, fn_name
    depth = 0
    for i in range(m.end() - 1, len(c_text)):
        if c_text[i] == "{":
            depth += 1
        elif c_text[i] == "}":
            depth -= 1
            if depth == 0:
                return c_text[m.end():i]
    raise AssertionError("unbalanced body")


def defined_functions_oracle(c_text):
    return re.findall(r"^[a-z][\w ]*?\b([A-Za-z_]\w*)\s*\([^;)]*\)\s*\{",
                      c_text, re.M)


def test_clone_call_tree_redirects_chain():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    names = clone_call_tree(s, "top", "_f")
    assert names == ["top_f", "mid_f", "leaf_f"]
    out = emit(ast)
    assert sorted(call_names_oracle(out, "top_f")) == ["leaf_f", "mid_f"]
    assert call_names_oracle(out, "mid_f") == ["leaf_f", "fabs"]
    assert call_names_oracle(out, "leaf_f") == ["sqrt"]
    # originals keep calling originals
    assert sorted(call_names_oracle(out, "top")) == ["leaf", "mid"]


def test_clone_call_tree_self_recursion_terminates():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    names = clone_call_tree(s, "fact", "_f")
    assert names == ["fact_f"]
    out = emit(ast)
    assert call_names_oracle(out, "fact_f") == ["fact_f"]
    assert call_names_oracle(out, "fact") == ["fact"]


def test_clone_call_tree_libm_only_root():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    assert clone_call_tree(s, "leaf", "_v") == ["leaf_v"]
    assert call_names_oracle(emit(ast), "leaf_v") == ["sqrt"]


def test_clone_call_tree_duplicate_target():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    with pytest.raises(DuplicateName):
        clone_call_tree(s, "top", "")     # top+""==top already defined


def test_create_typed_version_keeps_original_bytes():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    names = create_typed_version(s, "top", "_f", default_precision_map())
    out = emit(ast)
    # region diff: dropping every appended clone restores the input
    stripped = out
    for name in names:
        m = re.search(r"\n\n[a-z][\w ]*\b" + name + r"\s*\(", stripped)
        assert m, name
        start = m.start()
        depth = 0
        for i in range(stripped.index("{", start), len(stripped)):
            if stripped[i] == "{":
                depth += 1
            elif stripped[i] == "}":
                depth -= 1
                if depth == 0:
                    end = i + 1
                    break
        stripped = stripped[:start] + stripped[end:]
    assert stripped == CHAIN
    # clone count equals the reachable-subgraph size (reachability oracle)
    reach = {"top", "mid", "leaf"}
    assert len(names) == len(reach)
    # precision rewrites landed in the clones
    assert "sqrtf" in _body_oracle(out, "leaf_f")
    assert "fabsf" in _body_oracle(out, "mid_f")
    assert "sqrtf" not in _body_oracle(out, "leaf")


def test_change_precision_fixpoint_on_all_float():
    src = """float f(float x) {
    return x * 2.0f;
}
"""
    ast = parse(src, "f.c")
    s = WeaveSession(ast)
    change_precision(s, "f", default_precision_map())
    assert emit(ast) == src


def test_change_precision_unknown_function():
    ast = parse(CHAIN, "c.c")
    with pytest.raises(FunctionNotFound):
        change_precision(WeaveSession(ast), "nope", default_precision_map())


def test_multiversion_requires_statement_call():
    src = """double f(double x) { return x; }
double g(double x) { return x; }
int main(void) {
    double r = f(1.0);
    if (f(2.0) > 1.0) {
        return 1;
    }
    return (int)r;
}
"""
    ast = parse(src, "m.c")
    s = WeaveSession(ast)
    with pytest.raises(NotAStatementCall):
        find_call_statement(s, "f")     # decl init and if-header, no stmt call


def test_multiversion_signature_mismatch():
    src = """double f(double x) { return x; }
double g(double x, double y) { return x + y; }
int main(void) {
    double r;
    r = f(1.0);
    return (int)r;
}
"""
    ast = parse(src, "m.c")
    s = WeaveSession(ast)
    jp = find_call_statement(s, "f")
    with pytest.raises(SignatureMismatch):
        multiversion(s, jp, ["f", "g"], "K")


def test_multiversion_float_return_is_compatible():
    src = """double f(double x) { return x; }
float f_f(float x) { return x; }
int main(void) {
    double r;
    r = f(1.0);
    return (int)r;
}
"""
    ast = parse(src, "m.c")
    s = WeaveSession(ast)
    jp = find_call_statement(s, "f")
    support = multiversion(s, jp, ["f", "f_f"], "K")
    out = emit(ast)
    assert 'aw_knob_read("K", 0)' in out
    assert "case 1:" in out and "f_f" in out
    assert "default:" in out and "aw_feed_oob" in out
    assert set(support) == {"aw_runtime.c", "aw_runtime.h"}


def test_precision_mixes_deterministic_rule_filtered_capped():
    # hand enumeration over {double,float}^3 in lexicographic order with the
    # rule "no double caller of a float callee" and all-double skipped
    order = ["top", "mid", "leaf"]
    chain_edges = [("top", "mid"), ("mid", "leaf")]
    mixes = enumerate_precision_mixes(order, chain_edges, 10)
    assert mixes == [
        {"top": "float", "mid": "double", "leaf": "double"},
        {"top": "float", "mid": "float", "leaf": "double"},
        {"top": "float", "mid": "float", "leaf": "float"},
    ]
    # dropping the mid->leaf edge admits (d,d,f) and the f,d,* mixes
    one_edge = enumerate_precision_mixes(order, [("top", "mid")], 10)
    assert one_edge == [
        {"top": "double", "mid": "double", "leaf": "float"},
        {"top": "float", "mid": "double", "leaf": "double"},
        {"top": "float", "mid": "double", "leaf": "float"},
        {"top": "float", "mid": "float", "leaf": "double"},
        {"top": "float", "mid": "float", "leaf": "float"},
    ]
    assert enumerate_precision_mixes(order, [("top", "mid")], 2) == one_edge[:2]


def test_create_mixed_versions_weaves_each_mix():
    ast = parse(CHAIN, "c.c")
    s = WeaveSession(ast)
    out_mixes = create_mixed_versions(s, "mid", count=3)
    out = emit(ast)
    names = defined_functions_oracle(out)
    for i, (suffix, assignment) in enumerate(out_mixes):
        assert f"mid{suffix}" in names
        assert f"leaf{suffix}" in names
    # the capped enumeration respects the no-double-calls-float rule
    for _, assignment in out_mixes:
        assert not (assignment["mid"] == "double" and assignment["leaf"] == "float")
