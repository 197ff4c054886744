import re

from aweave.frontend import emit, parse
from aweave.strategies import auto_parallelize, disable_nested_parallel_pragmas
from aweave.weave import WeaveSession


def analyze(src):
    ast = parse(src, "p.c")
    s = WeaveSession(ast)
    verdicts = auto_parallelize(s)
    return ast, s, verdicts


def wrap(body):
    return ("double pure1(double v) { return v * 2.0; }\n"
            "int main(void) {\n"
            "    double s = 0.0;\n"
            "    double a[64];\n"
            "    double b[64];\n"
            "    int n = 64;\n"
            f"{body}"
            "    return (int)(s + a[0] + b[0] + n);\n"
            "}\n")


def test_canonical_trio():
    ast, _, verdicts = analyze(wrap(
        "    for (int i = 0; i < n; i++) { a[i] = b[i] + 1.0; }\n"
        "    for (int i = 1; i < n; i++) { a[i] = a[i - 1] + 1.0; }\n"
        "    for (int i = 0; i < n; i++) { s += a[i]; }\n"))
    flags = [(v.parallelizable, v.reduction_vars) for v in verdicts]
    assert flags[0] == (True, [])
    assert flags[1][0] is False
    assert "depend" in verdicts[1].reason
    assert flags[2] == (True, [("+", "s")])
    out = emit(ast)
    assert out.count("#pragma omp parallel for") == 2
    assert "#pragma omp parallel for reduction(+:s)" in out


def test_reduction_forms():
    _, _, verdicts = analyze(wrap(
        "    double p = 1.0;\n"
        "    double lo = 1e9;\n"
        "    double hi = -1e9;\n"
        "    for (int i = 0; i < n; i++) { p *= b[i]; }\n"
        "    for (int i = 0; i < n; i++) { p = p * b[i]; }\n"
        "    for (int i = 0; i < n; i++) { lo = fmin(lo, b[i]); }\n"
        "    for (int i = 0; i < n; i++) { hi = fmax(hi, b[i]); }\n"
        "    s += p + lo + hi;\n"))
    assert [v.reduction_vars for v in verdicts] == [
        [("*", "p")], [("*", "p")], [("min", "lo")], [("max", "hi")]]


def test_unsafe_reasons():
    cases = {
        "    for (int i = 0; i < n; i++) { if (a[i] > 1.0) break; }\n":
            "control flow",
        "    double *q = a;\n    for (int i = 0; i < n; i++) { *q = 1.0; }\n":
            "indirection",
        "    for (int i = 0; i < n; i++) { s = s - a[i]; }\n":
            "not a recognized reduction",
        "    for (int i = 0; i < n; i++) { n += 1; a[i] = 1.0; }\n":
            "modified in the body",
        "    for (int i = 0; i < n; i += 2) { a[i] = a[i + 1]; }\n":
            "another index",
        "    for (int i = 0; i < n; i++) { i += 1; }\n":
            "induction variable",
    }
    for body, why in cases.items():
        _, _, verdicts = analyze(wrap(body))
        bad = [v for v in verdicts if not v.parallelizable]
        assert bad, body
        assert why in bad[0].reason, (body, bad[0].reason)


def test_impure_call_blocks_loop():
    src = ("#include <stdio.h>\n"
           "int main(void) {\n"
           "    for (int i = 0; i < 8; i++) { printf(\"%d\\n\", i); }\n"
           "    return 0;\n"
           "}\n")
    _, _, verdicts = analyze(src)
    assert not verdicts[0].parallelizable
    assert "impure" in verdicts[0].reason


def test_pure_and_libm_calls_allowed():
    _, _, verdicts = analyze(wrap(
        "    for (int i = 0; i < n; i++) { a[i] = pure1(b[i]); }\n"))
    assert verdicts[0].parallelizable


def test_while_loops_not_analyzed():
    _, _, verdicts = analyze(wrap(
        "    while (n > 0) { n--; }\n"))
    assert verdicts == []


def test_every_for_loop_reported_once():
    ast, _, verdicts = analyze(wrap(
        "    for (int i = 0; i < n; i++) {\n"
        "        for (int j = 0; j < n; j++) { s += b[j]; }\n"
        "    }\n"))
    ids = [v.loop_id for v in verdicts]
    assert len(ids) == len(set(ids)) == 2


def test_nested_disable_double_and_triple():
    src = wrap(
        "    for (int i = 0; i < n; i++) {\n"
        "        for (int j = 0; j < n; j++) {\n"
        "            for (int k = 0; k < n; k++) { s += b[k]; }\n"
        "        }\n"
        "    }\n")
    ast, s, verdicts = analyze(src)
    assert all(v.parallelizable for v in verdicts)
    disabled = disable_nested_parallel_pragmas(s)
    out = emit(ast)
    active = re.findall(r"^\s*#pragma omp parallel for", out, re.M)
    commented = re.findall(r"^\s*// #pragma omp parallel for", out, re.M)
    assert disabled == 2
    assert len(active) == 1        # only the outermost survives
    assert len(commented) == 2


def test_nested_disable_no_nesting_is_identity():
    src = wrap("    for (int i = 0; i < n; i++) { a[i] = b[i]; }\n")
    ast, s, _ = analyze(src)
    before = emit(ast)
    assert disable_nested_parallel_pragmas(s) == 0
    assert emit(ast) == before


def test_reparallelize_is_idempotent():
    src = wrap("    for (int i = 0; i < n; i++) { a[i] = b[i]; }\n")
    ast, s, _ = analyze(src)
    woven_once = emit(ast)
    ast2 = parse(woven_once, "q.c")
    s2 = WeaveSession(ast2)
    verdicts = auto_parallelize(s2)
    assert [v.reason for v in verdicts if v.parallelizable] == ["already parallelized"]
    assert emit(ast2) == woven_once
