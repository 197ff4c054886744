import random

import pytest

from aweave import autotuner as at
from aweave.errors import (
    DuplicatePoint, EmptyKnowledge, SchemaError, UnknownMetric,
)


def mkpoint(knobs, **metrics):
    ms = {}
    for name, mean in metrics.items():
        ms[name] = at.MetricStats(mean, mean, mean, 0.0)
    return at.OperatingPoint.make(knobs, ms)


def mkkb(points):
    knob_names = sorted(dict(points[0].knobs))
    metric_names = sorted(dict(points[0].metrics))
    return at.KnowledgeBase(list(points), knob_names, metric_names)


def worked_example_kb():
    return mkkb([
        mkpoint({"k": 1}, throughput=10.0, error=0.05),
        mkpoint({"k": 2}, throughput=8.0, error=0.02),
        mkpoint({"k": 3}, throughput=12.0, error=0.07),
    ])


# ---------------------------------------------------------------- the oracle

def oracle_select(kb, constraints, direction, terms, scales=None):
    """Exhaustive reimplementation: filter, relax lowest priority first,
    fall back to minimal top-priority violation."""
    scales = scales or {}

    def mean(p, m):
        return dict(p.metrics)[m].mean * scales.get(m, 1.0)

    def rank(p):
        v = sum(w * mean(p, m) for m, w in terms)
        return -v if direction == "maximize" else v

    def keyf(p):
        return (rank(p), p.sort_key())

    def ok(p, c):
        v = mean(p, c.metric)
        return v <= c.threshold if c.relation == "<=" else v >= c.threshold

    remaining = sorted(constraints, key=lambda c: c.priority)
    while True:
        feas = [p for p in kb.points if all(ok(p, c) for c in remaining)]
        if feas:
            return min(feas, key=keyf)
        if len(remaining) <= 1:
            break
        remaining = remaining[:-1]
    if not remaining:
        return min(kb.points, key=keyf)
    top = remaining[0]

    def viol(p):
        v = mean(p, top.metric)
        if top.relation == "<=":
            return max(0.0, v - top.threshold)
        return max(0.0, top.threshold - v)

    return min(kb.points, key=lambda p: (viol(p),) + keyf(p))


# ------------------------------------------------------------------- basics

def test_worked_example_selects_k2():
    kb = worked_example_kb()
    problem = at.Problem([at.Constraint("error", "<=", 0.03, 1)],
                         "maximize", [("throughput", 1.0)])
    assert at.select_best(kb, problem).knob_dict() == {"k": 2}


def test_single_point_kb():
    kb = mkkb([mkpoint({"k": 5}, throughput=1.0)])
    problem = at.Problem([], "maximize", [("throughput", 1.0)])
    assert at.select_best(kb, problem).knob_dict() == {"k": 5}


def test_relaxation_drops_lowest_priority_first():
    # all points violate error<=0.001 (priority 1); the throughput>=100
    # constraint (priority 2) is dropped first, then the minimal-error
    # point wins the violation fallback
    kb = worked_example_kb()
    problem = at.Problem(
        [at.Constraint("error", "<=", 0.001, 1),
         at.Constraint("throughput", ">=", 100.0, 2)],
        "maximize", [("throughput", 1.0)])
    chosen = at.select_best(kb, problem)
    assert chosen.knob_dict() == {"k": 2}     # minimal error 0.02
    assert chosen == oracle_select(kb, problem.constraints, "maximize",
                                   [("throughput", 1.0)])


def test_empty_kb_raises():
    kb = at.KnowledgeBase([], ["k"], ["m"])
    with pytest.raises(EmptyKnowledge):
        at.select_best(kb, at.Problem([], "maximize", [("m", 1.0)]))


def test_tie_break_is_lexicographic_on_knobs():
    kb = mkkb([mkpoint({"k": 2}, m=1.0), mkpoint({"k": 1}, m=1.0)])
    problem = at.Problem([], "maximize", [("m", 1.0)])
    assert at.select_best(kb, problem).knob_dict() == {"k": 1}


# ----------------------------------------------------------------- feedback

def test_observe_scales_mean():
    kb = worked_example_kb()
    fb = at.FeedbackState(window=4)
    fb.set_active(kb.points[0])      # throughput expected 10
    assert fb.observe("throughput", 10.0) == pytest.approx(1.0)
    fb2 = at.FeedbackState(window=4)
    fb2.set_active(kb.points[0])
    fb2.observe("throughput", 20.0)
    assert fb2.observe("throughput", 20.0) == pytest.approx(2.0)


def test_observe_changes_selection_like_oracle():
    # scaling error by 2 pushes k=2 (0.02 -> 0.04) out of the error<=0.03
    # budget; selection must then match the oracle under the same scales
    kb = worked_example_kb()
    fb = at.FeedbackState(window=4)
    err_point = mkpoint({"k": 2}, throughput=8.0, error=0.02)
    fb.set_active(err_point)
    fb.observe("error", 0.04)
    fb.observe("error", 0.04)
    problem = at.Problem([at.Constraint("error", "<=", 0.03, 1)],
                         "maximize", [("throughput", 1.0)])
    got = at.select_best(kb, problem, fb)
    want = oracle_select(kb, problem.constraints, "maximize",
                         [("throughput", 1.0)], scales={"error": 2.0})
    assert got == want


def test_window_evicts_oldest():
    kb = worked_example_kb()
    fb = at.FeedbackState(window=3)
    fb.set_active(kb.points[0])
    for v in (10.0, 10.0, 10.0, 40.0):
        fb.observe("throughput", v)
    assert list(fb.buffers["throughput"]) == [10.0, 10.0, 40.0]
    assert fb.scale("throughput") == pytest.approx(2.0)


def test_observe_unknown_metric():
    kb = worked_example_kb()
    fb = at.FeedbackState()
    fb.set_active(kb.points[0])
    with pytest.raises(UnknownMetric):
        fb.observe("power", 1.0)


# ---------------------------------------------------------- oracle equivalence

def random_instance(rng):
    n_knobs = rng.randint(1, 2)
    knob_names = [f"K{i}" for i in range(n_knobs)]
    metric_names = ["time", "error", "mem"][:rng.randint(1, 3)]
    points = []
    seen = set()
    for _ in range(rng.randint(1, 12)):
        knobs = {k: rng.randint(0, 4) for k in knob_names}
        key = tuple(sorted(knobs.items()))
        if key in seen:
            continue
        seen.add(key)
        metrics = {m: round(rng.uniform(0.0, 10.0), 3) for m in metric_names}
        points.append(mkpoint(knobs, **metrics))
    constraints = []
    for prio in range(1, rng.randint(1, 4)):
        constraints.append(at.Constraint(
            rng.choice(metric_names), rng.choice(["<=", ">="]),
            round(rng.uniform(-1.0, 11.0), 3), prio))
    direction = rng.choice(["maximize", "minimize"])
    terms = [(m, round(rng.uniform(0.1, 2.0), 2))
             for m in rng.sample(metric_names, rng.randint(1, len(metric_names)))]
    kb = at.KnowledgeBase(points, knob_names, metric_names)
    return kb, constraints, direction, terms


def test_oracle_equivalence_1000_instances():
    rng = random.Random(987123)
    for trial in range(1000):
        kb, constraints, direction, terms = random_instance(rng)
        problem = at.Problem(list(constraints), direction, list(terms))
        got = at.select_best(kb, problem)
        want = oracle_select(kb, constraints, direction, terms)
        assert got == want, (trial, got, want)


def test_argmax_scale_invariance_100_instances():
    rng = random.Random(555)
    for trial in range(100):
        kb, constraints, direction, terms = random_instance(rng)
        problem = at.Problem(list(constraints), direction, list(terms))
        base = at.select_best(kb, problem).knob_dict()
        factor = rng.choice([0.5, 2.0, 7.25, 100.0])
        scaled_points = []
        rank_metrics = {m for m, _ in terms}
        constrained = {c.metric for c in constraints}
        if rank_metrics & constrained:
            continue    # scaling a constrained metric changes feasibility
        for p in kb.points:
            ms = {}
            for name, stats in p.metrics:
                if name in rank_metrics:
                    ms[name] = at.MetricStats(stats.mean * factor,
                                              stats.min * factor,
                                              stats.max * factor,
                                              stats.stddev)
                else:
                    ms[name] = stats
            scaled_points.append(at.OperatingPoint(p.knobs, tuple(sorted(ms.items()))))
        kb2 = at.KnowledgeBase(scaled_points, kb.knob_names, kb.metric_names)
        assert at.select_best(kb2, problem).knob_dict() == base, trial


def test_monotonicity_tightening_never_improves_rank():
    rng = random.Random(31337)
    for _ in range(200):
        kb, _, _, _ = random_instance(rng)
        problem_loose = at.Problem([at.Constraint("time", "<=", 8.0, 1)],
                                   "maximize", [("time", 1.0)])
        loose = at.select_best(kb, problem_loose)
        if not (dict(loose.metrics)["time"].mean <= 8.0):
            continue    # infeasible already; monotonicity claim is void
        problem_tight = at.Problem([at.Constraint("time", "<=", 6.0, 1)],
                                   "maximize", [("time", 1.0)])
        tight = at.select_best(kb, problem_tight)
        if dict(tight.metrics)["time"].mean <= 6.0:
            assert dict(tight.metrics)["time"].mean \
                <= dict(loose.metrics)["time"].mean + 1e-12


def test_uc2_pattern_quality_versus_rate():
    # synthetic navigation-style knowledge: request rate buys quality with
    # saturation; constraining quality >= q and minimizing rate must pick
    # the lowest rate meeting q, non-increasing as q relaxes
    rates = [10, 20, 40, 80, 160, 320]
    quality = {10: 5.8, 20: 6.3, 40: 6.8, 80: 7.3, 160: 7.7, 320: 7.9}
    kb = mkkb([mkpoint({"rate": r}, rate=float(r), quality=quality[r])
               for r in rates])
    chosen_rates = []
    for q in (7.8, 7.5, 7.0, 6.5, 6.0):
        problem = at.Problem([at.Constraint("quality", ">=", q, 1)],
                             "minimize", [("rate", 1.0)])
        point = at.select_best(kb, problem)
        assert dict(point.metrics)["quality"].mean >= q
        chosen_rates.append(point.knob_dict()["rate"])
    assert chosen_rates == sorted(chosen_rates, reverse=True)
    assert chosen_rates[-1] < chosen_rates[0]


# ----------------------------------------------------------------- knowledge

def test_load_three_row_csv(tmp_path):
    p = tmp_path / "kb.csv"
    p.write_text(
        "knob:k,metric:throughput:mean,metric:throughput:min,"
        "metric:throughput:max,metric:throughput:stddev,"
        "metric:error:mean,metric:error:min,metric:error:max,"
        "metric:error:stddev\n"
        "1,10,10,10,0,0.05,0.05,0.05,0\n"
        "2,8,8,8,0,0.02,0.02,0.02,0\n"
        "3,12,12,12,0,0.07,0.07,0.07,0\n")
    kb = at.load_knowledge(str(p))
    assert len(kb.points) == 3
    assert kb.knob_names == ["k"]
    assert sorted(kb.metric_names) == ["error", "throughput"]


def test_load_rejects_missing_stat_column(tmp_path):
    p = tmp_path / "kb.csv"
    p.write_text("knob:k,metric:err:mean,metric:err:min,metric:err:max\n"
                 "1,0.1,0.1,0.1\n")
    with pytest.raises(SchemaError):
        at.load_knowledge(str(p))


def test_load_rejects_duplicate_points(tmp_path):
    p = tmp_path / "kb.csv"
    p.write_text("knob:k,metric:m:mean,metric:m:min,metric:m:max,metric:m:stddev\n"
                 "1,1,1,1,0\n"
                 "1,2,2,2,0\n")
    with pytest.raises(DuplicatePoint):
        at.load_knowledge(str(p))


def test_load_rejects_bad_stats(tmp_path):
    p = tmp_path / "kb.csv"
    p.write_text("knob:k,metric:m:mean,metric:m:min,metric:m:max,metric:m:stddev\n"
                 "1,5,6,7,0\n")     # mean below min
    with pytest.raises(SchemaError):
        at.load_knowledge(str(p))


def test_knob_file_format(tmp_path):
    path = tmp_path / "knobs.txt"
    at.write_knob_file({"Knob1": 1}, str(path))
    assert path.read_text() == "Knob1=1\n"
    at.write_knob_file(mkpoint({"b": 2, "a": 1}, m=0.0), str(path))
    assert path.read_text() == "a=1\nb=2\n"


def test_constraint_and_rank_grammar():
    c = at.parse_constraint("err<=0.03:1")
    assert (c.metric, c.relation, c.threshold, c.priority) == ("err", "<=", 0.03, 1)
    c2 = at.parse_constraint("throughput>=5:2")
    assert c2.relation == ">="
    direction, terms = at.parse_rank("max:throughput")
    assert direction == "maximize" and terms == [("throughput", 1.0)]
    direction, terms = at.parse_rank("min:time*2+mem*0.5")
    assert direction == "minimize"
    assert terms == [("time", 2.0), ("mem", 0.5)]
