"""Offline decision engine over operating points.

Knowledge is a set of knob configurations with measured metric statistics.
Selection filters by prioritized constraints, optimizes a weighted rank,
applies multiplicative feedback scaling to metric means, and relaxes
constraints from the lowest priority upward when nothing is feasible.
"""

import csv
import os
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DuplicatePoint, EmptyKnowledge, SchemaError, UnknownMetric, WeaveError,
)


@dataclass(frozen=True)
class MetricStats:
    mean: float
    min: float
    max: float
    stddev: float

    def validate(self, metric):
        if self.stddev < 0:
            raise SchemaError(f"negative stddev for metric {metric!r}")
        if not (self.min <= self.mean <= self.max):
            raise SchemaError(
                f"metric {metric!r} violates min <= mean <= max "
                f"({self.min}, {self.mean}, {self.max})")


@dataclass(frozen=True)
class OperatingPoint:
    knobs: tuple      # sorted (name, value) pairs
    metrics: tuple    # sorted (name, MetricStats) pairs

    @classmethod
    def make(cls, knobs, metrics):
        return cls(tuple(sorted(knobs.items())),
                   tuple(sorted(metrics.items())))

    def knob(self, name):
        return dict(self.knobs)[name]

    def stats(self, metric):
        try:
            return dict(self.metrics)[metric]
        except KeyError:
            raise UnknownMetric(f"point has no metric {metric!r}")

    def knob_dict(self):
        return dict(self.knobs)

    def sort_key(self):
        return tuple((str(type(v).__name__), v) for _, v in self.knobs)


@dataclass
class KnowledgeBase:
    points: list
    knob_names: list
    metric_names: list


@dataclass(frozen=True)
class Constraint:
    metric: str
    relation: str      # "<=" or ">="
    threshold: float
    priority: int      # 1 is highest

    def satisfied(self, value):
        return value <= self.threshold if self.relation == "<=" \
            else value >= self.threshold

    def violation(self, value):
        if self.satisfied(value):
            return 0.0
        return value - self.threshold if self.relation == "<=" \
            else self.threshold - value


@dataclass
class Problem:
    constraints: list
    rank_direction: str              # "maximize" | "minimize"
    rank_terms: list                 # (metric, weight)

    def __post_init__(self):
        if not self.rank_terms:
            raise WeaveError("a problem needs at least one rank term")
        if self.rank_direction not in ("maximize", "minimize"):
            raise WeaveError(f"bad rank direction {self.rank_direction!r}")
        prios = [c.priority for c in self.constraints]
        if len(set(prios)) != len(prios):
            raise WeaveError("constraint priorities must be unique")


class FeedbackState:
    """Per-metric observation windows and the derived mean scales."""

    def __init__(self, window=16):
        self.window = window
        self.buffers = {}
        self.scales = {}
        self.active_point = None

    def set_active(self, point):
        self.active_point = point

    def observe(self, metric, value):
        if self.active_point is None or metric not in dict(self.active_point.metrics):
            raise UnknownMetric(f"unknown metric {metric!r}")
        buf = self.buffers.setdefault(metric, deque(maxlen=self.window))
        buf.append(value)
        expected = self.active_point.stats(metric).mean
        observed = sum(buf) / len(buf)
        if expected > 0 and observed > 0:
            self.scales[metric] = observed / expected
        else:
            self.scales[metric] = 1.0
        return self.scales[metric]

    def scale(self, metric):
        return self.scales.get(metric, 1.0)


def scaled_mean(point, metric, feedback):
    value = point.stats(metric).mean
    if feedback is not None:
        value *= feedback.scale(metric)
    return value


def rank_value(point, problem, feedback):
    return sum(w * scaled_mean(point, m, feedback)
               for m, w in problem.rank_terms)


def select_best(kb, problem, feedback=None):
    """Best feasible point; drops constraints from the lowest priority up
    when infeasible, and falls back to minimal priority-1 violation."""
    if not kb.points:
        raise EmptyKnowledge("the knowledge base holds no operating points")
    for point in kb.points:
        for c in problem.constraints:
            point.stats(c.metric)
        for m, _ in problem.rank_terms:
            point.stats(m)

    ordered = sorted(problem.constraints, key=lambda c: c.priority)
    active = list(ordered)
    while True:
        feasible = [p for p in kb.points
                    if all(c.satisfied(scaled_mean(p, c.metric, feedback))
                           for c in active)]
        if feasible:
            return _argbest(feasible, problem, feedback)
        if not active:
            break
        if len(active) == 1:
            top = active[0]
            best = sorted(
                kb.points,
                key=lambda p: (top.violation(scaled_mean(p, top.metric, feedback)),
                               _rank_sort_key(p, problem, feedback),
                               p.sort_key()))
            return best[0]
        active.pop()   # drop the lowest-priority constraint
    return _argbest(kb.points, problem, feedback)


def _rank_sort_key(point, problem, feedback):
    r = rank_value(point, problem, feedback)
    return -r if problem.rank_direction == "maximize" else r


def _argbest(points, problem, feedback):
    return sorted(points, key=lambda p: (_rank_sort_key(p, problem, feedback),
                                         p.sort_key()))[0]


# ---------------------------------------------------------------- knowledge

def load_knowledge(path):
    """Load an operating-point CSV.

    Header cells are knob:<name>, metric:<name>:<stat>, <name>:<stat> (the
    explore harness spelling) or a bare knob name. A metric whose cells are
    empty in every row (an unconfigured energy meter) is dropped.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty knowledge file")
    header = [c.strip() for c in rows[0]]
    columns = []
    knob_names = []
    metric_stats = {}
    for cell in header:
        if cell.startswith("knob:"):
            name = cell[5:]
            columns.append(("knob", name, None))
            knob_names.append(name)
            continue
        if cell.startswith("metric:"):
            body = cell[7:]
            if ":" not in body:
                raise SchemaError(f"bad metric column {cell!r}")
            name, stat = body.rsplit(":", 1)
        elif ":" in cell:
            name, stat = cell.rsplit(":", 1)
        else:
            columns.append(("knob", cell, None))
            knob_names.append(cell)
            continue
        if stat not in ("mean", "min", "max", "stddev"):
            raise SchemaError(f"unknown statistic {stat!r} in column {cell!r}")
        columns.append(("metric", name, stat))
        metric_stats.setdefault(name, set()).add(stat)
    for name, stats in metric_stats.items():
        if stats != {"mean", "min", "max", "stddev"}:
            missing = sorted({"mean", "min", "max", "stddev"} - stats)
            raise SchemaError(f"metric {name!r} is missing columns: {missing}")
    if len(set(knob_names)) != len(knob_names):
        raise SchemaError("duplicate knob columns")

    raw_points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not any(c.strip() for c in row):
            continue
        if len(row) != len(columns):
            raise SchemaError(f"{path}:{lineno}: expected {len(columns)} cells")
        knobs = {}
        values = {}
        for (kind, name, stat), cell in zip(columns, row):
            cell = cell.strip()
            if kind == "knob":
                knobs[name] = _knob_value(cell, name, lineno)
            else:
                values.setdefault(name, {})[stat] = cell
        raw_points.append((lineno, knobs, values))

    # drop all-empty metrics (unconfigured meters); partial emptiness is an error
    empties = set()
    for name in metric_stats:
        cells = [v for _, _, values in raw_points
                 for v in values.get(name, {}).values()]
        if cells and all(c == "" for c in cells):
            empties.add(name)
        elif any(c == "" for c in cells):
            raise SchemaError(f"metric {name!r} has empty cells in some rows")

    points = []
    seen = set()
    for lineno, knobs, values in raw_points:
        metrics = {}
        for name, stats in values.items():
            if name in empties:
                continue
            try:
                ms = MetricStats(float(stats["mean"]), float(stats["min"]),
                                 float(stats["max"]), float(stats["stddev"]))
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: non-numeric metric value")
            ms.validate(name)
            metrics[name] = ms
        key = tuple(sorted(knobs.items()))
        if key in seen:
            raise DuplicatePoint(f"{path}:{lineno}: duplicate knob configuration")
        seen.add(key)
        points.append(OperatingPoint.make(knobs, metrics))
    if not points:
        raise SchemaError(f"{path}: no operating points")
    kept_metrics = sorted(set(metric_stats) - empties)
    return KnowledgeBase(points, sorted(set(knob_names)), kept_metrics)


def _knob_value(cell, name, lineno):
    if cell == "":
        raise SchemaError(f"line {lineno}: empty knob {name!r}")
    try:
        return int(cell)
    except ValueError:
        return cell


# ---------------------------------------------------------------- knob file

def write_knob_file(point, path):
    """name=value lines; woven apps read these via aw_knob_read (environment
    variables of the same name take precedence)."""
    knobs = point.knob_dict() if isinstance(point, OperatingPoint) else dict(point)
    text = "".join(f"{name}={value}\n" for name, value in sorted(knobs.items()))
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -------------------------------------------------------- CLI flag grammars

def parse_constraint(spec, priority=None):
    """metric<=value:priority or metric>=value:priority."""
    body = spec
    if ":" in spec:
        body, prio = spec.rsplit(":", 1)
        priority = int(prio)
    elif priority is None:
        raise WeaveError(f"constraint {spec!r} needs a :priority suffix")
    for rel in ("<=", ">="):
        if rel in body:
            metric, value = body.split(rel, 1)
            return Constraint(metric.strip(), rel, float(value), priority)
    raise WeaveError(f"constraint {spec!r} must use <= or >=")


def parse_rank(spec):
    """max:metric[*weight][+metric*weight...] or min:..."""
    if ":" not in spec:
        raise WeaveError(f"rank {spec!r} must look like max:metric")
    direction, body = spec.split(":", 1)
    direction = {"max": "maximize", "min": "minimize"}.get(direction.strip())
    if direction is None:
        raise WeaveError(f"rank direction must be max or min in {spec!r}")
    terms = []
    for part in body.split("+"):
        part = part.strip()
        if "*" in part:
            metric, weight = part.split("*", 1)
            terms.append((metric.strip(), float(weight)))
        else:
            terms.append((part, 1.0))
    return direction, terms
