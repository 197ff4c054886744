"""Design-space exploration: expand knob ranges, compile and measure each
configuration, aggregate statistics into a CSV the autotuner loads directly.
Also the per-function version compiler with its on-disk artifact cache."""

import hashlib
import itertools
import json
import math
import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .errors import (
    ClosureExtractionFailed, CompileFailed, CompilerNotFound, ConfigError,
    NonzeroExit, RunTimeout,
)
from .frontend.nodes import (
    DirectiveNode, FunctionNode, GlobalDeclNode, TypedefNode,
)
from .frontend.parser import parse

DEFAULT_COMPILER = "cc {flags} {defines} -o {out} {src}"
SHARED_COMPILER = "cc -shared -fPIC {flags} {defines} -o {out} {src}"


@dataclass(frozen=True)
class Geometric:
    start: int
    factor: int
    count: int

    def expand(self):
        return [self.start * self.factor ** i for i in range(self.count)]


@dataclass
class ExploreConfig:
    sources: list
    knobs: dict                      # name -> list[int] | Geometric
    compiler: str = DEFAULT_COMPILER
    flags: str = ""
    repetitions: int = 3
    timeout: float = 60.0
    output: str = "explore.csv"
    energy_meter: str = None         # command template with {cmd}
    run_args: list = field(default_factory=list)
    fake_runner: bool = False
    workdir: str = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        names = list(self.knobs)
        if len(set(names)) != len(names):
            raise ConfigError("knob names must be unique")
        for name, r in self.knobs.items():
            if not expand_range(r):
                raise ConfigError(f"knob {name!r} has an empty range")


def expand_range(r):
    if isinstance(r, Geometric):
        return r.expand()
    return list(r)


def expand_ranges(knobs):
    """Cartesian product of all knob ranges, knobs in lexicographic name
    order, the last knob varying fastest."""
    names = sorted(knobs)
    if not names:
        return [{}]
    value_lists = [expand_range(knobs[n]) for n in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*value_lists)]


def aggregate(values):
    """mean/min/max/population-stddev with the documented plain formulas."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return {"mean": mean, "min": min(values), "max": max(values),
            "stddev": math.sqrt(var)}


def fake_time(knob_values, rep):
    """Deterministic synthetic cost: decreasing in the knob total, with a
    fixed spread across repetitions."""
    total = sum(v for v in knob_values.values() if isinstance(v, (int, float)))
    return 100.0 / (1.0 + total) * (1.0 + 0.25 * rep)


def load_config(path):
    """key = value file; knob.<NAME> lines declare ranges, either an integer
    list '1,2,4' or 'geom:start:factor:count'."""
    values = {}
    knobs = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key.startswith("knob."):
                knobs[key[5:]] = _parse_range(val, path, lineno)
            else:
                values[key] = val
    try:
        sources = shlex.split(values.get("source", ""))
        cfg = ExploreConfig(
            sources=sources,
            knobs=knobs,
            compiler=values.get("compiler", DEFAULT_COMPILER),
            flags=values.get("flags", ""),
            repetitions=int(values.get("repetitions", 3)),
            timeout=float(values.get("timeout", 60)),
            output=values.get("output", "explore.csv"),
            energy_meter=values.get("energy_meter") or None,
            run_args=shlex.split(values.get("run_args", "")),
            fake_runner=values.get("fake_runner", "").lower() in ("1", "true", "yes"),
            workdir=values.get("workdir") or None,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}")
    if not cfg.fake_runner and not cfg.sources:
        raise ConfigError(f"{path}: no source files configured")
    return cfg


def _parse_range(val, path, lineno):
    if val.startswith("geom:"):
        try:
            start, factor, count = (int(x) for x in val[5:].split(":"))
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: geom needs start:factor:count")
        return Geometric(start, factor, count)
    try:
        return [int(x) for x in val.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: expected integers or geom:...")


def run_exploration(cfg, log=None):
    """Compile and measure every configuration; one CSV row per configuration
    in expandRanges order. Returns the rows as dictionaries."""
    say = log or (lambda msg: None)
    configs = expand_ranges(cfg.knobs)
    names = sorted(cfg.knobs)
    if not cfg.fake_runner:
        argv0 = shlex.split(cfg.compiler.split("{")[0])[0]
        if shutil.which(argv0) is None:
            raise CompilerNotFound(f"compiler {argv0!r} not found on PATH")
    rows = []
    workdir = cfg.workdir or tempfile.mkdtemp(prefix="aw_explore_")
    os.makedirs(workdir, exist_ok=True)
    for idx, knob_values in enumerate(configs):
        say(f"[{idx + 1}/{len(configs)}] " +
            " ".join(f"{n}={knob_values[n]}" for n in names))
        if cfg.fake_runner:
            times = [fake_time(knob_values, r) for r in range(cfg.repetitions)]
            energies = []
        else:
            times, energies = _measure(cfg, knob_values, workdir, idx)
        row = {f"knob:{n}": knob_values[n] for n in names}
        for stat, v in aggregate(times).items():
            row[f"time:{stat}"] = repr(v)
        if energies:
            for stat, v in aggregate(energies).items():
                row[f"energy:{stat}"] = repr(v)
        else:
            for stat in ("mean", "min", "max", "stddev"):
                row[f"energy:{stat}"] = ""
        rows.append(row)
    _write_csv(cfg.output, names, rows)
    return rows


def _measure(cfg, knob_values, workdir, idx):
    defines = " ".join(f"-DAW_{n.upper()}={v}" for n, v in sorted(knob_values.items()))
    out = os.path.join(workdir, f"aw_bin_{idx}")
    cmd = cfg.compiler.format(src=" ".join(cfg.sources), out=out,
                              flags=cfg.flags, defines=defines)
    proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True)
    if proc.returncode != 0:
        raise CompileFailed(proc.stdout + proc.stderr)
    env = dict(os.environ)
    for n, v in knob_values.items():
        env[f"AW_{n.upper()}"] = str(v)
    times = []
    energies = []
    run_cmd = [out] + list(cfg.run_args)
    for _ in range(cfg.repetitions):
        t0 = time.perf_counter()
        try:
            run = subprocess.run(run_cmd, env=env, capture_output=True,
                                 text=True, timeout=cfg.timeout)
        except subprocess.TimeoutExpired:
            raise RunTimeout(f"{run_cmd[0]} exceeded {cfg.timeout}s")
        elapsed = time.perf_counter() - t0
        if run.returncode != 0:
            raise NonzeroExit(run.returncode, run.stderr)
        times.append(elapsed)
        if cfg.energy_meter:
            energies.append(_read_meter(cfg.energy_meter, run_cmd, env))
    return times, energies


def _read_meter(meter, run_cmd, env):
    cmd = meter.format(cmd=" ".join(shlex.quote(c) for c in run_cmd))
    proc = subprocess.run(cmd, shell=True, env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        raise NonzeroExit(proc.returncode, proc.stderr)
    try:
        return float(proc.stdout.strip().split()[-1])
    except (ValueError, IndexError):
        raise NonzeroExit(1, f"energy meter produced no number: {proc.stdout!r}")


def _write_csv(path, knob_names, rows):
    header = [f"knob:{n}" for n in knob_names]
    header += [f"time:{s}" for s in ("mean", "min", "max", "stddev")]
    header += [f"energy:{s}" for s in ("mean", "min", "max", "stddev")]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(row.get(col, "")) for col in header))
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


# ------------------------------------------------------------ version cache

def extract_closure(ast, function_name):
    """A standalone translation unit for one function: preprocessor lines,
    typedefs, globals, prototypes and the reachable function definitions."""
    from .strategies.clone import reachable_functions
    if ast.function(function_name) is None:
        raise ClosureExtractionFailed(f"no function {function_name!r}")
    order = reachable_functions(ast, function_name)
    keep = set(order)
    head = []
    defs = []
    for node in ast.children():
        if isinstance(node, (DirectiveNode, TypedefNode, GlobalDeclNode)):
            head.append(node.text().strip())
        elif isinstance(node, FunctionNode) and node.name in keep:
            defs.append(node.text().strip())
    protos = [_prototype(ast.function(name)) for name in order]
    return "\n".join(head + protos + defs) + "\n"


def _prototype(fn):
    toks = []
    for part in fn.parts:
        if part is fn.body:
            break
        if hasattr(part, "all_tokens"):
            toks.extend(t.text for t in part.all_tokens())
        else:
            toks.append(part.text)
    return "".join(toks).strip() + ";"


def version_key(source_text, flags, defines):
    h = hashlib.sha256()
    h.update(source_text.encode())
    h.update(b"\x00")
    h.update("\x00".join(sorted(flags)).encode())
    h.update(b"\x01")
    h.update("\x00".join(sorted(defines)).encode())
    return h.hexdigest()


class VersionCache:
    """Shared-library artifacts keyed by (closure bytes, flags, defines)."""

    def __init__(self, cache_dir, compiler=SHARED_COMPILER):
        self.cache_dir = cache_dir
        self.compiler = compiler
        os.makedirs(cache_dir, exist_ok=True)

    def compile_version(self, ast, function_name, flags=(), defines=()):
        """Returns (shared_library_path, cache_hit)."""
        closure = extract_closure(ast, function_name)
        flags = list(flags)
        define_args = [f"-D{d}" for d in defines]
        key = version_key(closure, flags, define_args)
        entry = os.path.join(self.cache_dir, key)
        lib = os.path.join(entry, "lib.so")
        with _dir_lock(self.cache_dir):
            if os.path.exists(lib):
                return lib, True
            os.makedirs(entry, exist_ok=True)
            src = os.path.join(entry, "src.c")
            with open(src, "w") as fh:
                fh.write(closure)
            argv0 = shlex.split(self.compiler.split("{")[0])[0]
            if shutil.which(argv0) is None:
                raise CompilerNotFound(f"compiler {argv0!r} not found on PATH")
            cmd = self.compiler.format(src=src, out=lib,
                                       flags=" ".join(flags),
                                       defines=" ".join(define_args))
            proc = subprocess.run(shlex.split(cmd), capture_output=True, text=True)
            if proc.returncode != 0 or not os.path.exists(lib):
                raise CompileFailed(proc.stdout + proc.stderr)
            meta = {
                "function": function_name,
                "flags": flags,
                "defines": define_args,
                "source_sha256": hashlib.sha256(closure.encode()).hexdigest(),
            }
            with open(os.path.join(entry, "meta"), "w") as fh:
                json.dump(meta, fh, indent=1)
        return lib, False


class _dir_lock:
    """Advisory cross-process lock on a cache directory."""

    def __init__(self, directory):
        self.path = os.path.join(directory, ".lock")

    def __enter__(self):
        import fcntl
        self.fh = open(self.path, "w")
        fcntl.flock(self.fh, fcntl.LOCK_EX)
        return self

    def __exit__(self, *exc):
        import fcntl
        fcntl.flock(self.fh, fcntl.LOCK_UN)
        self.fh.close()
        return False
