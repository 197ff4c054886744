"""Built-in transformation strategies: precision, cloning, versioning,
memoization and loop parallelization."""

from .clone import call_graph, clone_call_tree, create_typed_version
from .memoize import MemoConfig, detect_memoizable, memoize, pure_functions
from .multiversion import multiversion
from .parallel import (
    LoopVerdict, auto_parallelize, disable_nested_parallel_pragmas,
)
from .precision import (
    PrecisionMap, change_precision, change_type, create_mixed_versions,
    default_precision_map, enumerate_precision_mixes,
)

__all__ = [
    "PrecisionMap", "change_type", "change_precision", "default_precision_map",
    "enumerate_precision_mixes", "create_mixed_versions",
    "call_graph", "clone_call_tree", "create_typed_version",
    "multiversion",
    "MemoConfig", "memoize", "detect_memoizable", "pure_functions",
    "LoopVerdict", "auto_parallelize", "disable_nested_parallel_pragmas",
]
