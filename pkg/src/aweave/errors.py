"""Exception types shared across the toolkit.

Every domain error derives from WeaveError so the CLI can map them to
exit code 1; anything else is a genuine bug.
"""


class WeaveError(Exception):
    """Base class for all domain errors raised by aweave."""


class CSyntaxError(WeaveError):
    def __init__(self, line, col, expected):
        super().__init__(f"syntax error at {line}:{col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class UnsupportedConstruct(WeaveError):
    def __init__(self, line, construct):
        super().__init__(f"unsupported construct at line {line}: {construct}")
        self.line = line
        self.construct = construct


class TypeSyntaxError(WeaveError):
    pass


# weave-core

class IllegalChain(WeaveError):
    def __init__(self, parent_kind, child_kind):
        super().__init__(f"illegal select step: {parent_kind} -> {child_kind}")
        self.parent_kind = parent_kind
        self.child_kind = child_kind


class UnknownAttribute(WeaveError):
    def __init__(self, kind, name):
        super().__init__(f"join point kind {kind!r} has no attribute {name!r}")
        self.kind = kind
        self.name = name


class ParseErrorInFragment(WeaveError):
    pass


class InvalidAnchor(WeaveError):
    pass


class NotADecl(WeaveError):
    pass


class DuplicateName(WeaveError):
    pass


class FunctionNotFound(WeaveError):
    pass


# strategies

class UnsupportedSignature(WeaveError):
    pass


class SignatureMismatch(WeaveError):
    pass


class NotAStatementCall(WeaveError):
    pass


# aspect DSL

class AspectSyntaxError(WeaveError):
    def __init__(self, line, message):
        super().__init__(f"aspect syntax error at line {line}: {message}")
        self.line = line


class UnknownSelectRef(WeaveError):
    pass


class UnknownAspectRef(WeaveError):
    pass


class RecursionCycle(WeaveError):
    pass


class AspectRuntimeError(WeaveError):
    """An action error annotated with the aspect name and source line."""

    def __init__(self, aspect, line, cause):
        super().__init__(f"in aspect {aspect!r} (line {line}): {cause}")
        self.aspect = aspect
        self.line = line
        self.cause = cause


# autotuner

class SchemaError(WeaveError):
    pass


class DuplicatePoint(WeaveError):
    pass


class UnknownMetric(WeaveError):
    pass


class EmptyKnowledge(WeaveError):
    pass


# explore

class ConfigError(WeaveError):
    pass


class CompilerNotFound(WeaveError):
    pass


class CompileFailed(WeaveError):
    def __init__(self, log):
        super().__init__("compilation failed:\n" + log)
        self.log = log


class RunTimeout(WeaveError):
    pass


class NonzeroExit(WeaveError):
    def __init__(self, code, log=""):
        super().__init__(f"measured process exited with status {code}")
        self.code = code
        self.log = log


class ClosureExtractionFailed(WeaveError):
    pass
