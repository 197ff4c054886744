"""aweave: aspect weaving for a C99 subset, plus autotuning and DSE tools."""

__version__ = "0.1.0"
