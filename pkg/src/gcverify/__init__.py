"""Numerical verification of generalized complex geometry on linear and model spaces."""

__version__ = "0.1.0"

from . import subspace, linear, fields, expr, stein  # noqa: E402,F401

__all__ = ["subspace", "linear", "fields", "expr", "stein", "__version__"]
