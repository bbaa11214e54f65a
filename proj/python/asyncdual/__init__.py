"""Asynchronous distributed dual ascent (compiled core)."""

from ._asyncdual import (
    ConvergenceError,
    Error,
    Problem,
    SchemaError,
    consensus,
    constants,
    ieee14,
    load_instance,
    parse_instance,
    random_instance,
    reference,
    solve,
    validate,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "Problem",
    "SchemaError",
    "consensus",
    "constants",
    "ieee14",
    "load_instance",
    "parse_instance",
    "random_instance",
    "reference",
    "solve",
    "validate",
]
