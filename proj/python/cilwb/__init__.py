"""Continuous infinitary logic over finite metric structures."""

from fractions import Fraction

from . import _core
from ._core import (
    Formula,
    InvalidArgument,
    Structure,
    __version__,
    approx_iso,
    audit_modulus,
    automorphisms,
    find_support,
    isomorphic,
    orbit_formula,
    parse,
    scott,
    scott_rank,
    theta,
    validate,
)


def evaluate(formula, structure, at=()):
    """Exact value of formula at the named points, as a Fraction."""
    return Fraction(_core.evaluate(formula, structure, list(at)))


def henkin(oracle, stages=10, seed=""):
    out = _core.henkin(oracle, stages, seed)
    out["max_error"] = Fraction(out["max_error"])
    return out


__all__ = [
    "Formula",
    "InvalidArgument",
    "Structure",
    "__version__",
    "approx_iso",
    "audit_modulus",
    "automorphisms",
    "evaluate",
    "find_support",
    "henkin",
    "isomorphic",
    "orbit_formula",
    "parse",
    "scott",
    "scott_rank",
    "theta",
    "validate",
]
