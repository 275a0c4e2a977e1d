"""Numerical tolerances shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Tolerances used for comparisons.

    ``disc`` is relative: a quadratic discriminant ``D`` collapses to a
    double root when ``|D| < disc * scale**2`` with ``scale`` the largest
    coefficient modulus.  ``disc_round`` is the roundoff floor below which
    the collapse is silent (no near-parabolic warning).
    """

    classify: float = 1e-9
    disc: float = 1e-10
    disc_round: float = 1e-14
    unit: float = 1e-9
    boundary: float = 1e-12
    det: float = 1e-13
    eval: float = 1e-12


DEFAULT_TOLERANCES = Tolerances()
