"""Composition operators ``C_phi f = f o phi`` for disk automorphisms ``phi``.

``C_phi`` is hypercyclic (and mixing) on H^p exactly when ``phi`` has no
fixed point inside the disk.  This module decides that by the fixed-point
test and attaches numerical evidence either way:

* positive case: orbit decay on functions vanishing at the attracting
  (resp. repelling) point, and an explicit transitivity witness;
* negative case: a lower bound on ``||C_phi^n f - g||`` from evaluation
  at the interior fixed point.

Iterates are evaluated through the map's normal form (``PoweredMap``),
which stays accurate for any ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from compdyn import hardy
from compdyn.config import DEFAULT_TOLERANCES, Tolerances
from compdyn.errors import (
    BudgetExhaustedError,
    DomainError,
    HypothesisError,
    InvalidAutomorphismError,
)
from compdyn.hardy import AnalyticFn, ComposeMobius, Polynomial, QuadratureSpec
from compdyn.mobius import (
    MapClass,
    MapClassification,
    MobiusMap,
    NormalForm,
    PoweredMap,
    classify,
    inverse,
    is_disk_automorphism,
)


class CompositionOperator:
    """``C_phi`` for a disk automorphism ``phi``.

    Powers share one :class:`NormalForm`; the right inverse reuses it
    with the opposite sign, so ``C^n`` and ``S^n`` compose exactly.
    """

    def __init__(self, phi: MobiusMap, tol: Tolerances = DEFAULT_TOLERANCES,
                 _nf: NormalForm | None = None, _sign: int = 1):
        if not is_disk_automorphism(phi, tol):
            raise InvalidAutomorphismError("composition operators need a disk automorphism")
        self.map = phi
        self.tol = tol
        self.classification: MapClassification = classify(phi, tol)
        self.normal_form = _nf if _nf is not None else NormalForm(phi, self.classification, tol)
        self.sign = _sign

    def __repr__(self):
        return f"CompositionOperator({self.map!r}, {self.classification.kind.value})"

    def power(self, n: int) -> PoweredMap:
        """``phi^n`` as a normal-form power."""
        return self.normal_form.power(self.sign * n)

    @property
    def is_mixing_class(self) -> bool:
        return self.classification.kind in (MapClass.PARABOLIC, MapClass.HYPERBOLIC)


def apply(op: CompositionOperator, f: AnalyticFn, n: int = 1) -> AnalyticFn:
    """``C_phi^n f = f o phi^n``."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    if n == 0:
        return f
    return hardy.compose(f, op.power(n))


def right_inverse(op: CompositionOperator) -> CompositionOperator:
    """``S = C_{phi^-1}``, so that ``C_phi S = I``."""
    return CompositionOperator(inverse(op.map), op.tol, op.normal_form, -op.sign)


@dataclass
class DecayTable:
    rows: list
    label: str
    p: float

    def __post_init__(self):
        ns = [n for n, _ in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("DecayTable rows must have strictly increasing n")

    @property
    def ns(self) -> list[int]:
        return [n for n, _ in self.rows]

    @property
    def norms(self) -> list[float]:
        return [v for _, v in self.rows]

    @property
    def last(self) -> float:
        return self.rows[-1][1]

    def max_increase(self) -> float:
        v = self.norms
        return max([b - a for a, b in zip(v, v[1:])] + [0.0])


def geometric_schedule(n_max: int, count: int = 200) -> list[int]:
    """``0`` plus roughly ``count`` geometrically spaced iterates up to ``n_max``."""
    pts = np.unique(np.round(np.geomspace(1, n_max, count)).astype(int))
    return [0] + [int(n) for n in pts if n >= 1]


def default_schedule(n_max: int) -> list[int]:
    return list(range(n_max + 1)) if n_max <= 512 else geometric_schedule(n_max)


def orbit_norms(op: CompositionOperator, f: AnalyticFn, p: float, n_max: int,
                spec: QuadratureSpec | None = None, schedule=None,
                label: str | None = None) -> DecayTable:
    """``||C_phi^n f||_p`` by boundary quadrature of ``f o phi^n``."""
    if n_max < 1:
        raise DomainError("n_max must be positive")
    spec = (spec or QuadratureSpec()).with_p(p)
    ns = default_schedule(n_max) if schedule is None else list(schedule)
    rows = [(n, hardy.hp_norm(apply(op, f, n), spec)) for n in ns]
    return DecayTable(rows, label or f.label or "f", p)


def _require_mixing_class(op: CompositionOperator, what: str):
    if not op.is_mixing_class:
        raise HypothesisError(
            f"{what} needs a parabolic or hyperbolic symbol; this one is "
            f"{op.classification.kind.value} and fixes a point inside the disk, "
            "so C_phi is not hypercyclic"
        )


def vanishing_samples(z: complex, sample_count: int, rng: np.random.Generator,
                      tag: str) -> list[Polynomial]:
    """``(w - z) q(w)`` for random ``q`` of degree <= 6, then ``g_0..g_8``."""
    out = []
    for i in range(sample_count):
        deg = int(rng.integers(0, 7))
        q = rng.random(deg + 1) + 1j * rng.random(deg + 1)
        out.append(Polynomial(np.convolve([-z, 1.0], q), label=f"{tag}.rand[{i}]"))
    for j in range(9):
        g = hardy.gn_family(z, j)
        g.label = f"{tag}.gn[{j}]"
        out.append(g)
    return out


class KitaiResult(NamedTuple):
    x_tables: list
    y_tables: list
    max_roundtrip_error: float

    def passed(self, tol: float) -> bool:
        return all(t.last < tol for t in self.x_tables + self.y_tables)


def roundtrip_error(op: CompositionOperator, f: AnalyticFn, points: int = 64) -> float:
    """``max |(C_phi S f - f)(w)|`` on a circle grid, with plain matrices."""
    w = np.exp(2j * np.pi * np.arange(points) / points)
    s_f = ComposeMobius(f, inverse(op.map))
    cs_f = ComposeMobius(s_f, op.map)
    return float(np.max(np.abs(cs_f(w) - f(w))))


def kitai_check(op: CompositionOperator, p: float, sample_count: int, n_max: int,
                tol: float, spec: QuadratureSpec | None = None, seed: int = 0,
                schedule=None) -> KitaiResult:
    """Decay of ``C^n`` on X0 samples and ``S^n`` on Y0 samples, plus ``C S = I``.

    ``tol`` is reported through :meth:`KitaiResult.passed`, not enforced.
    """
    _require_mixing_class(op, "the Kitai check")
    if not tol > 0:
        raise DomainError("tol must be positive")
    cls = op.classification
    rng = np.random.default_rng(seed)
    xs = vanishing_samples(cls.attracting, sample_count, rng, "X0")
    ys = vanishing_samples(cls.repelling, sample_count, rng, "Y0")
    s = right_inverse(op)
    x_tables = [orbit_norms(op, f, p, n_max, spec, schedule) for f in xs]
    y_tables = [orbit_norms(s, g, p, n_max, spec, schedule) for g in ys]
    err = max(roundtrip_error(op, f) for f in xs + ys)
    return KitaiResult(x_tables, y_tables, err)


@dataclass
class TransitivityWitness:
    n: int
    u: AnalyticFn
    err_start: float
    err_end: float
    k_bump: int
    p: float
    f0: AnalyticFn | None = None
    g0: AnalyticFn | None = None


def _witness_n_candidates(n_budget: int):
    n = 1
    while n <= n_budget:
        yield n
        n = n + 1 if n < 64 else int(math.ceil(n * 1.25))


def transitivity_witness(op: CompositionOperator, f: AnalyticFn, g: AnalyticFn,
                         p: float, eps: float, spec: QuadratureSpec | None = None,
                         k_max: int = 4096, n_budget: int | None = None
                         ) -> TransitivityWitness:
    """``u = f0 + S^n g0`` with ``||u - f|| < eps`` and ``||C^n u - g|| < eps``.

    ``f0``, ``g0`` are ``f``, ``g`` pushed into X0, Y0 by bump projection.
    Both errors are measured on the assembled expression trees.
    """
    _require_mixing_class(op, "a transitivity witness")
    if not eps > 0:
        raise DomainError("eps must be positive")
    spec = (spec or QuadratureSpec()).with_p(p)
    cls = op.classification
    if n_budget is None:
        n_budget = 100_000 if cls.kind is MapClass.PARABOLIC else 1000
    z0, z1 = cls.attracting, cls.repelling
    fz0, gz1 = abs(f(z0)), abs(g(z1))

    k = 1
    while True:
        bn = hardy.hp_norm(hardy.bump(z0, k), spec)
        if fz0 * bn < eps / 4 and gz1 * bn < eps / 4:
            break
        k *= 2
        if k > k_max:
            raise BudgetExhaustedError(f"bump exponent exceeded {k_max}")
    f0 = hardy.vanish_at(f, z0, k)
    g0 = hardy.vanish_at(g, z1, k)
    s = right_inverse(op)

    if hardy.hp_norm(f - g, spec) < eps / 4:
        u = f0
        err_start = hardy.hp_norm(u - f, spec)
        err_end = hardy.hp_norm(u - g, spec)
        return TransitivityWitness(0, u, err_start, err_end, k, p, f0, g0)

    for n in _witness_n_candidates(n_budget):
        if hardy.hp_norm(apply(op, f0, n), spec) >= eps / 4:
            continue
        sg = apply(s, g0, n)
        if hardy.hp_norm(sg, spec) >= eps / 4:
            continue
        u = f0 + sg
        err_start = hardy.hp_norm(u - f, spec)
        err_end = hardy.hp_norm(apply(op, u, n) - g, spec)
        return TransitivityWitness(n, u, err_start, err_end, k, p, f0, g0)
    raise BudgetExhaustedError(f"no iterate up to {n_budget} met eps/4 on both sides")


class SeparationBound(NamedTuple):
    bound: float
    measured_min: float
    z0: complex
    R: float


def separation_lower_bound(op: CompositionOperator, f: AnalyticFn, g: AnalyticFn,
                           p: float, n_max: int, R: float,
                           spec: QuadratureSpec | None = None) -> SeparationBound:
    """Orbit-to-target distance bound at an interior fixed point ``z0``.

    ``C_phi^n f`` takes the value ``f(z0)`` at ``z0`` for every ``n``, so
    ``||C_phi^n f - g|| >= (R - |z0|)/R * |f(z0) - g(z0)|``.
    """
    cls = op.classification
    if cls.kind is MapClass.IDENTITY:
        z0 = 0j
    elif cls.kind is MapClass.ELLIPTIC:
        z0 = cls.interior_fixed_points(op.tol.boundary)[0]
    else:
        raise HypothesisError(
            f"the separation bound needs an interior fixed point; symbol is {cls.kind.value}"
        )
    if not (abs(z0) < R < 1):
        raise DomainError(f"need |z0| < R < 1, got |z0|={abs(z0)}, R={R}")
    spec = (spec or QuadratureSpec()).with_p(p)
    bound = (R - abs(z0)) / R * abs(f(z0) - g(z0))
    measured = min(hardy.hp_norm(apply(op, f, n) - g, spec) for n in range(n_max + 1))
    return SeparationBound(bound, measured, complex(z0), R)


@dataclass(frozen=True)
class Budget:
    """Evidence budgets; parabolic symbols get ``parabolic_factor`` times more."""

    n_max: int = 120
    parabolic_factor: int = 100
    sample_count: int = 8
    tol: float = 1e-3
    parabolic_tol: float = 1e-2
    witness_eps: float = 0.1
    n_budget: int = 1000
    k_max: int = 4096
    seed: int = 0
    nodes: int = 4096
    separation_n_max: int = 200
    evidence: bool = True


@dataclass
class TheoremVerdict:
    classification: MapClassification
    hypercyclic: bool
    mixing: bool
    kitai: KitaiResult | None = None
    kitai_tol: float | None = None
    witness: TransitivityWitness | None = None
    separation: SeparationBound | None = None
    notes: list = field(default_factory=list)


def default_positive_pair(cls: MapClassification) -> tuple[Polynomial, Polynomial]:
    """``f`` vanishing at the attracting point, ``g`` at the repelling one."""
    z0, z1 = cls.attracting, cls.repelling
    f = Polynomial([1.0, -z0.conjugate()], label="f")
    if cls.kind is MapClass.PARABOLIC:
        # z0 == z1; multiply by z so the pair is not degenerate
        g = Polynomial([0.0, 1.0, -z1.conjugate()], label="g")
    else:
        g = Polynomial([1.0, -z1.conjugate()], label="g")
    return f, g


def default_negative_pair(z0: complex) -> tuple[Polynomial, Polynomial]:
    f = Polynomial([0.0, 1.0], label="f")
    g = Polynomial([1.0], label="g")
    if abs(f(z0) - g(z0)) < 1e-12:
        g = Polynomial([2.0], label="g")
    return f, g


def theorem_verdict(op: CompositionOperator, p: float = 2.0,
                    budget: Budget = Budget()) -> TheoremVerdict:
    """Hypercyclic and mixing iff no fixed point lies in the open disk."""
    cls = op.classification
    interior = cls.interior_fixed_points(op.tol.boundary)
    positive = not interior
    verdict = TheoremVerdict(cls, positive, positive)
    verdict.notes.append("transitive implies hypercyclic is taken as definitional")
    if not budget.evidence:
        return verdict
    spec = QuadratureSpec(p, budget.nodes)
    if positive:
        parabolic = cls.kind is MapClass.PARABOLIC
        factor = budget.parabolic_factor if parabolic else 1
        tol = budget.parabolic_tol if parabolic else budget.tol
        verdict.kitai = kitai_check(op, p, budget.sample_count, budget.n_max * factor,
                                    tol, spec, budget.seed)
        verdict.kitai_tol = tol
        f, g = default_positive_pair(cls)
        verdict.witness = transitivity_witness(op, f, g, p, budget.witness_eps, spec,
                                               budget.k_max, budget.n_budget * factor)
        verdict.notes.append("decay budgets are empirical; no rate is known in general")
    else:
        z0 = interior[0]
        f, g = default_negative_pair(z0)
        R = (1 + abs(z0)) / 2
        verdict.separation = separation_lower_bound(op, f, g, p, budget.separation_n_max,
                                                    R, spec)
    return verdict
