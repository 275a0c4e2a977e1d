"""Linear fractional transformations, specialised to automorphisms of the disk.

A map ``z -> (a z + b) / (c z + d)`` is stored as its 2x2 matrix, scaled so
that the entry of largest modulus equals 1.  Composition is matrix
multiplication followed by the same renormalisation, which keeps long
products (``iterate``) away from overflow and underflow.

Points of the extended plane are plain Python complex numbers or the
singleton :data:`INF`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import InitVar, dataclass, field
from enum import Enum
from typing import Union

import numpy as np

from compdyn.config import DEFAULT_TOLERANCES, Tolerances
from compdyn.errors import (
    DegenerateMapError,
    DomainError,
    HypothesisError,
    InvalidAutomorphismError,
    NearParabolicWarning,
)


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
ExtendedPoint = Union[complex, _Infinity]


def is_inf(z) -> bool:
    return z is INF


# quadratic leading coefficients below this (relative) count as zero
_TINY = 1e-15


def _clean(z):
    """Drop signed zeros so reports do not show ``-0``."""
    if z is INF:
        return z
    return complex(z.real + 0.0, z.imag + 0.0)


def _max_index(entries) -> int:
    mods = [abs(e) for e in entries]
    return mods.index(max(mods))


@dataclass(frozen=True)
class MobiusMap:
    """The map ``z -> (a z + b) / (c z + d)``.

    Entries are normalised on construction.  Passing ``check=False`` skips
    the determinant test; products of long chains use it because their
    computed determinant can legitimately fall below roundoff.
    """

    a: complex
    b: complex
    c: complex
    d: complex
    check: InitVar[bool] = True
    tol: InitVar[Tolerances] = DEFAULT_TOLERANCES

    def __post_init__(self, check, tol):
        entries = [complex(self.a), complex(self.b), complex(self.c), complex(self.d)]
        if not all(cmath.isfinite(e) for e in entries):
            raise DegenerateMapError(f"non-finite matrix entries {entries}")
        k = _max_index(entries)
        scale = entries[k]
        if scale == 0:
            raise DegenerateMapError("zero matrix")
        entries = [e / scale for e in entries]
        entries[k] = 1.0 + 0.0j
        for name, value in zip("abcd", entries):
            object.__setattr__(self, name, value)
        if check:
            det = entries[0] * entries[3] - entries[1] * entries[2]
            if abs(det) < tol.det:
                raise DegenerateMapError(
                    f"determinant {abs(det):.3e} below tolerance {tol.det:.1e}"
                )

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def entries(self) -> tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, z):
        """Vectorised evaluation at finite points (no infinity handling)."""
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        return self.det / (self.c * z + self.d) ** 2

    def inverse(self) -> "MobiusMap":
        return inverse(self)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return compose(self, other)


def identity() -> MobiusMap:
    return MobiusMap(1, 0, 0, 1)


@dataclass(frozen=True)
class DiskAutomorphismParams:
    """Normal-form parameters of ``z -> b (z - a) / (1 - conj(a) z)``."""

    a: complex
    b: complex

    def validate(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        a, b = complex(self.a), complex(self.b)
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            raise InvalidAutomorphismError("non-finite parameters")
        if abs(a) >= 1 - tol.boundary:
            raise InvalidAutomorphismError(f"|a| = {abs(a)!r} is not < 1")
        if abs(abs(b) - 1) >= tol.unit:
            raise InvalidAutomorphismError(f"|b| = {abs(b)!r} is not 1")


def from_disk_params(
    params: DiskAutomorphismParams, tol: Tolerances = DEFAULT_TOLERANCES
) -> MobiusMap:
    params.validate(tol)
    a, b = complex(params.a), complex(params.b)
    f = MobiusMap(b, -a * b, -a.conjugate(), 1, tol=tol)
    if not is_disk_automorphism(f, tol):
        raise InvalidAutomorphismError(f"parameters {params} fail the circle test")
    return f


def compose(f: MobiusMap, g: MobiusMap) -> MobiusMap:
    """``f o g`` as a renormalised matrix product."""
    return MobiusMap(
        f.a * g.a + f.b * g.c,
        f.a * g.b + f.b * g.d,
        f.c * g.a + f.d * g.c,
        f.c * g.b + f.d * g.d,
        check=False,
    )


def inverse(f: MobiusMap) -> MobiusMap:
    return MobiusMap(f.d, -f.b, -f.c, f.a, check=False)


def iterate(f: MobiusMap, n: int) -> MobiusMap:
    """``f`` composed with itself ``n`` times, by binary exponentiation."""
    if n < 0:
        raise DomainError(f"iterate needs n >= 0, got {n}")
    result = identity()
    base = f
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def apply(f: MobiusMap, z: ExtendedPoint) -> ExtendedPoint:
    """Evaluate on the extended plane."""
    if z is INF:
        if f.c == 0:
            return INF
        return f.a / f.c
    z = complex(z)
    den = f.c * z + f.d
    if den == 0:
        return INF
    return (f.a * z + f.b) / den


def allclose(f: MobiusMap, g: MobiusMap, atol: float = 1e-12) -> bool:
    """Projective comparison of two maps after normalisation."""
    k = _max_index(f.entries)
    gk = g.entries[k]
    if abs(gk) < 0.5:
        return False
    s = f.entries[k] / gk
    return max(abs(x - s * y) for x, y in zip(f.entries, g.entries)) < atol


def is_identity(f: MobiusMap, eps: float = DEFAULT_TOLERANCES.classify) -> bool:
    return abs(f.b) < eps and abs(f.c) < eps and abs(f.a - f.d) < eps


def is_disk_automorphism(f: MobiusMap, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True iff ``f`` maps the unit disk onto itself.

    Primary test: ``M^H J M = t J`` with ``J = diag(1, -1)`` and ``t > 0``,
    plus ``|f(0)| < 1``.  Sixteen circle samples are a cross-check only.
    """
    a, b, c, d = f.entries
    h11 = abs(a) ** 2 - abs(c) ** 2
    h22 = abs(b) ** 2 - abs(d) ** 2
    h12 = a.conjugate() * b - c.conjugate() * d
    if not (h11 > 4 * np.finfo(float).eps):
        return False
    if abs(h11 + h22) > tol.unit or abs(h12) > tol.unit:
        return False
    if d == 0 or abs(b / d) >= 1:
        return False
    w = np.exp(2j * np.pi * np.arange(16) / 16)
    return bool(np.all(np.abs(np.abs(f(w)) - 1) < tol.unit))


def derivative_at(f: MobiusMap, z: ExtendedPoint) -> complex:
    """``f'(z)``; at a fixed point at infinity, the derivative in the chart
    ``w = 1/z``, which is the reciprocal of ``f'`` at the finite fixed point."""
    if z is INF:
        if abs(f.c) > _TINY:
            raise DomainError("infinity is not a fixed point of this map")
        return f.d / f.a
    return complex(f.derivative(complex(z)))


def _fixed_points(f: MobiusMap, tol: Tolerances) -> tuple[list, bool, bool]:
    """Roots of ``c z^2 + (d - a) z - b = 0``.

    Returns ``(points, collapsed, near_parabolic)``.
    """
    a, b, c, d = f.entries
    A, B, C = c, d - a, -b
    scale = max(abs(A), abs(B), abs(C))
    disc = B * B - 4 * A * C
    collapsed = abs(disc) < tol.disc * scale**2
    near = collapsed and abs(disc) > tol.disc_round * scale**2
    if abs(A) <= _TINY * scale:
        if collapsed:
            return [INF], True, near
        return [_clean(-C / B), INF], False, False
    if collapsed:
        return [_clean(-B / (2 * A))], True, near
    root = cmath.sqrt(disc)
    if (B.conjugate() * root).real < 0:
        root = -root
    q = -(B + root) / 2
    return [_clean(q / A), _clean(C / q)], False, False


def fixed_points(f: MobiusMap, tol: Tolerances = DEFAULT_TOLERANCES) -> list:
    if is_identity(f, tol.classify):
        raise DegenerateMapError("the identity fixes every point")
    pts, _, near = _fixed_points(f, tol)
    if near:
        warnings.warn(
            "near-parabolic map: fixed points merged at double precision",
            NearParabolicWarning,
            stacklevel=2,
        )
    return pts


def multiplier(f: MobiusMap, cls_fixed: list) -> complex:
    """Derivative at the first listed fixed point; the other one gives 1/λ."""
    if len(cls_fixed) != 2:
        raise HypothesisError("multiplier needs two distinct fixed points")
    return derivative_at(f, cls_fixed[0])


def conjugate(f: MobiusMap, s: MobiusMap) -> MobiusMap:
    """``s o f o s^{-1}``."""
    return compose(s, compose(f, inverse(s)))


class MapClass(str, Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    HYPERBOLIC = "hyperbolic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class MapClassification:
    kind: MapClass
    fixed_points: list = field(default_factory=list)
    multiplier: complex | None = None
    attracting: ExtendedPoint | None = None
    repelling: ExtendedPoint | None = None
    automorphism: bool = False
    near_parabolic: bool = False

    def interior_fixed_points(self, eps: float = DEFAULT_TOLERANCES.boundary) -> list:
        """Fixed points with modulus below ``1 - eps``; the identity counts 0."""
        if self.kind is MapClass.IDENTITY:
            return [0j]
        return [z for z in self.fixed_points if z is not INF and abs(z) < 1 - eps]


def _modulus(z) -> float:
    return math.inf if z is INF else abs(z)


def classify(f: MobiusMap, tol: Tolerances = DEFAULT_TOLERANCES) -> MapClassification:
    auto = is_disk_automorphism(f, tol)
    if is_identity(f, tol.classify):
        return MapClassification(MapClass.IDENTITY, automorphism=auto)
    pts, _, near = _fixed_points(f, tol)
    if near:
        warnings.warn(
            "near-parabolic map classified as parabolic",
            NearParabolicWarning,
            stacklevel=2,
        )
    if len(pts) == 1:
        z0 = pts[0]
        if auto and z0 is not INF:
            z0 = z0 / abs(z0)
            return MapClassification(
                MapClass.PARABOLIC, [z0], None, z0, z0, True, near
            )
        return MapClassification(MapClass.PARABOLIC, [z0], automorphism=auto,
                                 near_parabolic=near)

    lam = [_clean(derivative_at(f, z)) for z in pts]
    # test on the representative with |λ| <= 1 so λ and 1/λ are treated alike
    small = lam[0] if abs(lam[0]) <= abs(lam[1]) else lam[1]
    if abs(abs(small) - 1) < tol.classify:
        kind = MapClass.ELLIPTIC
    elif abs(small.imag) < tol.classify and small.real > 0:
        kind = MapClass.HYPERBOLIC
    else:
        kind = MapClass.LOXODROMIC

    attracting = repelling = None
    if auto and kind is MapClass.HYPERBOLIC:
        if abs(lam[1]) < abs(lam[0]):
            pts, lam = pts[::-1], lam[::-1]
        pts = [z / abs(z) for z in pts]
        attracting, repelling = pts
    elif auto and kind is MapClass.ELLIPTIC:
        if _modulus(pts[1]) < _modulus(pts[0]):
            pts, lam = pts[::-1], lam[::-1]
    return MapClassification(kind, list(pts), lam[0], attracting, repelling, auto, near)


def boundary_convergence(
    f: MobiusMap, grid_size: int, n: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> list[tuple[complex, float]]:
    """Distance of ``f^n(w)`` to the attracting point for circle points ``w``.

    Circle points within 1e-3 of the repelling fixed point are skipped.
    """
    cls = classify(f, tol)
    if not cls.automorphism or cls.kind not in (MapClass.PARABOLIC, MapClass.HYPERBOLIC):
        raise HypothesisError(
            f"boundary convergence needs a parabolic or hyperbolic automorphism, got {cls.kind.value}"
        )
    g = iterate(f, n)
    out = []
    for j in range(grid_size):
        w = cmath.exp(2j * math.pi * j / grid_size)
        if abs(w - cls.repelling) < 1e-3:
            continue
        out.append((w, abs(apply(g, w) - cls.attracting)))
    return out


class NormalForm:
    """Conjugacy of a non-identity map to ``z -> λ z`` or ``z -> z + τ``.

    Powers evaluated through the conjugacy stay accurate for every ``n``;
    the matrix of ``f^n`` itself becomes numerically rank one once
    ``|λ|^n`` drops below roundoff, after which evaluating it near the
    repelling fixed point returns garbage.
    """

    def __init__(self, f: MobiusMap, classification: MapClassification | None = None,
                 tol: Tolerances = DEFAULT_TOLERANCES):
        self.base = f
        cls = classification if classification is not None else classify(f, tol)
        self.classification = cls
        self.lam = 1.0 + 0j
        self.tau = 0j
        if cls.kind is MapClass.IDENTITY:
            self.kind = "identity"
            self.S = identity()
        elif cls.kind is MapClass.PARABOLIC:
            self.kind = "translate"
            z0 = cls.fixed_points[0]
            if z0 is INF:
                self.S = identity()
                self.tau = f.b / f.d
            else:
                self.S = MobiusMap(0, 1, 1, -z0, check=False)
                self.tau = f.c / (f.a - f.c * z0)
        else:
            self.kind = "scale"
            z0, z1 = cls.fixed_points
            if z0 is INF:
                z0, z1 = z1, z0
            lam = derivative_at(f, z0)
            if cls.kind is MapClass.ELLIPTIC and cls.automorphism:
                lam = lam / abs(lam)
            self.lam = lam
            if z1 is INF:
                self.S = MobiusMap(1, -z0, 0, 1, check=False)
            else:
                self.S = MobiusMap(1, -z0, 1, -z1, check=False)

    def power(self, n: int) -> "PoweredMap":
        return PoweredMap(self, n)


class PoweredMap:
    """``f^n`` (``n`` may be negative) evaluated through a :class:`NormalForm`.

    Behaves like a :class:`MobiusMap` for evaluation (``__call__``,
    ``derivative``, ``inverse``); ``matrix`` gives the binary-exponentiated
    matrix for reporting.
    """

    def __init__(self, nf: NormalForm, n: int):
        self.nf = nf
        self.n = int(n)

    def __repr__(self):
        return f"PoweredMap({self.nf.kind}, n={self.n})"

    @property
    def is_identity(self) -> bool:
        return self.n == 0 or self.nf.kind == "identity"

    @property
    def matrix(self) -> MobiusMap:
        if self.n >= 0:
            return iterate(self.nf.base, self.n)
        return iterate(inverse(self.nf.base), -self.n)

    def inverse(self) -> "PoweredMap":
        return PoweredMap(self.nf, -self.n)

    def _middle(self, p, q):
        nf, n = self.nf, self.n
        if nf.kind == "translate":
            return p + (n * nf.tau) * q, q, 1.0 + 0j
        if nf.kind == "scale":
            if abs(nf.lam) <= 1:
                f = nf.lam**n if n >= 0 else (1 / nf.lam) ** (-n)
            else:
                f = nf.lam**n if n <= 0 else (1 / nf.lam) ** (-n)
            # keep the multiplied factor of modulus <= 1 to avoid overflow
            if abs(f) <= 1:
                return f * p, q, f
            g = 1 / f
            return p, g * q, g
        return p, q, 1.0 + 0j

    def _homogeneous(self, w):
        S = self.nf.S
        p = S.a * w + S.b
        q = S.c * w + S.d
        p, q, det_mid = self._middle(p, q)
        # adjugate of S
        x = S.d * p - S.b * q
        y = -S.c * p + S.a * q
        return x, y, det_mid

    def __call__(self, w):
        if self.is_identity:
            return w * 1.0
        x, y, _ = self._homogeneous(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            return x / y

    def derivative(self, w):
        if self.is_identity:
            return np.ones_like(np.asarray(w, dtype=complex)) if np.ndim(w) else 1.0 + 0j
        _, y, det_mid = self._homogeneous(w)
        det_s = self.nf.S.det
        with np.errstate(divide="ignore", invalid="ignore"):
            return det_s * det_s * det_mid / (y * y)

    def then(self, other: "PoweredMap") -> "PoweredMap | None":
        """``self o other`` when both are powers of the same normal form."""
        if isinstance(other, PoweredMap) and other.nf is self.nf:
            return PoweredMap(self.nf, self.n + other.n)
        return None
