"""Analytic functions on a neighbourhood of the closed disk and their H^p norms.

Functions are small expression trees (:class:`Polynomial`,
:class:`ComposeMobius`, :class:`Sum`, :class:`Reciprocal1mCz`,
:class:`BumpPower`).  Every node is analytic past the closed unit disk, so
the H^p norm is the plain boundary mean ``(mean |f(e^{it})|^p)^{1/p}``
and is computed by quadrature.

Nodes report *features*: directions on the circle where the boundary
values vary on a scale much finer than the default grid.  The quadrature
layer uses them to grade its mesh (see :mod:`compdyn.quadrature`).
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from compdyn import quadrature
from compdyn.config import DEFAULT_TOLERANCES, Tolerances
from compdyn.errors import (
    BudgetExhaustedError,
    DomainError,
    InvalidAutomorphismError,
    QuadratureWarning,
)
from compdyn.mobius import MobiusMap, PoweredMap, is_disk_automorphism
from compdyn.quadrature import Feature

# roots of polynomials above this degree are not searched for kinks
_ROOT_DEGREE_LIMIT = 64


@dataclass(frozen=True)
class QuadratureSpec:
    """Exponent, grid size and circle radius for integral means."""

    p: float = 2.0
    nodes: int = 4096
    radius: float = 1.0
    refine: bool = True

    def __post_init__(self):
        if not (self.p >= 1 and math.isfinite(self.p)):
            raise DomainError(f"p must be >= 1, got {self.p}")
        n = int(self.nodes)
        if n != self.nodes or n < 64 or n & (n - 1):
            raise DomainError(f"nodes must be a power of two >= 64, got {self.nodes}")
        if not (0 < self.radius <= 1):
            raise DomainError(f"radius must lie in (0, 1], got {self.radius}")

    def with_nodes(self, nodes: int) -> "QuadratureSpec":
        return QuadratureSpec(self.p, nodes, self.radius, self.refine)

    def with_p(self, p: float) -> "QuadratureSpec":
        return QuadratureSpec(p, self.nodes, self.radius, self.refine)


@dataclass(frozen=True)
class CoeffVector:
    """Taylor coefficients ``a_0..a_M`` and the radius they were extracted at."""

    coefficients: np.ndarray
    radius: float

    def __len__(self):
        return len(self.coefficients)


def _unit(z: complex) -> complex:
    return z / abs(z)


class AnalyticFn:
    """Base class of the expression tree.  Calling evaluates (vectorised)."""

    label: str | None = None

    def _eval(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, z):
        arr = np.asarray(z, dtype=complex)
        out = self._eval(arr)
        if out.ndim == 0:
            return complex(out)
        return out

    def features(self) -> list[Feature]:
        return []

    def as_polynomial(self) -> np.ndarray | None:
        """Ascending coefficients if the node is a polynomial, else None."""
        return None

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial([other])
        return Sum([(1.0, self), (1.0, other)])

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial([other])
        return Sum([(1.0, self), (-1.0, other)])

    def __rsub__(self, other):
        return Polynomial([other]) - self

    def __mul__(self, alpha):
        if not isinstance(alpha, (int, float, complex)):
            return NotImplemented
        return Sum([(alpha, self)])

    __rmul__ = __mul__

    def __neg__(self):
        return Sum([(-1.0, self)])


class Polynomial(AnalyticFn):
    def __init__(self, coeffs, label: str | None = None):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise DomainError("non-finite polynomial coefficient")
        self.coeffs = c
        self.label = label

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"

    @property
    def degree(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        return int(nz[-1]) if nz.size else 0

    def _eval(self, z):
        out = np.zeros_like(z) + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            out = out * z + c
        return out

    def as_polynomial(self):
        return self.coeffs.copy()

    def features(self):
        return _circle_zeros(self.coeffs)


_NEAR_ZERO = 0.1


def _circle_zeros(coeffs) -> list[Feature]:
    c = np.asarray(coeffs, dtype=complex)
    if c.size == 0:
        return []
    # leading coefficients this small only move roots far off the circle
    scale = np.max(np.abs(c))
    if not scale > 0:
        return []
    # real division: complex division by a subnormal overflows
    c = c.real / scale + 1j * (c.imag / scale)
    big = np.nonzero(np.abs(c) > 1e-14)[0]
    c = c[: big[-1] + 1]
    if c.size <= 1 or c.size - 1 > _ROOT_DEGREE_LIMIT:
        return []
    out = []
    for r in np.roots(c[::-1]):
        d = abs(abs(r) - 1)
        if d < _NEAR_ZERO:
            # width 0 marks a kink on the circle, else the distance to it
            out.append(Feature(_unit(r), 0.0 if d < 1e-8 else d, "zero"))
    return out


class ComposeMobius(AnalyticFn):
    """``inner o psi`` for a disk automorphism ``psi``.

    ``psi`` is a :class:`MobiusMap` or a :class:`PoweredMap`; the latter
    stays accurate for large iterates.
    """

    def __init__(self, inner: AnalyticFn, psi, label: str | None = None,
                 check: bool = True, tol: Tolerances = DEFAULT_TOLERANCES):
        if check and isinstance(psi, MobiusMap) and not is_disk_automorphism(psi, tol):
            raise InvalidAutomorphismError("ComposeMobius needs a disk automorphism")
        if check and isinstance(psi, PoweredMap) and not psi.nf.classification.automorphism:
            raise InvalidAutomorphismError("ComposeMobius needs a disk automorphism")
        self.inner = inner
        self.psi = psi
        self.label = label

    def __repr__(self):
        return f"ComposeMobius({self.inner!r}, {self.psi!r})"

    def _eval(self, z):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.inner._eval(np.asarray(self.psi(z), dtype=complex))

    def features(self):
        inv = self.psi.inverse()
        out = []
        a = complex(inv(0j))
        if abs(a) > 0:
            # for an automorphism |(psi^-1)'(0)| = 1 - |a|^2, accurate even
            # when 1 - |a| is below roundoff
            width = abs(complex(inv.derivative(0j))) / (1.0 + abs(a))
            out.append(Feature(_unit(a), width, "peak"))
        for ft in self.inner.features():
            pre = complex(inv(ft.point))
            if not cmath.isfinite(pre) or pre == 0:
                continue
            scale = abs(complex(inv.derivative(ft.point)))
            out.append(Feature(_unit(pre), ft.width * scale, ft.kind))
        return out


class Sum(AnalyticFn):
    """Linear combination ``sum_i w_i f_i``.

    ``zeros`` lists known circle points where the sum vanishes; they are
    used only as quadrature hints.
    """

    def __init__(self, terms, label: str | None = None, zeros=()):
        self.terms = [(complex(w), f) for w, f in terms]
        self.label = label
        self.zeros = tuple(complex(z) for z in zeros)

    def __repr__(self):
        return f"Sum({self.terms!r})"

    def _eval(self, z):
        out = np.zeros(z.shape, dtype=complex)
        for w, f in self.terms:
            out = out + w * f._eval(z)
        return out

    def as_polynomial(self):
        total = np.zeros(1, dtype=complex)
        for w, f in self.terms:
            c = f.as_polynomial()
            if c is None:
                return None
            if c.size > total.size:
                total = np.concatenate((total, np.zeros(c.size - total.size, dtype=complex)))
            total[: c.size] += w * c
        return total

    def features(self):
        out = []
        for _, f in self.terms:
            out.extend(ft for ft in f.features() if ft.kind != "zero")
        poly = self.as_polynomial()
        if poly is not None:
            out.extend(_circle_zeros(poly))
        out.extend(Feature(_unit(z), 0.0, "zero") for z in self.zeros)
        return out


class Reciprocal1mCz(AnalyticFn):
    """``z -> 1 / (1 - c z)`` with ``|c| < 1``."""

    def __init__(self, c: complex, label: str | None = None):
        c = complex(c)
        if not abs(c) < 1:
            raise DomainError(f"Reciprocal1mCz needs |c| < 1, got {abs(c)}")
        self.c = c
        self.label = label

    def __repr__(self):
        return f"Reciprocal1mCz({self.c!r})"

    def _eval(self, z):
        return 1.0 / (1.0 - self.c * z)

    def features(self):
        if self.c == 0:
            return []
        return [Feature(_unit(self.c.conjugate()), 1.0 - abs(self.c), "peak")]


class BumpPower(AnalyticFn):
    """``z -> ((1 + conj(zeta) z) / 2)^k``: equal to 1 at ``zeta``, small elsewhere."""

    def __init__(self, zeta: complex, k: int, label: str | None = None,
                 tol: Tolerances = DEFAULT_TOLERANCES):
        zeta = complex(zeta)
        if abs(abs(zeta) - 1) >= tol.unit:
            raise DomainError(f"bump centre must be unimodular, got |zeta| = {abs(zeta)}")
        if k < 0 or int(k) != k:
            raise DomainError(f"bump exponent must be a nonnegative integer, got {k}")
        self.zeta = zeta
        self.k = int(k)
        self.label = label

    def __repr__(self):
        return f"BumpPower({self.zeta!r}, {self.k})"

    def _eval(self, z):
        return ((1.0 + self.zeta.conjugate() * z) / 2.0) ** self.k

    def as_polynomial(self):
        k = self.k
        j = np.arange(k + 1)
        logc = np.array([math.lgamma(k + 1) - math.lgamma(i + 1) - math.lgamma(k - i + 1)
                         for i in range(k + 1)]) - k * math.log(2.0)
        return np.exp(logc) * self.zeta.conjugate() ** j

    def features(self):
        if self.k == 0:
            return []
        # the peak at zeta has angular width about 1/sqrt(k)
        out = [Feature(self.zeta, 1.0 / math.sqrt(self.k), "peak")]
        out.append(Feature(-self.zeta, 0.0, "zero"))
        return out


class _Dilated(AnalyticFn):
    """``z -> f(rho z)``; internal, used by the density search."""

    def __init__(self, f: AnalyticFn, rho: float):
        self.f = f
        self.rho = rho

    def _eval(self, z):
        return self.f._eval(self.rho * z)

    def features(self):
        return [Feature(ft.point, ft.width + (1 - self.rho), "peak")
                for ft in self.f.features() if ft.kind != "zero"]


# --- operations -------------------------------------------------------------


def evaluate(f: AnalyticFn, z, tol: Tolerances = DEFAULT_TOLERANCES):
    if np.any(np.abs(np.asarray(z)) > 1 + tol.eval):
        raise DomainError("evaluation point outside the closed unit disk")
    return f(z)


def _mean_power(f: AnalyticFn, p: float, nodes: int, radius: float, refine: bool) -> float:
    feats = f.features() if refine else ()
    points, weights = quadrature.circle_rule(nodes, feats, p, radius, refine)
    values = np.abs(f._eval(radius * points)) ** p
    return float(np.dot(weights, values))


def hp_norm(f: AnalyticFn, spec: QuadratureSpec | None = None) -> float:
    """``(mean over the circle of |f|^p)^{1/p}`` at ``spec.radius``."""
    spec = spec or QuadratureSpec()
    return _mean_power(f, spec.p, spec.nodes, spec.radius, spec.refine) ** (1.0 / spec.p)


def hp_norm_selfcheck(f: AnalyticFn, spec: QuadratureSpec | None = None,
                      warn_above: float = 1e-6) -> tuple[float, float]:
    """Norm at ``N`` and its discrepancy against ``2N``; warns above ``warn_above``."""
    spec = spec or QuadratureSpec()
    value = hp_norm(f, spec)
    fine = hp_norm(f, spec.with_nodes(2 * spec.nodes))
    disc = abs(value - fine)
    if disc > warn_above:
        warnings.warn(f"quadrature discrepancy {disc:.3e} between N and 2N",
                      QuadratureWarning, stacklevel=2)
    return value, disc


def radial_means(f: AnalyticFn, p: float, radii, nodes: int = 4096) -> list[float]:
    """Integral means ``mean |f(r e^{it})|^p`` (no p-th root) for each radius."""
    radii = [float(r) for r in radii]
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be sorted ascending")
    out = []
    for r in radii:
        spec = QuadratureSpec(p, nodes, r)
        out.append(_mean_power(f, spec.p, spec.nodes, spec.radius, spec.refine))
    return out


def _pow2_at_least(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def taylor_coeffs(f: AnalyticFn, count: int, radius: float = 0.5,
                  nodes: int | None = None) -> CoeffVector:
    """First ``count`` Taylor coefficients by the discrete Cauchy formula."""
    if not (0 < radius < 1):
        raise DomainError(f"extraction radius must lie in (0, 1), got {radius}")
    if count < 1:
        raise DomainError("count must be positive")
    n = nodes or max(4096, _pow2_at_least(2 * count))
    if count > n // 2:
        raise DomainError(f"count {count} exceeds half the grid size {n}")
    theta = quadrature.TWO_PI * np.arange(n) / n
    spectrum = np.fft.fft(f._eval(radius * np.exp(1j * theta))) / n
    coeffs = spectrum[:count] * radius ** -np.arange(count, dtype=float)
    return CoeffVector(coeffs, float(radius))


def coeff_lq_partial(coeffs: CoeffVector, q: float) -> float:
    """``(sum |a_n|^q)^{1/q}`` over the stored coefficients."""
    if not q > 1:
        raise DomainError(f"q must exceed 1, got {q}")
    a = np.abs(np.asarray(coeffs.coefficients))
    return float(np.sum(a**q) ** (1.0 / q))


def conjugate_exponent(p: float) -> float:
    if not p > 1:
        raise DomainError("the conjugate exponent needs p > 1")
    return p / (p - 1)


def point_eval_bound(f: AnalyticFn, lam: complex, R: float,
                     spec: QuadratureSpec | None = None) -> tuple[float, float]:
    """``(||f||_p, (R - |lam|)/R * |f(lam)|)``; the first dominates the second."""
    lam = complex(lam)
    if not (abs(lam) < R < 1):
        raise DomainError(f"need |lambda| < R < 1, got |lambda|={abs(lam)}, R={R}")
    lhs = hp_norm(f, spec)
    rhs = (R - abs(lam)) / R * abs(f(lam))
    return lhs, rhs


def dilated_partial_sum(f: AnalyticFn, n0: int, rho: float) -> Polynomial:
    """``sum_{n <= n0} a_n rho^n z^n``."""
    if n0 < 0:
        raise DomainError("n0 must be nonnegative")
    if not (0 < rho <= 1):
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    poly = f.as_polynomial()
    if poly is not None:
        c = np.zeros(n0 + 1, dtype=complex)
        m = min(n0 + 1, poly.size)
        c[:m] = poly[:m]
        return Polynomial(c * rho ** np.arange(n0 + 1, dtype=float))
    if rho == 1:
        raise DomainError("rho = 1 needs a polynomial input")
    # coefficients of f(rho z) read off directly at radius rho; the grid grows
    # until the top quarter of the spectrum is negligible (aliasing control)
    n = max(4096, _pow2_at_least(4 * (n0 + 1)))
    while True:
        theta = quadrature.TWO_PI * np.arange(n) / n
        spec_ = np.fft.fft(f._eval(rho * np.exp(1j * theta))) / n
        top = np.max(np.abs(spec_[n // 2: 3 * n // 4]))
        if top <= 1e-17 * max(np.max(np.abs(spec_)), 1e-300) or n >= 1 << 22:
            break
        n *= 2
    return Polynomial(spec_[: n0 + 1])


@dataclass(frozen=True)
class DensityBudget:
    k_rho: int = 20
    k_n0: int = 14


def approximate_by_polynomial(f: AnalyticFn, p: float, eps: float,
                              spec: QuadratureSpec | None = None,
                              budget: DensityBudget = DensityBudget()
                              ) -> tuple[AnalyticFn, float]:
    """A dilated partial sum within ``eps`` of ``f`` in H^p.

    Follows the two-step density argument: first pick ``rho = 1 - 2^-k``
    with ``||f - f_rho|| < eps/2``, then ``n0 = 2^k`` with the partial sum
    of ``f_rho`` within ``eps/2``.  Polynomial inputs are returned as
    polynomials directly.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    spec = (spec or QuadratureSpec()).with_p(p)
    poly = f.as_polynomial()
    if poly is not None:
        g = Polynomial(poly)
        return g, hp_norm(f - g, spec)
    rho = None
    for k in range(1, budget.k_rho + 1):
        cand = 1.0 - 2.0**-k
        if hp_norm(f - _Dilated(f, cand), spec) < eps / 2:
            rho = cand
            break
    if rho is None:
        raise BudgetExhaustedError("no dilation radius reached eps/2")
    f_rho = _Dilated(f, rho)
    for k in range(0, budget.k_n0 + 1):
        n0 = 2**k
        g = dilated_partial_sum(f, n0, rho)
        if hp_norm(f_rho - g, spec) < eps / 2:
            err = hp_norm(f - g, spec)
            if err < eps:
                return g, err
    raise BudgetExhaustedError("no partial sum reached eps/2 within the degree budget")


approximate_by_dilated_partial_sum = approximate_by_polynomial


def bump(zeta: complex, k: int) -> BumpPower:
    return BumpPower(zeta, k)


def vanish_at(f: AnalyticFn, zeta: complex, k: int) -> AnalyticFn:
    """``f - f(zeta) * bump(zeta, k)``, which vanishes at ``zeta``."""
    b = BumpPower(zeta, k)
    fz = complex(f(complex(zeta)))
    if abs(fz) <= 1e-15:
        return f
    return Sum([(1.0, f), (-fz, b)], zeros=(zeta,))


def gn_family(z0: complex, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> Polynomial:
    """``z0 z^n - z^{n+1}``."""
    z0 = complex(z0)
    if abs(abs(z0) - 1) >= tol.unit:
        raise DomainError(f"z0 must be unimodular, got |z0| = {abs(z0)}")
    if n < 0:
        raise DomainError("n must be nonnegative")
    c = np.zeros(n + 2, dtype=complex)
    c[n] = z0
    c[n + 1] = -1.0
    return Polynomial(c, label=f"gn[{n}]")


def compose(f: AnalyticFn, psi) -> AnalyticFn:
    """``f o psi``, distributing over sums and merging powers of one map."""
    if isinstance(psi, PoweredMap) and psi.is_identity:
        return f
    if isinstance(f, Sum):
        return Sum([(w, compose(g, psi)) for w, g in f.terms], label=f.label,
                   zeros=_map_zeros(f.zeros, psi))
    if isinstance(f, ComposeMobius) and isinstance(psi, PoweredMap):
        merged = f.psi.then(psi) if isinstance(f.psi, PoweredMap) else None
        if merged is not None:
            if merged.is_identity:
                return f.inner
            return ComposeMobius(f.inner, merged, label=f.label, check=False)
    if isinstance(f, Polynomial) and f.degree == 0:
        return f
    return ComposeMobius(f, psi, label=f.label, check=isinstance(psi, MobiusMap))


def _map_zeros(zeros, psi):
    if not zeros:
        return ()
    inv = psi.inverse()
    out = []
    for z in zeros:
        w = complex(inv(complex(z)))
        if cmath.isfinite(w):
            out.append(w)
    return tuple(out)
