"""Quadrature rules for means over the unit circle.

The default is the composite trapezoid rule on ``N`` uniform nodes.  When
an integrand carries features narrower than a few grid spacings (the
compressed arc of ``f o psi`` near the repelling point of ``psi``, a pole
close to the circle) or a kink from a zero of ``f`` combined with a
non-even exponent, the trapezoid rule stalls.  Those cases switch to
composite Gauss-Legendre on a mesh graded towards each feature.  With no
such features the rule is exactly the trapezoid rule.

Near a feature, nodes are written ``c * exp(i t)`` with ``c`` the
feature's centre as a unit complex number and ``t`` a local offset.  An
absolute angle cannot resolve widths below the double spacing near
``pi`` (about 4e-16); the local offset can.

Rules return circle points (not angles) and weights normalised to sum
to 1, so ``weights @ g(points)`` is the mean of ``g`` over the circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
PANEL_ORDER = 16
RESOLVED_SPACINGS = 6.0
KINK_LEVELS = 20

_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_ORDER)


@dataclass(frozen=True)
class Feature:
    """A localised structure of an integrand on the circle.

    ``point`` is the unimodular centre.  ``kind`` is ``"peak"`` (smooth
    but of angular width ``width``) or ``"zero"`` (a zero of the function,
    a kink in ``|f|^p``; ``width`` is its distance from the circle, 0 for
    a zero on it).
    """

    point: complex
    width: float
    kind: str = "peak"

    @property
    def theta(self) -> float:
        return cmath.phase(self.point) % TWO_PI


def uniform_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.exp(2j * np.pi * np.arange(n) / n), np.full(n, 1.0 / n)


def _needs_kink_grading(p: float) -> bool:
    return not (float(p).is_integer() and int(p) % 2 == 0)


def active_features(features, n: int, p: float, radius: float = 1.0) -> list[Feature]:
    """Features the uniform ``n``-point rule cannot resolve."""
    spacing = TWO_PI / n
    out = []
    for ft in features:
        if not (cmath.isfinite(ft.point) and ft.point != 0):
            continue
        point = ft.point / abs(ft.point)
        if ft.kind == "zero":
            if radius == 1.0 and _needs_kink_grading(p):
                if ft.width == 0.0:
                    out.append(Feature(point, 0.0, "zero"))
                elif ft.width < RESOLVED_SPACINGS * spacing:
                    # a zero just off the circle is a rounded kink
                    out.append(Feature(point, ft.width, "peak"))
            continue
        width = max(ft.width, 1e-300) + (1.0 - radius)
        if width < RESOLVED_SPACINGS * spacing:
            out.append(Feature(point, width, "peak"))
    return out


def _local_offsets(ft: Feature, reach: float) -> np.ndarray:
    if ft.kind == "zero":
        offs = reach * 2.0 ** -np.arange(1, KINK_LEVELS + 1)
    else:
        w = ft.width
        geo = []
        s = 4.0 * w
        while s < reach:
            geo.append(s)
            s *= 2.0
        offs = np.concatenate((w * np.arange(1, 5) / 2.0, np.asarray(geo)))
    return np.concatenate(([0.0], offs, -offs))


def _gauss_panels(anchor: complex, bp: np.ndarray):
    bp = np.unique(bp)
    lo, hi = bp[:-1], bp[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    t = mid[:, None] + half[:, None] * _GL_X[None, :]
    w = half[:, None] * _GL_W[None, :]
    return (anchor * np.exp(1j * t)).ravel(), w.ravel() / TWO_PI


def _uniform_arc(start: float, length: float, panel: float):
    if length <= 0:
        return None
    k = max(int(math.ceil(length / panel - 1e-9)), 1)
    return _gauss_panels(1.0 + 0j, start + length * np.arange(k + 1) / k)


def graded_rule(features, n: int) -> tuple[np.ndarray, np.ndarray]:
    panels = max(n // PANEL_ORDER, 1)
    reach = TWO_PI / panels
    feats = sorted(features, key=lambda f: f.theta)

    # cluster features whose local zones would overlap
    clusters: list[list[Feature]] = []
    for ft in feats:
        if clusters:
            if abs(cmath.phase(ft.point / clusters[-1][-1].point)) < 2 * reach:
                clusters[-1].append(ft)
                continue
        clusters.append([ft])
    if len(clusters) > 1:
        first, last = clusters[0][0], clusters[-1][-1]
        if abs(cmath.phase(first.point / last.point)) < 2 * reach:
            clusters[0] = clusters.pop() + clusters[0]

    zones = []
    for cl in clusters:
        anchor = cl[0].point
        d = [cmath.phase(ft.point / anchor) for ft in cl]
        lo, hi = min(d) - reach, max(d) + reach
        pts = [np.array([lo, hi])]
        for ft, dj in zip(cl, d):
            pts.append(dj + _local_offsets(ft, reach))
        bp = np.concatenate(pts)
        bp = bp[(bp >= lo) & (bp <= hi)]
        zones.append((anchor, lo, hi, bp))

    total = sum(hi - lo for _, lo, hi, _ in zones)
    if total >= TWO_PI:
        # zones cover the circle; fall back to one anchor at 1
        pts = [TWO_PI * np.arange(panels + 1) / panels]
        for ft in feats:
            pts.append((ft.theta + _local_offsets(ft, reach)) % TWO_PI)
        bp = np.concatenate(pts + [np.array([0.0, TWO_PI])])
        return _gauss_panels(1.0 + 0j, bp)

    zs, ws = [], []
    starts = []
    for anchor, lo, hi, bp in zones:
        z, w = _gauss_panels(anchor, bp)
        zs.append(z)
        ws.append(w)
        a = cmath.phase(anchor) % TWO_PI
        starts.append(((a + lo) % TWO_PI, hi - lo))
    starts.sort()
    for (s0, len0), (s1, _) in zip(starts, starts[1:] + [(starts[0][0] + TWO_PI, 0.0)]):
        gap_start = s0 + len0
        arc = _uniform_arc(gap_start, s1 - gap_start, reach)
        if arc is not None:
            zs.append(arc[0])
            ws.append(arc[1])
    return np.concatenate(zs), np.concatenate(ws)


def circle_rule(n: int, features=(), p: float = 2.0, radius: float = 1.0,
                refine: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Unit-circle points and normalised weights for a mean at ``radius``.

    Callers scale the points by ``radius`` themselves.
    """
    if refine:
        act = active_features(features, n, p, radius)
        if act:
            return graded_rule(act, n)
    return uniform_rule(n)
