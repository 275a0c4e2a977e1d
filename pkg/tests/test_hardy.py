from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compdyn import hardy
from compdyn.errors import BudgetExhaustedError, DomainError, InvalidAutomorphismError
from compdyn.hardy import (
    BumpPower,
    CoeffVector,
    ComposeMobius,
    Polynomial,
    QuadratureSpec,
    Reciprocal1mCz,
    Sum,
    approximate_by_polynomial,
    bump,
    coeff_lq_partial,
    dilated_partial_sum,
    evaluate,
    gn_family,
    hp_norm,
    hp_norm_selfcheck,
    point_eval_bound,
    radial_means,
    taylor_coeffs,
    vanish_at,
)
from compdyn.mobius import MobiusMap, NormalForm

from conftest import hyperbolic_example

HYP = hyperbolic_example()
P_VALUES = (1.0, 1.5, 2.0, 3.0, 4.0)


def spec(p=2.0, nodes=4096, radius=1.0):
    return QuadratureSpec(p, nodes, radius)


# --- types ------------------------------------------------------------------


@pytest.mark.parametrize("kw", [dict(p=0.5), dict(nodes=100), dict(nodes=32), dict(radius=0), dict(radius=1.1)])
def test_quadrature_spec_validation(kw):
    with pytest.raises(DomainError):
        QuadratureSpec(**kw)


def test_node_constraints():
    with pytest.raises(DomainError):
        Reciprocal1mCz(1.0)
    with pytest.raises(DomainError):
        BumpPower(0.5, 3)
    with pytest.raises(DomainError):
        BumpPower(1, -1)
    with pytest.raises(InvalidAutomorphismError):
        ComposeMobius(Polynomial([0, 1]), MobiusMap(2, 0, 0, 1))


def test_operator_overloads():
    f = Polynomial([1, 2])
    g = 3 * f - 1 + Polynomial([0, 0, 1])
    z = 0.3 + 0.4j
    assert g(z) == pytest.approx(3 * (1 + 2 * z) - 1 + z * z)
    assert (-f)(z) == pytest.approx(-(1 + 2 * z))
    np.testing.assert_allclose(g.as_polynomial(), [2, 6, 1])


# --- evaluate ----------------------------------------------------------------


def test_evaluate_examples():
    assert evaluate(Polynomial([1, 1]), 0) == 1
    assert evaluate(BumpPower(1, 3), 1) == 1
    assert evaluate(ComposeMobius(Polynomial([0, 1]), HYP), 0) == pytest.approx(0.5)


def test_evaluate_rejects_points_outside_disk():
    with pytest.raises(DomainError):
        evaluate(Polynomial([1]), 1.01)
    evaluate(Polynomial([1]), 1 + 1e-13)


def test_evaluate_vectorised():
    z = np.array([0, 0.5, 1j])
    np.testing.assert_allclose(Polynomial([1, 1])(z), 1 + z)


# --- hp_norm -----------------------------------------------------------------


@pytest.mark.parametrize("p", P_VALUES)
@pytest.mark.parametrize("n", [0, 1, 5, 10])
def test_monomials_have_norm_one(p, n):
    c = np.zeros(n + 1)
    c[n] = 1
    assert abs(hp_norm(Polynomial(c), spec(p)) - 1) < 1e-12


def test_one_plus_z_norms():
    f = Polynomial([1, 1])
    assert abs(hp_norm(f, spec(2)) - math.sqrt(2)) < 1e-10
    assert abs(hp_norm(f, spec(4)) - 6**0.25) < 1e-8
    # |1 + e^{it}| = 2|cos(t/2)|: means 4/pi (p=1) and 32/(3 pi) (p=3)
    assert abs(hp_norm(f, spec(1)) - 4 / math.pi) < 1e-12
    assert abs(hp_norm(f, spec(3)) - (32 / (3 * math.pi)) ** (1 / 3)) < 1e-12


def test_kink_grading_recovers_accuracy_at_small_n():
    f = Polynomial([1, 1])
    coarse = hp_norm(f, QuadratureSpec(1, 64, refine=False))
    graded = hp_norm(f, QuadratureSpec(1, 64))
    assert abs(graded - 4 / math.pi) < 1e-12
    assert abs(coarse - 4 / math.pi) > 1e-6


@pytest.mark.parametrize("c", [0.5, 0.99, 0.9999 * cmath.exp(1j), 1 - 1e-8])
def test_pole_near_circle_norm(c):
    # Parseval: sum |c|^{2n} = 1 / (1 - |c|^2)
    exact = 1 / math.sqrt(1 - abs(c) ** 2)
    # circle points next to the pole direction carry absolute error ~1e-16,
    # i.e. relative error ~1e-16/(1-|c|) in 1 - c z
    assert abs(hp_norm(Reciprocal1mCz(c)) / exact - 1) < 1e-11 + 1e-17 / (1 - abs(c))


# frozen from the closed form 2 sqrt(lam^n / (1 + lam^n)), lam = 1/3, which
# follows from ||1 - psi||_2^2 = 2 - 2 Re psi^{-1}(0) for automorphisms psi
ORBIT_ORACLE = {
    0: 1.4142135623730951,
    1: 1.0,
    2: 0.63245553203367588,
    4: 0.22086305214969307,
    8: 0.024689476563338773,
    15: 5.279837668690994e-04,
    30: 1.393834387525122e-07,
    60: 9.713871499237706e-15,
}


@pytest.mark.parametrize("n", sorted(ORBIT_ORACLE))
def test_orbit_norm_against_closed_form(n):
    lam = 1 / 3
    assert ORBIT_ORACLE[n] == pytest.approx(2 * math.sqrt(lam**n / (1 + lam**n)), rel=1e-15)
    f = hardy.compose(Polynomial([1, -1]), NormalForm(HYP).power(n))
    got = hp_norm(f)
    # relative accuracy degrades to ~1e-9 where the arc is 1e-8 wide;
    # the absolute floor is evaluation roundoff of 1 - psi near psi = 1
    assert abs(got - ORBIT_ORACLE[n]) < 1e-9 * ORBIT_ORACLE[n] + 1e-16


def test_selfcheck_reports_discrepancy():
    v, d = hp_norm_selfcheck(Polynomial([1, 1]), spec(2, 1024))
    assert abs(v - math.sqrt(2)) < 1e-12 and d < 1e-12


# --- radial means -----------------------------------------------------------


def test_radial_means_examples():
    assert radial_means(Polynomial([1]), 2, [0.1, 0.5, 1]) == pytest.approx([1, 1, 1])
    got = radial_means(Polynomial([0, 1]), 2, [0.5, 0.9, 1.0])
    assert got == pytest.approx([0.25, 0.81, 1.0], abs=1e-14)
    f = Reciprocal1mCz(0.5)
    rs = [0.5, 0.99, 1.0]
    got = radial_means(f, 2, rs)
    assert got == pytest.approx([1 / (1 - r * r / 4) for r in rs], abs=1e-12)
    assert got[-1] == pytest.approx(4 / 3)
    with pytest.raises(DomainError):
        radial_means(f, 2, [0.9, 0.5])


# --- coefficients ------------------------------------------------------------


def test_taylor_coeffs_examples():
    c = taylor_coeffs(Polynomial([0, 0, 5]), 3)
    assert isinstance(c, CoeffVector) and c.radius == 0.5
    np.testing.assert_allclose(c.coefficients, [0, 0, 5], atol=1e-13)
    c = taylor_coeffs(Polynomial([1, 3, 3, 1]), 4, 0.5)
    np.testing.assert_allclose(c.coefficients, [1, 3, 3, 1], atol=1e-12)
    c = taylor_coeffs(Reciprocal1mCz(0.5), 4, 0.5)
    np.testing.assert_allclose(c.coefficients, [1, 0.5, 0.25, 0.125], atol=1e-10)
    with pytest.raises(DomainError):
        taylor_coeffs(Polynomial([1]), 3, 1.0)
    with pytest.raises(DomainError):
        taylor_coeffs(Polynomial([1]), 100, 0.5, nodes=128)


def test_coeff_lq_partial_examples():
    assert coeff_lq_partial(CoeffVector(np.array([1, 0, 0]), 0.5), 2) == 1
    v = CoeffVector(np.array([1, 0.5, 0.25, 0.125]), 0.5)
    assert coeff_lq_partial(v, 2) == pytest.approx(math.sqrt(85 / 64))
    assert coeff_lq_partial(CoeffVector(np.zeros(5), 0.5), 3) == 0
    with pytest.raises(DomainError):
        coeff_lq_partial(v, 1)


def test_coeff_lq_partial_is_monotone_in_length():
    a = taylor_coeffs(Reciprocal1mCz(0.8), 40, 0.5).coefficients
    q = hardy.conjugate_exponent(1.5)
    vals = [coeff_lq_partial(CoeffVector(a[:m], 0.5), q) for m in range(1, 41)]
    assert all(b >= a_ - 1e-15 for a_, b in zip(vals, vals[1:]))
    assert q == pytest.approx(3)


# --- point evaluation bound -------------------------------------------------


def test_point_eval_bound_examples():
    lhs, rhs = point_eval_bound(Polynomial([1]), 0, 0.5)
    assert lhs == pytest.approx(1) and rhs == pytest.approx(1)
    lhs, rhs = point_eval_bound(Polynomial([0, 1]), 0, 0.9)
    assert (lhs, rhs) == (pytest.approx(1), 0)
    lhs, rhs = point_eval_bound(Polynomial([1, 1]), 0.3, 0.8)
    assert lhs == pytest.approx(math.sqrt(2)) and rhs == pytest.approx(0.8125)
    with pytest.raises(DomainError):
        point_eval_bound(Polynomial([1]), 0.5, 0.4)
    with pytest.raises(DomainError):
        point_eval_bound(Polynomial([1]), 0.5, 1.0)


# --- density ----------------------------------------------------------------


def test_dilated_partial_sum_examples():
    f = Reciprocal1mCz(0.3 + 0.1j)
    np.testing.assert_allclose(dilated_partial_sum(f, 0, 0.7).coeffs, [1], atol=1e-15)
    np.testing.assert_allclose(dilated_partial_sum(Polynomial([1, 1]), 1, 0.5).coeffs, [1, 0.5])
    np.testing.assert_allclose(dilated_partial_sum(Reciprocal1mCz(0.5), 2, 0.9).coeffs,
                               [1, 0.45, 0.2025], atol=1e-14)


def test_approximate_polynomial_input_is_exact():
    f = Polynomial([1, -2, 0.5j])
    g, err = approximate_by_polynomial(f, 2, 1e-6)
    assert err < 1e-12
    g, err = approximate_by_polynomial(BumpPower(1, 8), 1, 1e-2)
    assert err < 1e-12


@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_approximate_geometric(p):
    f = Reciprocal1mCz(0.5)
    g, err = approximate_by_polynomial(f, p, 1e-3)
    assert err < 1e-3
    # p = 2 cross-check from the coefficients: ||f - g||^2 = sum |a_n - b_n|^2
    if p == 2:
        b = g.coeffs
        n = np.arange(b.size)
        head = np.sum(np.abs(0.5**n - b) ** 2)
        tail = 0.25 ** b.size / (1 - 0.25)
        assert math.sqrt(head + tail) == pytest.approx(err, rel=1e-6)


def test_approximate_budget_exhaustion():
    with pytest.raises(BudgetExhaustedError):
        approximate_by_polynomial(Reciprocal1mCz(0.5), 2, 1e-3, budget=hardy.DensityBudget(k_rho=3))
    with pytest.raises(DomainError):
        approximate_by_polynomial(Reciprocal1mCz(0.5), 2, 0)


# --- bumps and projections -------------------------------------------------


def test_bump_examples():
    b0 = bump(1, 0)
    assert b0(0.3) == 1 and hp_norm(b0) == pytest.approx(1)
    assert hp_norm(bump(1, 2)) ** 2 == pytest.approx(3 / 8, abs=1e-14)
    assert hp_norm(bump(1, 40)) < 0.3
    assert bump(1j, 7)(1j) == 1
    with pytest.raises(DomainError):
        bump(0.9, 3)


@pytest.mark.parametrize("k", [1, 3, 10, 64, 1000])
def test_bump_l2_norm_matches_central_binomial(k):
    # Parseval on the binomial coefficients C(k, j) / 2^k
    exact = math.exp(0.5 * (math.lgamma(2 * k + 1) - 2 * math.lgamma(k + 1) - 2 * k * math.log(2)))
    assert hp_norm(bump(cmath.exp(0.7j), k)) == pytest.approx(exact, rel=1e-11)


@pytest.mark.parametrize("p", [1, 2, 4])
def test_bump_norms_decrease(p):
    s = spec(p)
    norms = [hp_norm(bump(1, k), s) for k in range(0, 16 * p + 8)]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert all(v < 0.5 for v in norms[16 * p:])


def test_vanish_at_examples():
    f = Polynomial([1, 1])
    assert vanish_at(f, -1, 5) is f
    g = vanish_at(Polynomial([1]), 1, 1)
    z = np.array([0, 0.5, -1, 1j])
    np.testing.assert_allclose(g(z), (1 - z) / 2, atol=1e-15)
    assert g(1) == 0
    h = vanish_at(Reciprocal1mCz(0.3), 1j, 12)
    assert abs(h(1j)) < 1e-12
    for k in (4, 32, 256):
        d = hp_norm(vanish_at(Reciprocal1mCz(0.3), 1j, k) - Reciprocal1mCz(0.3))
        assert d == pytest.approx(abs(Reciprocal1mCz(0.3)(1j)) * hp_norm(bump(1j, k)), rel=1e-10)


def test_gn_family_examples():
    np.testing.assert_allclose(gn_family(1, 0).coeffs, [1, -1])
    g = gn_family(1j, 1)
    assert g(1j) == 0
    assert g(0.5) == pytest.approx(0.5j - 0.25)
    assert hp_norm(gn_family(1, 3)) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(DomainError):
        gn_family(0.5, 1)


# --- compose ----------------------------------------------------------------


def test_compose_merges_powers_and_distributes():
    nf = NormalForm(HYP)
    f = Polynomial([1, 2]) + Reciprocal1mCz(0.4)
    h = hardy.compose(hardy.compose(f, nf.power(3)), nf.power(-3))
    z = np.exp(1j * np.linspace(0, 6, 9))
    np.testing.assert_allclose(h(z), f(z), atol=1e-15)
    assert isinstance(h, Sum)
    assert all(not isinstance(t, ComposeMobius) for _, t in h.terms)


def test_compose_with_plain_matrix():
    g = hardy.compose(Polynomial([1, -1]), HYP)
    z = 0.8 * np.exp(1j * np.linspace(0, 6, 64))
    np.testing.assert_allclose(g(z), (1 - z) / (2 + z), atol=1e-12)


# --- properties -------------------------------------------------------------

coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
polys = st.lists(coef, min_size=1, max_size=8).map(Polynomial)
geoms = st.complex_numbers(max_magnitude=0.95, allow_nan=False).map(Reciprocal1mCz)
fns = st.one_of(polys, geoms)
p_st = st.sampled_from(P_VALUES)


@settings(max_examples=60, deadline=None)
@given(fns, coef, p_st)
def test_homogeneity(f, alpha, p):
    s = spec(p, 1024)
    assert abs(hp_norm(alpha * f, s) - abs(alpha) * hp_norm(f, s)) < 1e-10 * max(1, abs(alpha) * hp_norm(f, s))


@settings(max_examples=60, deadline=None)
@given(fns, fns, p_st)
def test_triangle_inequality(f, g, p):
    s = spec(p, 1024)
    assert hp_norm(f + g, s) <= hp_norm(f, s) + hp_norm(g, s) + 1e-9


@settings(max_examples=100, deadline=None)
@given(polys)
def test_parseval(f):
    assert abs(hp_norm(f) ** 2 - np.sum(np.abs(f.coeffs) ** 2)) < 1e-10 * max(1, np.sum(np.abs(f.coeffs) ** 2))


@settings(max_examples=100, deadline=None)
@given(fns, p_st)
def test_radial_means_nondecreasing(f, p):
    m = radial_means(f, p, [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0], nodes=1024)
    assert all(b >= a - 1e-10 * max(1, a) for a, b in zip(m, m[1:]))


@settings(max_examples=60, deadline=None)
@given(fns, p_st)
def test_quadrature_converges(f, p):
    assert abs(hp_norm(f, spec(p, 1024)) - hp_norm(f, spec(p, 2048))) < 1e-8 * max(1, hp_norm(f, spec(p, 2048)))


@settings(max_examples=100, deadline=None)
@given(st.lists(coef, min_size=1, max_size=7), st.floats(0.25, 0.75))
def test_taylor_roundtrip(c, r):
    got = taylor_coeffs(Polynomial(c), len(c) + 2, r).coefficients
    np.testing.assert_allclose(got, list(c) + [0, 0], atol=1e-11)


@settings(max_examples=200, deadline=None)
@given(fns, st.complex_numbers(max_magnitude=0.98, allow_nan=False), st.floats(0.01, 0.99), p_st)
def test_point_eval_bound_property(f, lam, t, p):
    R = abs(lam) + t * (1 - abs(lam))
    if not abs(lam) < R < 1:
        return
    lhs, rhs = point_eval_bound(f, lam, R, spec(p, 1024))
    assert lhs >= rhs - 1e-9
