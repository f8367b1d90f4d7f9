import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from rabi_spectra.errors import BlockedRecurrence, NotTruncated, OutsideDisk, WrongBeta
from rabi_spectra.heun import (
    Center,
    HeunParams,
    evaluate,
    frobenius_series,
    heun_local_at,
    polynomial_solution,
    theta_xi_from_accessory,
    truncation_numerator,
)
from rabi_spectra.rabi_map import RabiPoint, heun_params

# value of the exponent-0 solution about 0 at y = 1/2 for (x, lambda, mu) = (0.5, 0.5, 1)
H0_HALF = -0.06559736535490122
DH0_HALF = -1.032651882948306


def P(alpha, beta, gamma, delta, eta):
    return HeunParams(alpha, beta, gamma, delta, eta)


def ode_residual(p: HeunParams, v, dv, ddv, y):
    """``y (y - 1)`` times the left side of the equation."""
    return (
        y * (y - 1) * ddv
        + (p.alpha * y * (y - 1) + (p.beta + 1) * (y - 1) + (p.gamma + 1) * y) * dv
        + (p.theta * (y - 1) + p.xi * y) * v
    )


def poly_parts(coeffs, t):
    poly = np.polynomial.Polynomial(coeffs)
    return poly(t), poly.deriv(1)(t), poly.deriv(2)(t)


@pytest.mark.parametrize(
    "args, expected",
    [
        ((1, -0.5, -1.5, 0.5, -0.875), (1.75, -1.25)),
        ((0, 0, 0, 0, 0), (0.0, 0.0)),
    ],
)
def test_theta_xi_examples(args, expected):
    th, xi = theta_xi_from_accessory(*args)
    assert th == pytest.approx(expected[0], abs=1e-15)
    assert xi == pytest.approx(expected[1], abs=1e-15)


def test_theta_xi_vanish_on_first_judd_ellipse():
    p = heun_params(RabiPoint(1.0, 0.4, 0.6))
    assert abs(p.theta) < 1e-15 and abs(p.xi) < 1e-15


def test_theta_xi_vectorized_matches_scalar():
    rng = np.random.default_rng(0)
    arrs = rng.normal(size=(5, 50))
    th, xi = theta_xi_from_accessory(*arrs)
    for i in range(50):
        p = HeunParams(*arrs[:, i])
        assert th[i] == p.theta and xi[i] == p.xi


def test_first_coefficients():
    s = frobenius_series(heun_params(RabiPoint(0.5, 0.5, 1.0)), Center.ZERO, 0.0)
    assert s.coeffs[0] == 1.0
    assert s.coeffs[1] == pytest.approx(-3.5, abs=1e-14)
    assert s.coeffs[2] == pytest.approx(3.375, abs=1e-14)


def test_partial_sums_start_as_expected():
    s = frobenius_series(heun_params(RabiPoint(0.5, 0.5, 1.0)))
    terms = s.coeffs[:3] * 0.5 ** np.arange(3)
    assert terms.tolist() == pytest.approx([1, -1.75, 0.84375], abs=1e-14)


def test_blocked_at_first_step_for_x_one():
    s = frobenius_series(heun_params(RabiPoint(1.0, 0.3, 0.8)))
    assert s.truncation_blocked_at == 1
    assert not s.converged


@pytest.mark.parametrize("n", range(1, 8))
def test_blocked_exactly_at_n(n):
    s = frobenius_series(P(0.7, -n, 0.3, 0.1, 0.2))
    assert s.truncation_blocked_at == n
    assert len(s.coeffs) == n


@pytest.mark.parametrize("beta", [-0.5, -2.3, 0.0, 1.7, -6.999])
def test_never_blocked_for_noninteger_or_nonnegative_beta(beta):
    s = frobenius_series(P(0.7, beta, 0.3, 0.1, 0.2), n_max=300)
    assert s.truncation_blocked_at is None


def test_bad_exponent_rejected():
    with pytest.raises(ValueError):
        frobenius_series(P(1, -0.5, -1.5, 0.5, -0.875), exponent=0.3)


def test_evaluate_at_center_is_one():
    p = heun_params(RabiPoint(0.5, 0.5, 1.0))
    assert evaluate(frobenius_series(p), 0.0).value == 1.0
    assert evaluate(frobenius_series(p, Center.ONE), 1.0).value == 1.0


def test_outside_disk():
    s = frobenius_series(heun_params(RabiPoint(0.5, 0.5, 1.0)))
    with pytest.raises(OutsideDisk):
        evaluate(s, 1.2)
    with pytest.raises(OutsideDisk):
        evaluate(frobenius_series(s.params, Center.ONE), -0.2)


def test_blocked_series_refuses_to_evaluate():
    s = frobenius_series(heun_params(RabiPoint(3.0, 0.1, 0.5)))
    with pytest.raises(BlockedRecurrence):
        evaluate(s, 0.5)


def test_frozen_value_at_half():
    r = evaluate(frobenius_series(heun_params(RabiPoint(0.5, 0.5, 1.0)), n_max=200), 0.5)
    assert r.value == pytest.approx(H0_HALF, rel=1e-13)
    assert r.derivative == pytest.approx(DH0_HALF, rel=1e-13)
    assert r.tail_estimate >= 0
    assert r.terms_used < 60  # geometric at rate ~1/2


def test_value_matches_direct_integration():
    p = heun_params(RabiPoint(0.5, 0.5, 1.0))
    s = frobenius_series(p, n_max=200)
    y0 = 1e-6
    r0 = evaluate(s, y0)

    def rhs(y, u):
        v, dv = u
        ddv = -((p.alpha + (p.beta + 1) / y + (p.gamma + 1) / (y - 1)) * dv + (p.theta / y + p.xi / (y - 1)) * v)
        return [dv, ddv]

    sol = solve_ivp(rhs, (y0, 0.5), [r0.value, r0.derivative], rtol=1e-12, atol=1e-14, method="DOP853")
    assert sol.y[0, -1] == pytest.approx(H0_HALF, rel=1e-8)
    assert sol.y[1, -1] == pytest.approx(DH0_HALF, rel=1e-8)


@pytest.mark.parametrize("center", [Center.ZERO, Center.ONE])
def test_residual_shrinks_with_more_terms(center):
    p = heun_params(RabiPoint(0.37, 0.6, 1.3))
    s = frobenius_series(p, center, 0.0, n_max=60)
    t = 0.1
    y = t if center is Center.ZERO else 1 - t
    sign = 1 if center is Center.ZERO else -1
    res = []
    for N in range(6, 30, 4):
        v, d1, d2 = poly_parts(s.coeffs[:N], t)
        res.append(abs(ode_residual(p, v, sign * d1, d2, y)))
    for a, b in zip(res, res[1:]):
        assert b <= a / 10 or b < 1e-14  # until roundoff takes over


def test_nonzero_exponent_solution_solves_equation():
    p = P(0.9, -0.4, 0.6, 0.2, -0.3)
    s = frobenius_series(p, Center.ZERO, exponent=0.4)
    for y in (0.2, 0.5):
        h = 1e-4
        f = [evaluate(s, y + k * h).value for k in (-1, 0, 1)]
        r = evaluate(s, y)
        ddv = (f[0] - 2 * f[1] + f[2]) / h**2
        assert abs(ode_residual(p, r.value, r.derivative, ddv, y)) < 1e-6


@pytest.mark.parametrize("center", [Center.ZERO, Center.ONE])
@pytest.mark.parametrize("y", [0.3, 0.5, 0.7])
def test_derivative_matches_finite_difference(center, y):
    s = frobenius_series(heun_params(RabiPoint(2.3, 0.8, 1.7)), center)
    h = 1e-6
    fd = (evaluate(s, y + h).value - evaluate(s, y - h).value) / (2 * h)
    d = evaluate(s, y).derivative
    assert abs(fd - d) <= 1e-6 * max(abs(d), 1e-3)


def test_vectorized_local_matches_series_evaluation():
    rng = np.random.default_rng(4)
    xs, lams, mus = rng.uniform(-1, 6, 40), rng.uniform(0.05, 1.2, 40), rng.uniform(0.1, 5, 40)
    xs = np.where(np.abs(xs - np.round(xs)) < 1e-3, xs + 0.01, xs)
    ps = [heun_params(RabiPoint(x, l, m)) for x, l, m in zip(xs, lams, mus)]
    cols = [np.array([getattr(p, k) for p in ps]) for k in ("alpha", "beta", "gamma", "theta", "xi")]
    val, dval, ok = heun_local_at(*cols, 0.5)
    assert ok.all()
    for i, p in enumerate(ps):
        r = evaluate(frobenius_series(p, n_max=600), 0.5)
        assert val[i] == pytest.approx(r.value, rel=1e-11, abs=1e-13)
        assert dval[i] == pytest.approx(r.derivative, rel=1e-11, abs=1e-13)


def test_scalar_and_array_paths_are_bit_identical():
    rng = np.random.default_rng(5)
    a, b, g, th, xi = (rng.uniform(-3, 3, 30) for _ in range(5))
    t = rng.uniform(0, 0.6, 30)
    V, D, O = heun_local_at(a, b + 0.123, g, th, xi, t)
    for i in range(30):
        v, d, o = heun_local_at(a[i], b[i] + 0.123, g[i], th[i], xi[i], t[i])
        assert (v, d, o) == (V[i], D[i], O[i])


def test_blocked_array_entries_are_nan():
    val, _, ok = heun_local_at(1.0, np.array([-2.0, -2.5]), 0.3, 0.1, 0.2, 0.5)
    assert not ok[0] and math.isnan(val[0])
    assert ok[1]


def test_rescaling_preserves_coefficients():
    # coefficients grow like alpha^k / k!, past the rescale threshold
    p = P(400.0, -0.5, -1.5, 0.5, -0.875)
    s = frobenius_series(p, n_max=600)
    assert s.log_scale > 0
    plain = [0.0, 1.0]
    for k in range(600):
        den = (k + 1) * (k + p.beta + 1)
        a = k * (k - 1) + k * (p.beta + p.gamma + 2 - p.alpha) - p.theta
        b = p.alpha * (k - 1) + p.theta + p.xi
        plain.append((a * plain[-1] + b * plain[-2]) / den)
    plain = np.array(plain[1:])
    got = s.coeffs * math.exp(s.log_scale)
    np.testing.assert_allclose(got, plain, rtol=1e-10, atol=1e-12 * np.abs(plain).max())


@pytest.mark.parametrize("lam, mu", [(0.4, 0.6), (0.1, 1.7), (0.9, 0.3)])
def test_truncation_numerator_n1(lam, mu):
    L, _ = truncation_numerator(heun_params(RabiPoint(1.0, lam, mu)), 1)
    assert L == pytest.approx(-(4 * lam**2 + mu**2 - 1), abs=1e-14)


@pytest.mark.parametrize("lam, mu", [(0.3, 1.1), (0.0, 1.5), (0.7, 0.2)])
def test_truncation_numerator_n2(lam, mu):
    L, _ = truncation_numerator(heun_params(RabiPoint(2.0, lam, mu)), 2)
    l2, m2 = lam * lam, mu * mu
    expected = (4 * l2 + m2 - 4) * (1 - 8 * l2 - m2) - 4 * l2
    assert L == pytest.approx(expected, abs=1e-13)


def test_truncation_numerator_needs_matching_beta():
    with pytest.raises(WrongBeta):
        truncation_numerator(heun_params(RabiPoint(2.5, 0.3, 1.0)), 2)


def test_polynomial_solution_degree_zero():
    q = polynomial_solution(heun_params(RabiPoint(1.0, 0.4, 0.6)), 1)
    assert q.tolist() == [1.0]


def test_polynomial_solution_degree_one():
    from scipy.optimize import brentq

    lam = 0.3

    def L2(mu):
        return truncation_numerator(heun_params(RabiPoint(2.0, lam, mu)), 2)[0]

    mu = brentq(L2, 0.5, 1.5, xtol=1e-15)
    p = heun_params(RabiPoint(2.0, lam, mu))
    q = polynomial_solution(p, 2)
    assert q[0] == 1.0
    assert q[1] == pytest.approx(4 * lam**2 + mu**2 - 4, rel=1e-12)
    for y in (0.2, 0.9, 1.7):
        v, d1, d2 = poly_parts(q, y)
        assert abs(ode_residual(p, v, d1, d2, y)) < 1e-10


def test_polynomial_solution_off_the_set():
    with pytest.raises(NotTruncated):
        polynomial_solution(heun_params(RabiPoint(1.0, 0.4, 0.7)), 1)


def test_reflection_is_an_involution():
    p = P(0.3, -1.2, 2.5, 0.7, -0.4)
    assert p.reflected().reflected() == p
