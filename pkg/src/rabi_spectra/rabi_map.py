"""Rabi-model parameters to confluent Heun parameters, local solutions, states.

With ``z = lambda (2y - 1)`` and ``psi1 = exp(2 lambda^2 y) v(y)`` the
Bargmann-space system::

    (z + lambda) psi1' = (E - lambda z) psi1 - mu psi2
    (z - lambda) psi2' = (E + lambda z) psi2 - mu psi1

reduces to a confluent Heun equation for ``v`` with ``alpha = 4 lambda^2``,
``beta = -x``, ``gamma = -1 - x``, ``delta = 2 lambda^2`` where
``x = E + lambda^2``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BlockedRecurrence, DegenerateMap, MuZero, NotEntire, SamplePointSingular
from .heun import (
    Center,
    EvalResult,
    FrobeniusSeries,
    HeunParams,
    evaluate,
    frobenius_series,
    series_derivatives,
)


@dataclass(frozen=True)
class RabiPoint:
    x: float
    lam: float
    mu: float

    @property
    def energy(self) -> float:
        return self.x - self.lam**2

    @classmethod
    def from_energy(cls, energy: float, lam: float, mu: float) -> RabiPoint:
        return cls(energy + lam**2, lam, mu)


def heun_arrays(x, lam, mu):
    """``(alpha, beta, gamma, delta, eta)`` as broadcast numpy arrays."""
    x = np.asarray(x, dtype=float)
    l2 = np.asarray(lam, dtype=float) ** 2
    m2 = np.asarray(mu, dtype=float) ** 2
    alpha = 4 * l2
    delta = 2 * l2
    eta = 0.5 * (1 + x + x * x) - m2 - 2 * l2 * (x + 1)
    return alpha, -x, -1 - x, delta, eta


def heun_params(pt: RabiPoint) -> HeunParams:
    return HeunParams(*(float(v) for v in heun_arrays(pt.x, pt.lam, pt.mu)))


class Tag(enum.Enum):
    A0 = "A0"
    A1 = "A1"
    C0 = "C0"
    C1 = "C1"


def transform(tag: Tag, alpha, beta, gamma, delta, eta):
    """Apply one of the four parameter maps elementwise."""
    if tag is Tag.A0:
        return alpha, beta, gamma, delta, eta
    if tag is Tag.A1:
        return -alpha, gamma, beta, -delta, delta + eta
    if tag is Tag.C0:
        return alpha, -beta, -gamma, delta, eta
    if tag is Tag.C1:
        return -alpha, -gamma, beta, -delta, delta + eta
    raise ValueError(tag)


@dataclass(frozen=True)
class ParamTuple:
    tag: Tag
    params: HeunParams


def param_tuple(pt: RabiPoint, tag: Tag) -> ParamTuple:
    p = heun_params(pt)
    return ParamTuple(tag, HeunParams(*transform(tag, *p.astuple())))


class Which(enum.Enum):
    H0 = "H0"
    H1 = "H1"
    V10 = "V10"
    V11 = "V11"


@dataclass(frozen=True)
class LocalSolution:
    """``y^pow_y (1-y)^pow_1my * series(y)``.

    ``(y - 1)^p`` is realized as ``(1 - y)^p``; the constant phase this drops
    does not affect zero sets or proportionality tests.
    """

    which: Which
    tuple: ParamTuple
    series: FrobeniusSeries
    pow_y: float = 0.0
    pow_1my: float = 0.0

    @property
    def center(self) -> Center:
        return self.series.center

    def evaluate(self, y: float) -> EvalResult:
        r = evaluate(self.series, y)
        val, der = r.value, r.derivative
        a, b = self.pow_y, self.pow_1my
        pref = y**a * (1 - y) ** b
        dpref = (a * y ** (a - 1) if a else 0.0) * (1 - y) ** b - (
            b * (1 - y) ** (b - 1) if b else 0.0
        ) * y**a
        return EvalResult(pref * val, pref * der + dpref * val, r.terms_used, abs(pref) * r.tail_estimate)


def local_solution(pt: RabiPoint, which: Which, n_max: int = 400) -> LocalSolution:
    """One of the four local solutions entering the spectral conditions.

    ``H0``/``H1`` are the exponent-0 solutions about ``y = 0``/``y = 1``
    (``HeunC(a0; y)`` and ``HeunC(a1; 1 - y)``); ``V10``/``V11`` carry the
    non-zero exponents ``x`` at ``y = 0`` and ``x + 1`` at ``y = 1``.
    Raises ``BlockedRecurrence`` when the requested series is degenerate.
    """
    p = heun_params(pt)
    if which is Which.H0:
        s = frobenius_series(p, Center.ZERO, 0.0, n_max)
        tup, pows = Tag.A0, (0.0, 0.0)
    elif which is Which.H1:
        s = frobenius_series(p, Center.ONE, 0.0, n_max)
        tup, pows = Tag.A1, (0.0, 0.0)
    elif which is Which.V10:
        s = frobenius_series(HeunParams(*transform(Tag.C0, *p.astuple())), Center.ZERO, 0.0, n_max)
        tup, pows = Tag.C0, (-p.beta, -p.gamma)
    else:
        # the u-equation in y whose reflection is c1
        u = HeunParams(p.alpha, p.beta, -p.gamma, p.delta, p.eta)
        s = frobenius_series(u, Center.ONE, 0.0, n_max)
        tup, pows = Tag.C1, (0.0, -p.gamma)
    if s.truncation_blocked_at is not None:
        raise BlockedRecurrence(s.truncation_blocked_at)
    return LocalSolution(which, param_tuple(pt, tup), s, *pows)


# -- wavefunctions -----------------------------------------------------------

# v(y) -> (v, v', v'') for complex y
VFunc = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


def polynomial_v(coeffs, exp_rate: float = 0.0) -> VFunc:
    """``exp(exp_rate * y) * sum c_k y^k`` with its first two derivatives."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
    d1, d2 = poly.deriv(1), poly.deriv(2)

    def v(y):
        y = np.asarray(y, dtype=complex)
        e = np.exp(exp_rate * y)
        p0, p1, p2 = poly(y), d1(y), d2(y)
        return (
            e * p0,
            e * (p1 + exp_rate * p0),
            e * (p2 + 2 * exp_rate * p1 + exp_rate**2 * p0),
        )

    v.entire = True
    return v


def local_v(sol: LocalSolution, verified: bool = False) -> VFunc:
    """Wrap a local solution with integer prefactor powers as a ``VFunc``.

    The result is only trusted as entire when ``verified`` is set, i.e. after
    the caller has matched it against the expansion about the other singular
    point.  Evaluation is limited to the disk of convergence.
    """
    a, b = sol.pow_y, sol.pow_1my
    if a != int(a) or b != int(b) or a < 0 or b < 0:
        raise NotEntire("prefactor powers must be non-negative integers")
    pref = np.polynomial.Polynomial([1.0])
    pref = pref * np.polynomial.Polynomial([0.0, 1.0]) ** int(a)
    pref = pref * np.polynomial.Polynomial([1.0, -1.0]) ** int(b)
    dp1, dp2 = pref.deriv(1), pref.deriv(2)

    def v(y):
        y = np.asarray(y, dtype=complex)
        s0, s1, s2 = series_derivatives(sol.series, y)
        q0, q1, q2 = pref(y), dp1(y), dp2(y)
        return q0 * s0, q1 * s0 + q0 * s1, q2 * s0 + 2 * q1 * s1 + q0 * s2

    v.entire = verified
    return v


@dataclass(frozen=True)
class BargmannState:
    """Two-component wavefunction in the Bargmann representation.

    ``normalizable`` is asserted, not computed: entire solutions of this
    system have growth order at most one.
    """

    psi1: Callable[[np.ndarray], np.ndarray]
    psi2: Callable[[np.ndarray], np.ndarray]
    dpsi1: Callable[[np.ndarray], np.ndarray]
    dpsi2: Callable[[np.ndarray], np.ndarray]
    energy: float
    lam: float
    mu: float
    normalizable: bool = True

    def scaled(self, factor: float) -> BargmannState:
        return BargmannState(
            lambda z: factor * self.psi1(z),
            lambda z: factor * self.psi2(z),
            lambda z: factor * self.dpsi1(z),
            lambda z: factor * self.dpsi2(z),
            self.energy,
            self.lam,
            self.mu,
            self.normalizable,
        )

    def with_psi2(self, psi2, dpsi2) -> BargmannState:
        return BargmannState(self.psi1, psi2, self.dpsi1, dpsi2, self.energy, self.lam, self.mu)


def wavefunction(pt: RabiPoint, v: VFunc) -> BargmannState:
    """Build ``(psi1, psi2)`` from an entire solution ``v`` of the Heun equation.

    ``psi2`` is recovered from the first line of the system, leaving the
    second line as an independent check.
    """
    lam, mu = pt.lam, pt.mu
    if lam == 0:
        raise DegenerateMap("z = lambda (2y - 1) needs lambda != 0")
    if mu == 0:
        raise MuZero("mu = 0 decouples the system; use the analytic branch")
    if not getattr(v, "entire", False):
        raise NotEntire("v must be a polynomial or a verified entire solution")
    energy = pt.energy
    l2 = lam * lam

    def parts(z):
        z = np.asarray(z, dtype=complex)
        y = (z / lam + 1) / 2
        f, f1, f2 = v(y)
        e = np.exp(2 * l2 * y)
        # d/dz = (1 / 2 lam) d/dy
        p1 = e * f
        dp1 = e * (2 * l2 * f + f1) / (2 * lam)
        ddp1 = e * (4 * l2 * l2 * f + 4 * l2 * f1 + f2) / (4 * l2)
        return z, p1, dp1, ddp1

    def psi1(z):
        return parts(z)[1]

    def dpsi1(z):
        return parts(z)[2]

    def psi2(z):
        z, p1, dp1, _ = parts(z)
        return ((energy - lam * z) * p1 - (z + lam) * dp1) / mu

    def dpsi2(z):
        z, p1, dp1, ddp1 = parts(z)
        return (-lam * p1 + (energy - lam * z) * dp1 - dp1 - (z + lam) * ddp1) / mu

    return BargmannState(psi1, psi2, dpsi1, dpsi2, energy, lam, mu)


def residual(state: BargmannState, sample_zs) -> float:
    """Largest normalized defect of both equations of the system over samples."""
    zs = np.atleast_1d(np.asarray(sample_zs, dtype=complex))
    lam, mu, energy = state.lam, state.mu, state.energy
    if np.any(np.isclose(zs, lam, rtol=0, atol=1e-12)) or np.any(
        np.isclose(zs, -lam, rtol=0, atol=1e-12)
    ):
        raise SamplePointSingular("sample point at z = +-lambda")
    p1, p2 = state.psi1(zs), state.psi2(zs)
    d1, d2 = state.dpsi1(zs), state.dpsi2(zs)
    eq1 = (zs + lam) * d1 - (energy - lam * zs) * p1 + mu * p2
    eq2 = (zs - lam) * d2 - (energy + lam * zs) * p2 + mu * p1
    scale1 = np.abs((zs + lam) * d1) + np.abs((energy - lam * zs) * p1) + np.abs(mu * p2)
    scale2 = np.abs((zs - lam) * d2) + np.abs((energy + lam * zs) * p2) + np.abs(mu * p1)
    tiny = np.finfo(float).tiny
    r = np.maximum(np.abs(eq1) / np.maximum(scale1, tiny), np.abs(eq2) / np.maximum(scale2, tiny))
    return float(np.max(r))
