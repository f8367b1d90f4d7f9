"""Scalar conditions whose zero sets make up the spectral set.

* ``wronskian_W`` -- non-integer ``x``: the exponent-0 solutions about
  ``y = 0`` and ``y = 1`` must be proportional.
* ``judd_condition`` -- integer ``x = n``: the exponent-0 solution about
  ``y = 0`` is free of logarithms (polynomial truncation, degenerate pair).
* ``new_state_condition_F`` -- integer ``x = n``: the non-zero-exponent
  solutions about both points must be proportional (single states).

Every condition has an ``*_array`` twin that evaluates on numpy grids.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegerX, LambdaZero, MuZero, NotOnJuddSet, Unclassifiable
from .heun import (
    HeunParams,
    heun_local_at,
    theta_xi_from_accessory,
    polynomial_solution,
    truncated_polynomial,
    truncation_numerator,
)
from .rabi_map import (
    BargmannState,
    RabiPoint,
    Tag,
    Which,
    heun_arrays,
    heun_params,
    local_solution,
    polynomial_v,
    transform,
    wavefunction,
)

EPS_INT = 1e-6
ROOT_TOL = 1e-10


class Kind(enum.Enum):
    GENERIC = "generic"
    JUDD = "judd"
    NEW_INTEGER = "new-integer"
    # lambda = 0 or mu = 0, where the system decouples and is solved in closed form
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class SpectralKind:
    kind: Kind
    degeneracy: int


@dataclass(frozen=True)
class ConditionValue:
    value: float
    scale: float
    terms_used: int = 0
    derivative: float | None = None

    @property
    def normalized(self) -> float:
        return self.value / self.scale if self.scale > 0 else self.value


def nearest_nonneg_int(x: float, eps: float = EPS_INT) -> int | None:
    n = round(x)
    if n >= 0 and abs(x - n) <= eps:
        return int(n)
    return None


def _local_at(tag: Tag, x, lam, mu, t):
    a, b, g, d, e = transform(tag, *heun_arrays(x, lam, mu))
    th, xi = theta_xi_from_accessory(a, b, g, d, e)
    return heun_local_at(a, b, g, th, xi, t)


def wronskian_array(x, lam, mu, y=0.5):
    """``W = H0 G' - H0' G`` with ``G(y) = HeunC(a1; 1 - y)``; returns ``(W, scale)``.

    Non-converged or blocked elements are NaN.
    """
    h0, dh0, _ = _local_at(Tag.A0, x, lam, mu, y)
    h1, dh1, _ = _local_at(Tag.A1, x, lam, mu, 1 - np.asarray(y, dtype=float))
    g, dg = h1, -dh1
    return h0 * dg - dh0 * g, np.abs(h0 * dg) + np.abs(dh0 * g)


def wronskian_W(pt: RabiPoint, y: float = 0.5, eps_int: float = EPS_INT) -> ConditionValue:
    if nearest_nonneg_int(pt.x, eps_int) is not None:
        raise IntegerX(f"x = {pt.x} is a non-negative integer; use the integer conditions")
    if pt.lam == 0:
        raise LambdaZero("lambda = 0 is handled analytically")
    w, scale = wronskian_array(pt.x, pt.lam, pt.mu, y)
    return ConditionValue(float(w), float(scale))


def _judd_scale(n: int, lam, mu):
    """Majorant of ``L_n``: the truncation recurrence run on absolute monomials.

    On tuple A0 at ``x = n`` the step factors reduce to
    ``(n-k)^2 - 4(k+1) lam^2 - mu^2`` and ``4 lam^2 (k-n)``, so bounding each by
    the sum of its terms' magnitudes gives ``|L_n| <= scale``.
    """
    l2 = np.asarray(lam, dtype=float) ** 2
    m2 = np.asarray(mu, dtype=float) ** 2
    prev = np.zeros(np.broadcast(l2, m2).shape)
    cur = np.ones_like(prev)
    for k in range(n):
        num = ((n - k) ** 2 + 4 * (k + 1) * l2 + m2) * cur + 4 * l2 * (n - k) * prev
        if k == n - 1:
            return num
        prev, cur = cur, num / abs((k + 1) * (k + 1 - n))
    return np.ones_like(prev)


def judd_array(n: int, lam, mu):
    """Truncation numerator ``L_n`` on tuple A0 at ``x = n``; returns ``(L, scale)``.

    Polynomial of degree ``n`` in ``(lambda^2, mu^2)``.
    """
    if n < 1:
        raise ValueError("the Judd condition needs n >= 1")
    a, b, g, d, e = heun_arrays(float(n), lam, mu)
    th, xi = theta_xi_from_accessory(a, b, g, d, e)
    prev = np.zeros(np.broadcast(a, th).shape)
    cur = np.ones_like(prev)
    for k in range(n):
        fa = k * (k - 1) + k * (b + g + 2 - a) - th
        fb = a * (k - 1) + th + xi
        num = fa * cur + fb * prev
        if k == n - 1:
            return num, _judd_scale(n, lam, mu)
        prev, cur = cur, num / ((k + 1) * (k + b + 1))
    raise AssertionError("unreachable")


def judd_condition(n: int, lam: float, mu: float) -> ConditionValue:
    if n < 1:
        raise ValueError("the Judd condition needs n >= 1")
    value, _ = truncation_numerator(heun_params(RabiPoint(float(n), lam, mu)), n)
    return ConditionValue(float(value), float(_judd_scale(n, lam, mu)), terms_used=n)


def f_array(n: int, lam, mu):
    """``F_n = h0 h1' + h1 (2n h0 + h0')`` from tuples c0, c1 at 1/2; returns ``(F, scale)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    h0, p0, _ = _local_at(Tag.C0, float(n), lam, mu, 0.5)
    h1, p1, _ = _local_at(Tag.C1, float(n), lam, mu, 0.5)
    value = h0 * p1 + h1 * (2 * n * h0 + p0)
    scale = np.abs(h0 * p1) + np.abs(2 * n * h1 * h0) + np.abs(h1 * p0)
    return value, scale


def new_state_condition_F(n: int, lam: float, mu: float) -> ConditionValue:
    if lam == 0:
        raise LambdaZero("F_n is evaluated at small non-zero lambda")
    value, scale = f_array(n, lam, mu)
    return ConditionValue(float(value), float(scale))


def wronskian_form_w(n: int, lam: float, mu: float, y: float = 0.5) -> ConditionValue:
    """Raw determinant of the non-zero-exponent solutions ``V10``, ``V11`` at ``y``."""
    if lam == 0:
        raise LambdaZero("lambda = 0 is handled analytically")
    pt = RabiPoint(float(n), lam, mu)
    r0 = local_solution(pt, Which.V10).evaluate(y)
    r1 = local_solution(pt, Which.V11).evaluate(y)
    value = r0.value * r1.derivative - r0.derivative * r1.value
    scale = abs(r0.value * r1.derivative) + abs(r0.derivative * r1.value)
    return ConditionValue(value, scale, terms_used=max(r0.terms_used, r1.terms_used))


def classify(pt: RabiPoint, tol: float = 1e-9, eps_int: float = EPS_INT) -> SpectralKind:
    """Label a known spectrum member by the condition that produces it.

    The Judd condition takes priority when both integer conditions vanish.
    """
    if pt.lam == 0 or pt.mu == 0:
        return SpectralKind(Kind.ANALYTIC, 2 if pt.mu == 0 else 1)
    n = nearest_nonneg_int(pt.x, eps_int)
    if n is None:
        return SpectralKind(Kind.GENERIC, 1)
    if n >= 1 and abs(judd_condition(n, pt.lam, pt.mu).normalized) < tol:
        return SpectralKind(Kind.JUDD, 2)
    if abs(new_state_condition_F(n, pt.lam, pt.mu).normalized) < tol:
        return SpectralKind(Kind.NEW_INTEGER, 1)
    raise Unclassifiable(f"integer x = {n} but neither integer condition vanishes at {pt}")


def judd_eigenstates(
    n: int, lam: float, mu: float, tol: float = 1e-10
) -> tuple[BargmannState, BargmannState]:
    """The two degenerate Judd states at ``E = n - lambda^2``.

    The first comes from the polynomial ``Q_{n-1}``; the second from
    ``exp(-4 lambda^2 y) R_n(y)`` where ``R_n`` solves the equation with
    ``alpha`` negated.
    """
    if mu == 0:
        raise MuZero("mu = 0 decouples the system")
    cond = judd_condition(n, lam, mu)
    if abs(cond.normalized) > tol:
        raise NotOnJuddSet(f"|L_{n}| / scale = {abs(cond.normalized):.3e} at ({lam}, {mu})")
    pt = RabiPoint(float(n), lam, mu)
    p = heun_params(pt)
    q = polynomial_solution(p, n, tol=math.sqrt(tol))
    tilde = HeunParams(-p.alpha, p.beta, p.gamma, p.delta, p.eta)
    r = truncated_polynomial(tilde, n, degree=n, tol=math.sqrt(tol))
    first = wavefunction(pt, polynomial_v(q))
    second = wavefunction(pt, polynomial_v(r, exp_rate=-p.alpha))
    return first, second


def independence_det(a: BargmannState, b: BargmannState, z1: complex, z2: complex) -> float:
    """Normalized ``|det [[a(z1), b(z1)], [a(z2), b(z2)]]|`` of the psi1 components."""
    a1, a2 = a.psi1(z1), a.psi1(z2)
    b1, b2 = b.psi1(z1), b.psi1(z2)
    det = a1 * b2 - a2 * b1
    return float(abs(det) / (abs(a1 * b2) + abs(a2 * b1)))
