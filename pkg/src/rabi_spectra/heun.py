"""Frobenius series for the confluent Heun equation.

The equation, in the non-symmetric form with regular singular points at
``y = 0`` and ``y = 1``::

    v'' + (alpha + (beta + 1)/y + (gamma + 1)/(y - 1)) v'
        + (theta/y + xi/(y - 1)) v = 0

is parameterized either by ``(alpha, beta, gamma, theta, xi)`` or by the
accessory pair ``(delta, eta)`` used for ``HeunC``.  Multiplying by
``y (y - 1)`` and collecting powers gives the three-term recurrence used for
every local solution here::

    c[k+1] (k+rho+1)(k+rho+beta+1) =
        c[k]   ((k+rho)(k+rho-1) + (k+rho)(beta+gamma+2-alpha) - theta)
      + c[k-1] (alpha (k+rho-1) + theta + xi)

Expansions about ``y = 1`` reuse the same recurrence on the reflected
equation (``y -> 1 - y``), whose parameters are ``(-alpha, gamma, beta,
-delta, delta + eta)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BlockedRecurrence,
    NonFiniteCoefficient,
    NotConverged,
    NotTruncated,
    OutsideDisk,
    WrongBeta,
)

REL_TOL = 1e-14
N_MAX_CAP = 2000
_RESCALE_AT = 1e100


class Center(enum.Enum):
    ZERO = 0
    ONE = 1


def theta_xi_from_accessory(alpha, beta, gamma, delta, eta):
    """Convert the ``HeunC`` accessory pair ``(delta, eta)`` to ``(theta, xi)``.

    Works elementwise on numpy arrays.
    """
    theta = (alpha - beta - gamma + alpha * beta - beta * gamma) / 2 - eta
    xi = (alpha + beta + gamma + alpha * gamma + beta * gamma) / 2 + delta + eta
    return theta, xi


@dataclass(frozen=True)
class HeunParams:
    alpha: float
    beta: float
    gamma: float
    delta: float
    eta: float
    theta: float = field(init=False)
    xi: float = field(init=False)

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta, self.eta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite Heun parameters {vals}")
        theta, xi = theta_xi_from_accessory(*vals)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "xi", xi)

    def astuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.delta, self.eta)

    def reflected(self) -> HeunParams:
        """Parameters of the same equation written in ``t = 1 - y``."""
        return HeunParams(-self.alpha, self.gamma, self.beta, -self.delta, self.delta + self.eta)


@dataclass(frozen=True)
class FrobeniusSeries:
    """Coefficients of ``(t)^exponent * sum c_k t^k`` with ``t = |y - center|``.

    ``params`` are the parameters of the equation in the original variable
    ``y``; ``series_params`` are the ones the recurrence actually ran on
    (reflected for ``Center.ONE``).  ``coeffs`` are stored divided by
    ``exp(log_scale)``.
    """

    params: HeunParams
    center: Center
    exponent: float
    coeffs: np.ndarray
    log_scale: float = 0.0
    truncation_blocked_at: int | None = None

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    @property
    def series_params(self) -> HeunParams:
        return self.params if self.center is Center.ZERO else self.params.reflected()

    @property
    def converged(self) -> bool:
        return self.truncation_blocked_at is None and bool(np.all(np.isfinite(self.coeffs)))

    def local_variable(self, y):
        return y if self.center is Center.ZERO else 1 - y


@dataclass(frozen=True)
class EvalResult:
    value: float
    derivative: float
    terms_used: int
    tail_estimate: float


def _step_factors(p: HeunParams, rho: float, k: int):
    """Return (denominator, factor on c[k], factor on c[k-1]) for step k -> k+1."""
    kr = k + rho
    den = (kr + 1) * (kr + p.beta + 1)
    a = kr * (kr - 1) + kr * (p.beta + p.gamma + 2 - p.alpha) - p.theta
    b = p.alpha * (kr - 1) + p.theta + p.xi
    return den, a, b


def frobenius_series(
    p: HeunParams, center: Center = Center.ZERO, exponent: float = 0.0, n_max: int = 400
) -> FrobeniusSeries:
    """Coefficients of the local solution with the given exponent about ``center``.

    ``exponent`` must be one of the two indicial roots, ``0`` or ``-beta`` of
    the (possibly reflected) equation.  When the recurrence denominator
    vanishes the returned series has ``truncation_blocked_at`` set and only
    the coefficients below that index.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if n_max > N_MAX_CAP:
        raise ValueError(f"n_max above hard cap {N_MAX_CAP}")
    sp = p if center is Center.ZERO else p.reflected()
    if exponent != 0 and exponent != -sp.beta:
        raise ValueError(f"exponent {exponent} is not an indicial root (0, {-sp.beta})")

    coeffs = np.zeros(n_max + 1)
    coeffs[0] = 1.0
    log_scale = 0.0
    prev, cur = 0.0, 1.0
    for k in range(n_max):
        den, a, b = _step_factors(sp, exponent, k)
        if den == 0:
            return FrobeniusSeries(p, center, exponent, coeffs[: k + 1].copy(), log_scale, k + 1)
        nxt = (a * cur + b * prev) / den
        if not math.isfinite(nxt):
            raise NonFiniteCoefficient(f"coefficient {k + 1} overflowed; reduce n_max")
        coeffs[k + 1] = nxt
        prev, cur = cur, nxt
        if abs(nxt) > _RESCALE_AT:
            s = abs(nxt)
            coeffs[: k + 2] /= s
            prev, cur = prev / s, cur / s
            log_scale += math.log(s)
    return FrobeniusSeries(p, center, exponent, coeffs, log_scale)


def evaluate(s: FrobeniusSeries, y: float, rel_tol: float = REL_TOL) -> EvalResult:
    """Value and ``d/dy`` of the local solution at a real point ``y``.

    The sum stops once two consecutive terms of both the value and the
    derivative series fall below ``rel_tol`` times the partial sums.
    """
    t = s.local_variable(y)
    if abs(t) >= 1:
        raise OutsideDisk(f"|y - center| = {abs(t)} >= 1")
    c = s.coeffs
    if t == 0:
        val, dval, used, tail = c[0], (c[1] if len(c) > 1 else 0.0), 1, 0.0
    else:
        k = np.arange(len(c))
        terms = c * t**k
        dterms = k[1:] * c[1:] * t ** (k[1:] - 1)
        partial = np.cumsum(terms)
        dpartial = np.cumsum(dterms)
        # running maxima guard against cancellation near a zero of the sum
        ref = np.maximum.accumulate(np.abs(partial))[1:]
        dref = np.maximum(np.maximum.accumulate(np.abs(dpartial)), np.finfo(float).tiny)
        small = np.abs(terms[1:]) <= rel_tol * ref
        dsmall = np.abs(dterms) <= rel_tol * dref
        both = small & dsmall
        hits = np.nonzero(both[:-1] & both[1:])[0]
        if len(hits) == 0:
            if s.truncation_blocked_at is not None:
                raise BlockedRecurrence(s.truncation_blocked_at)
            raise NotConverged(f"series did not converge in {len(c)} terms at y={y}")
        last = hits[0] + 2  # index of the last included term
        val, dval = partial[last], dpartial[last - 1]
        used = last + 1
        tail = float(abs(c[last + 1] * t ** (last + 1))) if last + 1 < len(c) else 0.0

    scale = math.exp(s.log_scale) if s.log_scale else 1.0
    val, dval, tail = val * scale, dval * scale, tail * scale
    rho = s.exponent
    if rho != 0:
        if t <= 0 and rho != int(rho):
            raise ValueError("non-integer exponent needs a positive local variable")
        pref = t**rho
        dval = pref * dval + (rho * t ** (rho - 1) * val if t != 0 else 0.0)
        val, tail = pref * val, abs(pref) * tail
    if s.center is Center.ONE:
        dval = -dval
    return EvalResult(float(val), float(dval), int(used), float(tail))


def series_derivatives(s: FrobeniusSeries, y):
    """Value, first and second ``d/dy`` derivatives using every stored term.

    Accepts complex ``y``; intended for residual checks away from the real
    segment, so no stopping rule is applied.  Only integer exponents are
    supported for complex arguments.
    """
    t = np.asarray(s.local_variable(y), dtype=complex)
    if np.any(np.abs(t) >= 1):
        raise OutsideDisk("point outside the disk of convergence")
    c = s.coeffs * (math.exp(s.log_scale) if s.log_scale else 1.0)
    poly = np.polynomial.Polynomial(c)
    rho = s.exponent
    if rho != 0:
        if rho != int(rho) or rho < 0:
            raise ValueError("only non-negative integer exponents are supported here")
        poly = poly * np.polynomial.Polynomial([0] * int(rho) + [1])
    v, d1, d2 = poly(t), poly.deriv(1)(t), poly.deriv(2)(t)
    if s.center is Center.ONE:
        d1 = -d1
    return v, d1, d2


def _local_scalar(alpha, beta, gamma, theta, xi, t, rel_tol, n_max):
    # same arithmetic, in the same order, as the array path below
    s1 = beta + gamma + 2 - alpha
    s2 = theta + xi
    prev, cur, tk = 0.0, 1.0, 1.0
    val, dval = 1.0, 0.0
    ref, dref = 1.0, np.finfo(float).tiny
    quiet = 0
    for k in range(n_max):
        den = (k + 1) * (k + beta + 1)
        if den == 0:
            return math.nan, math.nan, False
        nxt = (cur * (k * (k - 1) + k * s1 - theta) + prev * (alpha * (k - 1) + s2)) / den
        dterm = (k + 1) * nxt * tk
        tk = tk * t
        term = nxt * tk
        val = val + term
        dval = dval + dterm
        if not (math.isfinite(val) and math.isfinite(dval)):
            return math.nan, math.nan, False
        ref = max(ref, abs(val))
        dref = max(dref, abs(dval))
        quiet = quiet + 1 if abs(term) <= rel_tol * ref and abs(dterm) <= rel_tol * dref else 0
        if quiet >= 2:
            return val, dval, True
        prev, cur = cur, nxt
    return math.nan, math.nan, False


def heun_local_at(alpha, beta, gamma, theta, xi, t, rel_tol=REL_TOL, n_max=N_MAX_CAP):
    """Vectorized exponent-0 local solution and its ``d/dt`` at ``t``.

    All parameter arrays broadcast together.  Returns ``(value, derivative,
    converged)``; elements whose recurrence blocks or that fail the stopping
    rule within ``n_max`` terms come back as NaN with ``converged`` False.
    """
    alpha, beta, gamma, theta, xi, t = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (alpha, beta, gamma, theta, xi, t))
    )
    shape = alpha.shape
    if alpha.size == 1:
        v, dv, ok = _local_scalar(*(float(a.flat[0]) for a in (alpha, beta, gamma, theta, xi, t)), rel_tol, n_max)
        return np.full(shape, v), np.full(shape, dv), np.full(shape, ok)
    s1 = beta + gamma + 2 - alpha
    s2 = theta + xi
    prev = np.zeros(shape)
    cur = np.ones(shape)
    tk = np.ones(shape)  # t**k for the current coefficient
    val = np.ones(shape)
    dval = np.zeros(shape)
    ref = np.ones(shape)
    dref = np.full(shape, np.finfo(float).tiny)
    quiet = np.zeros(shape, dtype=int)
    done = np.zeros(shape, dtype=bool)
    bad = np.zeros(shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(n_max):
            den = (k + 1) * (k + beta + 1)
            nxt = (cur * (k * (k - 1) + k * s1 - theta) + prev * (alpha * (k - 1) + s2)) / den
            bad |= (den == 0) & ~done
            dterm = (k + 1) * nxt * tk
            tk = tk * t
            term = nxt * tk
            active = ~done
            val = np.where(active, val + term, val)
            dval = np.where(active, dval + dterm, dval)
            ref = np.maximum(ref, np.abs(val))
            dref = np.maximum(dref, np.abs(dval))
            small = (np.abs(term) <= rel_tol * ref) & (np.abs(dterm) <= rel_tol * dref)
            quiet = np.where(small, quiet + 1, 0)
            done |= quiet >= 2
            bad |= ~np.isfinite(val)
            if np.all(done | bad):
                break
            prev, cur = cur, nxt
    ok = done & ~bad
    return np.where(ok, val, np.nan), np.where(ok, dval, np.nan), ok


def truncation_numerator(p: HeunParams, n: int) -> tuple[float, float]:
    """Right-hand side of the recurrence at the blocked step for ``beta = -n``.

    Returns ``(L_n, scale)`` where ``scale`` is the sum of the magnitudes of
    the two contributions; ``L_n = 0`` is the condition for the exponent-0
    solution at ``y = 0`` to be free of logarithms.
    """
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if p.beta != -n:
        raise WrongBeta(f"beta = {p.beta}, expected {-n}")
    prev, cur = 0.0, 1.0
    for k in range(n - 1):
        den, a, b = _step_factors(p, 0.0, k)
        prev, cur = cur, (a * cur + b * prev) / den
    _, a, b = _step_factors(p, 0.0, n - 1)
    return a * cur + b * prev, abs(a * cur) + abs(b * prev)


def polynomial_solution(p: HeunParams, n: int, tol: float = 1e-10) -> np.ndarray:
    """Coefficients ``c_0..c_{n-1}`` of the polynomial solution when ``beta = -n``.

    Requires the truncation numerator to vanish (relative to its scale) and
    the recurrence's ``c[k-1]`` factor to vanish at ``k = n``, so the free
    coefficient ``c_n`` can be set to zero and the series terminates.
    """
    num, scale = truncation_numerator(p, n)
    if abs(num) > tol * max(scale, 1.0):
        raise NotTruncated(f"truncation numerator {num:.3e} exceeds tolerance")
    _, _, b = _step_factors(p, 0.0, n)
    if abs(b) > tol * max(abs(p.alpha) * n, 1.0):
        raise NotTruncated(f"series does not terminate (c[n-1] factor {b:.3e})")
    s = frobenius_series(p, Center.ZERO, 0.0, n_max=max(n, 2))
    return s.coeffs[:n].copy()


def truncated_polynomial(p: HeunParams, n: int, degree: int, tol: float = 1e-10) -> np.ndarray:
    """Polynomial solution of degree ``degree >= n`` when ``beta = -n``.

    Used for the second Judd solution: the coefficient at the blocked index is
    free and is chosen so that ``c[degree + 1]`` vanishes.
    """
    num, scale = truncation_numerator(p, n)
    if abs(num) > tol * max(scale, 1.0):
        raise NotTruncated(f"truncation numerator {num:.3e} exceeds tolerance")
    if degree == n - 1:
        return polynomial_solution(p, n, tol)
    if degree != n:
        raise ValueError("only degrees n - 1 and n are supported")
    prefix = frobenius_series(p, Center.ZERO, 0.0, n_max=max(n, 2)).coeffs[:n]
    c_nm1 = prefix[-1]
    _, a_n, b_n = _step_factors(p, 0.0, n)
    # c[n+1] = (a_n c[n] + b_n c[n-1]) / den; pick c[n] to zero it
    if a_n == 0:
        raise NotTruncated("free coefficient cannot cancel the next term")
    c_n = -b_n * c_nm1 / a_n
    _, a_n1, b_n1 = _step_factors(p, 0.0, n + 1)
    if abs(b_n1 * c_n) > tol * max(abs(a_n1 * c_n), abs(c_n), 1.0):
        raise NotTruncated("series does not terminate at the requested degree")
    return np.append(prefix, c_n)
