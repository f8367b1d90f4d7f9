"""Truncated Fock-basis diagonalization of the Rabi Hamiltonian.

``H = a^dag a + mu sigma_z + lambda sigma_x (a^dag + a)`` commutes with the
parity ``sigma_z (-1)^(a^dag a)``.  In each parity sector the states
``|k, s_k>`` with ``s_k = p (-1)^k`` form a symmetric tridiagonal chain with
diagonal ``k + p mu (-1)^k`` and off-diagonal ``lambda sqrt(k + 1)``.

Eigenvalues come from LAPACK's tridiagonal bisection (``stebz``) by default,
with a vectorized Sturm-sequence bisection kept as an independent route.
Sturm counts also give exact eigenvalue counts in an interval and hence
multiplicities.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NotConverged

DEFAULT_N = 400
CONVERGENCE_TOL = 1e-8
DEGENERACY_TOL = 1e-6


class Parity(enum.Enum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class ParityChain:
    parity: Parity
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class OracleSpectrum:
    eigenvalues: np.ndarray
    parities: np.ndarray
    truncation: int
    converged_count: int


def build_chains(lam: float, mu: float, N: int = DEFAULT_N) -> tuple[ParityChain, ParityChain]:
    """Both parity chains for photon numbers ``0..N``."""
    if N < 8:
        raise ValueError("truncation N must be at least 8")
    k = np.arange(N + 1)
    sign = (-1.0) ** k
    off = lam * np.sqrt(np.arange(1, N + 1, dtype=float))
    return tuple(
        ParityChain(par, k + par.value * mu * sign, off.copy()) for par in (Parity.PLUS, Parity.MINUS)
    )


def full_matrix(lam: float, mu: float, N: int) -> np.ndarray:
    """Hamiltonian in the product basis ``|n> (x) {|up>, |down>}``, ``n = 0..N``."""
    a = np.diag(np.sqrt(np.arange(1, N + 1, dtype=float)), 1)
    num = np.diag(np.arange(N + 1, dtype=float))
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.kron(num, np.eye(2)) + mu * np.kron(np.eye(N + 1), sz) + lam * np.kron(a + a.T, sx)


def sturm_count(diag, offdiag, x) -> np.ndarray:
    """Number of eigenvalues strictly below each ``x`` (vectorized over ``x``)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    e2 = np.asarray(offdiag, dtype=float) ** 2
    tiny = np.finfo(float).tiny ** 0.5
    q = diag[0] - x
    q = np.where(q == 0, -tiny, q)
    count = (q < 0).astype(int)
    for i in range(1, len(diag)):
        q = diag[i] - x - e2[i - 1] / q
        q = np.where(q == 0, -tiny, q)
        count += q < 0
    return count


def bisect_eigenvalues(diag, offdiag, indices, xtol: float = 1e-14) -> np.ndarray:
    """Eigenvalues with the given ascending-order indices by Sturm bisection."""
    indices = np.atleast_1d(np.asarray(indices, dtype=int))
    r = np.zeros(len(diag))
    r[:-1] += np.abs(offdiag)
    r[1:] += np.abs(offdiag)
    lo = np.full(len(indices), float(np.min(diag - r)) - 1.0)
    hi = np.full(len(indices), float(np.max(diag + r)) + 1.0)
    while True:
        width = hi - lo
        if np.all(width <= xtol * np.maximum(1.0, np.abs(lo) + np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        below = sturm_count(diag, offdiag, mid) > indices
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def chain_eigenvalues(chain: ParityChain, k: int, method: str = "lapack") -> np.ndarray:
    k = min(k, chain.size)
    if method == "sturm":
        return bisect_eigenvalues(chain.diag, chain.offdiag, np.arange(k))
    if method == "lapack":
        from scipy.linalg import eigvalsh_tridiagonal

        return eigvalsh_tridiagonal(
            chain.diag, chain.offdiag, select="i", select_range=(0, k - 1), lapack_driver="stebz"
        )
    raise ValueError(f"unknown method {method!r}")


def _lowest(lam, mu, N, k, method):
    vals, pars = [], []
    for ch in build_chains(lam, mu, N):
        ev = chain_eigenvalues(ch, k, method)
        vals.append(ev)
        pars.append(np.full(len(ev), ch.parity.value))
    vals, pars = np.concatenate(vals), np.concatenate(pars)
    order = np.argsort(vals, kind="stable")
    return vals[order][:k], pars[order][:k]


def eigenvalues(
    lam: float,
    mu: float,
    N: int = DEFAULT_N,
    k: int = 20,
    tol: float = CONVERGENCE_TOL,
    method: str = "lapack",
    check: bool = True,
) -> OracleSpectrum:
    """The ``k`` lowest eigenvalues, with convergence judged against ``2N``."""
    if k > 2 * (N + 1):
        raise ValueError("k exceeds the truncated dimension")
    vals, pars = _lowest(lam, mu, N, k, method)
    if not check:
        return OracleSpectrum(vals, pars, N, k)
    ref, _ = _lowest(lam, mu, 2 * N, k, method)
    moved = np.abs(vals - ref) >= tol
    converged = int(np.argmax(moved)) if np.any(moved) else k
    return OracleSpectrum(vals, pars, N, converged)


def eigenvalues_below(
    lam: float, mu: float, e_max: float, N: int = DEFAULT_N, tol: float = CONVERGENCE_TOL,
    method: str = "lapack",
) -> OracleSpectrum:
    """All eigenvalues below ``e_max``; raises ``NotConverged`` if any moved at ``2N``."""
    k = 0
    for ch in build_chains(lam, mu, N):
        k += int(sturm_count(ch.diag, ch.offdiag, e_max)[0])
    spec = eigenvalues(lam, mu, N, max(k, 1), tol, method)
    if spec.converged_count < k:
        raise NotConverged(
            f"eigenvalue {spec.converged_count} below {e_max} not converged at N={N}"
        )
    return OracleSpectrum(spec.eigenvalues[:k], spec.parities[:k], N, spec.converged_count)


def multiplicity_at(
    energy: float, lam: float, mu: float, N: int = DEFAULT_N, tol: float = DEGENERACY_TOL
) -> int:
    """Number of eigenvalues in ``[energy - tol, energy + tol]``."""
    counts = []
    for n in (N, 2 * N):
        c = 0
        for ch in build_chains(lam, mu, n):
            lo, hi = sturm_count(ch.diag, ch.offdiag, [energy - tol, energy + tol])
            c += int(hi - lo)
        counts.append(c)
    if counts[0] != counts[1]:
        raise NotConverged(f"count near E={energy} changes with truncation: {counts}")
    return counts[0]
