"""Root finding and curve tracing over the spectral conditions.

Three drivers:

* :func:`scan_spectrum` -- all ``x`` in an interval at fixed ``(lambda, mu)``.
* :func:`energy_curves` -- ``E(lambda)`` levels at fixed ``mu``, chained into
  polylines per parity.
* :func:`trace_level_set` -- zero curves of one condition in the
  ``(lambda, mu)`` plane.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import oracle
from .conditions import (
    EPS_INT,
    Kind,
    SpectralKind,
    _local_at,
    f_array,
    judd_array,
    judd_condition,
    new_state_condition_F,
    wronskian_array,
)
from .errors import CurveCountMismatch, GridTooCoarse
from .rabi_map import RabiPoint, Tag, Which, local_solution

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanConfig:
    grid_step: float = 0.02
    bracket_refiner: str = "brent"  # or "bisection"
    root_tol: float = 1e-12
    eps_int: float = EPS_INT
    max_roots: int = 10_000
    lam_step: float = 0.005
    cond_tol: float = 1e-9
    max_halvings: int = 4

    def __post_init__(self):
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if not self.root_tol > 0:
            raise ValueError("root_tol must be positive")
        if not self.lam_step > 0:
            raise ValueError("lam_step must be positive")
        if self.bracket_refiner not in ("brent", "bisection"):
            raise ValueError(f"unknown refiner {self.bracket_refiner!r}")


@dataclass(frozen=True)
class SpectralPoint:
    pt: RabiPoint
    kind: SpectralKind
    condition_residual: float
    parity: int | None = None
    oracle_delta: float | None = None

    @property
    def energy(self) -> float:
        return self.pt.energy


@dataclass
class CurveSet:
    """Polylines in one plane; ``labels`` runs parallel to ``curves``."""

    curves: list[np.ndarray]
    plane: str  # "lambda-mu" or "lambda-E"
    label: str
    labels: list[str] = field(default_factory=list)
    masked_cells: int = 0

    def __post_init__(self):
        if not self.labels:
            self.labels = [self.label] * len(self.curves)

    def __len__(self):
        return len(self.curves)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RABI_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    n = _threads()
    if n == 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


# -- parity ------------------------------------------------------------------


def parity_of(x: float, lam: float, mu: float, v: float, dv: float) -> int:
    """Parity of the state whose Heun solution has value/slope ``v``, ``dv`` at 1/2.

    Follows from ``psi2(z) = p psi1(-z)`` at ``z = 0`` together with the first
    line of the Bargmann system.
    """
    base = x - 2 * lam * lam
    g = [abs((base - p * mu) * v - dv / 2) for p in (1, -1)]
    return 1 if g[0] <= g[1] else -1


# -- scans in x --------------------------------------------------------------


def _w_normalized(x, lam, mu):
    w, s = wronskian_array(x, lam, mu)
    return w / s


def _refine(f, a, b, cfg: ScanConfig) -> float:
    if cfg.bracket_refiner == "bisection":
        r = optimize.bisect(f, a, b, xtol=cfg.root_tol)
        # secant polish
        x0, x1 = r - cfg.root_tol, r
        for _ in range(3):
            f0, f1 = f(x0), f(x1)
            if f1 == f0:
                break
            x0, x1 = x1, x1 - f1 * (x1 - x0) / (f1 - f0)
        return x1 if a <= x1 <= b else r
    return optimize.brentq(f, a, b, xtol=cfg.root_tol)


def _sign_change_roots(f_vec, f_scalar, a: float, b: float, step: float, cfg: ScanConfig, depth=0):
    n = max(2, int(math.ceil((b - a) / step)) + 1)
    xs = np.linspace(a, b, n)
    vals = f_vec(xs)
    roots = []
    ok = np.isfinite(vals)
    for i in range(n - 1):
        if not (ok[i] and ok[i + 1]):
            continue
        if vals[i] == 0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(_refine(f_scalar, xs[i], xs[i + 1], cfg))
    if ok[-1] and vals[-1] == 0:
        roots.append(xs[-1])
    if depth < cfg.max_halvings:
        # a dip in |f| without a sign change may hide a close pair of roots
        av = np.abs(vals)
        for i in range(1, n - 1):
            if not (ok[i - 1] and ok[i] and ok[i + 1]):
                continue
            if vals[i - 1] * vals[i] > 0 and vals[i] * vals[i + 1] > 0 and av[i] < av[i - 1] and av[i] < av[i + 1]:
                extra = _sign_change_roots(f_vec, f_scalar, xs[i - 1], xs[i + 1], step / 2, cfg, depth + 1)
                if extra:
                    warnings.warn(
                        f"two roots within one grid cell near x={xs[i]:.6g}; rescanned at step {step / 2:g}",
                        GridTooCoarse,
                        stacklevel=2,
                    )
                    roots.extend(extra)
    return sorted(set(roots))


def _segments(x_lo: float, x_hi: float, zone: float):
    """Split ``[x_lo, x_hi]`` at non-negative integers, leaving out ``zone`` around each."""
    cuts = [n for n in range(max(0, math.ceil(x_lo)), math.floor(x_hi) + 1)]
    edges = [x_lo] + cuts + [x_hi]
    segs = []
    for a, b in zip(edges[:-1], edges[1:]):
        a2 = a + zone if a in cuts else a
        b2 = b - zone if b in cuts else b
        if b2 > a2:
            segs.append((a2, b2))
    return segs


def _analytic_points(lam, mu, x_lo, x_hi):
    if lam == 0:
        # psi1 = c1 z^(E - mu) + c2 z^(E + mu) with non-negative integer powers
        cand = []
        m = 0
        while m - abs(mu) <= x_hi:
            cand.extend([m + mu, m - mu])
            m += 1
        energies = {}
        for e in cand:
            if x_lo <= e <= x_hi:
                energies[e] = energies.get(e, 0) + 1
        return [
            SpectralPoint(RabiPoint(e, 0.0, mu), SpectralKind(Kind.ANALYTIC, d), 0.0)
            for e, d in sorted(energies.items())
        ]
    # mu = 0: displaced oscillators, E = n - lambda^2 twice
    return [
        SpectralPoint(RabiPoint(float(n), lam, 0.0), SpectralKind(Kind.ANALYTIC, 2), 0.0)
        for n in range(max(0, math.ceil(x_lo)), math.floor(x_hi) + 1)
    ]


def integer_members(n: int, lam: float, mu: float, cfg: ScanConfig) -> list[SpectralPoint]:
    """Judd or new-integer states on the baseline ``x = n`` at this ``(lambda, mu)``."""
    pt = RabiPoint(float(n), lam, mu)
    if n >= 1:
        jc = judd_condition(n, lam, mu)
        if abs(jc.normalized) < cfg.cond_tol:
            return [SpectralPoint(pt, SpectralKind(Kind.JUDD, 2), abs(jc.normalized))]
    fc = new_state_condition_F(n, lam, mu)
    if abs(fc.normalized) < cfg.cond_tol:
        r = local_solution(pt, Which.V10).evaluate(0.5)
        par = parity_of(n, lam, mu, r.value, r.derivative)
        return [SpectralPoint(pt, SpectralKind(Kind.NEW_INTEGER, 1), abs(fc.normalized), par)]
    return []


def scan_spectrum(
    lam: float,
    mu: float,
    x_lo: float,
    x_hi: float,
    cfg: ScanConfig | None = None,
    with_oracle: bool = False,
) -> list[SpectralPoint]:
    """All spectrum points with ``x`` in ``[x_lo, x_hi]`` at fixed ``(lambda, mu)``."""
    cfg = cfg or ScanConfig()
    if not x_lo < x_hi:
        raise ValueError(f"empty x range [{x_lo}, {x_hi}]")
    if lam == 0 or mu == 0:
        points = _analytic_points(lam, mu, x_lo, x_hi)
    else:
        points = []
        zone = 10 * cfg.eps_int

        def fv(xs):
            return _w_normalized(xs, lam, mu)

        def fs(x):
            return float(_w_normalized(x, lam, mu))

        for a, b in _segments(x_lo, x_hi, zone):
            for x in _sign_change_roots(fv, fs, a, b, cfg.grid_step, cfg):
                h, dh, _ = _local_at(Tag.A0, x, lam, mu, 0.5)
                par = parity_of(x, lam, mu, float(h), float(dh))
                points.append(
                    SpectralPoint(RabiPoint(x, lam, mu), SpectralKind(Kind.GENERIC, 1), abs(fs(x)), par)
                )
        for n in range(max(0, math.ceil(x_lo)), math.floor(x_hi) + 1):
            points.extend(integer_members(n, lam, mu, cfg))
        points.sort(key=lambda p: p.pt.x)
    if len(points) > cfg.max_roots:
        points = points[: cfg.max_roots]
    if with_oracle:
        points = attach_oracle(points, lam, mu)
    return points


def attach_oracle(points: list[SpectralPoint], lam: float, mu: float, N: int = oracle.DEFAULT_N):
    if not points:
        return points
    e_max = max(p.energy for p in points) + 1.0
    spec = oracle.eigenvalues_below(lam, mu, e_max, N)
    ev = spec.eigenvalues
    return [replace(p, oracle_delta=float(np.min(np.abs(ev - p.energy)))) for p in points]


# -- energy curves -----------------------------------------------------------


@dataclass
class EnergyCurves:
    levels: CurveSet
    baselines: CurveSet
    judd_points: np.ndarray  # (k, 2) of (lambda, E)
    new_points: np.ndarray
    chain_breaks: list[tuple[float, float]] = field(default_factory=list)


def _lam_grid(lam_lo, lam_hi, step):
    n = max(2, int(round((lam_hi - lam_lo) / step)) + 1)
    return np.linspace(lam_lo, lam_hi, n)


def _chain(lams, roots_per_lam, max_gap_steps=2):
    """Chain ``(energy, parity)`` lists into branches.

    Within one parity class levels never cross, so consecutive sorted lists
    are aligned by the integer shift that best matches the previous values.
    """
    branches: list[dict] = []
    active: dict[int, list[int]] = {1: [], -1: []}
    breaks = []
    for i, (lam, roots) in enumerate(zip(lams, roots_per_lam)):
        for par in (1, -1):
            cur = sorted(e for e, p in roots if p == par)
            prev_ids = [b for b in active[par] if i - branches[b]["last"] <= max_gap_steps]
            dropped = [b for b in active[par] if b not in prev_ids]
            for b in dropped:
                breaks.append((branches[b]["lam"][-1], branches[b]["E"][-1]))
            prev_ids.sort(key=lambda b: branches[b]["E"][-1])
            prev = [branches[b]["E"][-1] for b in prev_ids]
            best, best_cost = 0, math.inf
            for s in range(-len(prev), len(cur) + 1):
                pairs = [(j, j + s) for j in range(len(prev)) if 0 <= j + s < len(cur)]
                if not pairs and prev and cur:
                    continue
                cost = sum((prev[j] - cur[k]) ** 2 for j, k in pairs) / max(len(pairs), 1)
                cost += 1e-3 * (len(prev) + len(cur) - 2 * len(pairs))
                if cost < best_cost:
                    best, best_cost = s, cost
            used = set()
            new_active = []
            for j, b in enumerate(prev_ids):
                k = j + best
                if 0 <= k < len(cur):
                    branches[b]["lam"].append(lam)
                    branches[b]["E"].append(cur[k])
                    branches[b]["last"] = i
                    used.add(k)
                    new_active.append(b)
                elif i - branches[b]["last"] < max_gap_steps:
                    new_active.append(b)
            for k, e in enumerate(cur):
                if k not in used:
                    branches.append({"lam": [lam], "E": [e], "last": i, "parity": par})
                    new_active.append(len(branches) - 1)
            active[par] = new_active
    return branches, breaks


def _integer_points_along(cond_fn, n, mu, lam_lo, lam_hi, step, cfg):
    lams = np.linspace(max(lam_lo, 1e-9), lam_hi, max(3, int((lam_hi - lam_lo) / step) + 1))

    def fv(ls):
        v, s = cond_fn(n, ls, mu)
        return v / s

    def fs(lam):
        return float(fv(np.asarray(lam)))

    return _sign_change_roots(fv, fs, lams[0], lams[-1], step, replace(cfg, max_halvings=0))


def energy_curves(
    mu: float,
    lam_range: tuple[float, float],
    e_range: tuple[float, float],
    cfg: ScanConfig | None = None,
) -> EnergyCurves:
    """Spectrum ``E(lambda)`` at fixed ``mu`` with baselines and integer points."""
    cfg = cfg or ScanConfig()
    lam_lo, lam_hi = lam_range
    e_lo, e_hi = e_range
    lams = _lam_grid(lam_lo, lam_hi, cfg.lam_step)
    lams = lams[lams != 0] if lam_lo == 0 else lams

    def roots_at(lam):
        pts = scan_spectrum(lam, mu, e_lo + lam * lam, e_hi + lam * lam, cfg)
        out = []
        for p in pts:
            if p.kind.kind is Kind.JUDD:
                out.extend([(p.energy, 1), (p.energy, -1)])
            elif p.parity is not None:
                out.append((p.energy, p.parity))
        return out

    roots = _pmap(roots_at, list(lams))
    branches, breaks = _chain(lams, roots)
    levels = CurveSet(
        [np.column_stack([b["lam"], b["E"]]) for b in branches],
        "lambda-E",
        f"spectrum mu={mu:g}",
        [f"parity {'+' if b['parity'] > 0 else '-'}" for b in branches],
    )

    base_curves, base_labels = [], []
    lam_fine = np.linspace(lam_lo, lam_hi, 200)
    for n in range(max(0, math.floor(e_lo)), math.ceil(e_hi + lam_hi**2) + 1):
        e = n - lam_fine**2
        keep = (e >= e_lo) & (e <= e_hi)
        if np.any(keep):
            base_curves.append(np.column_stack([lam_fine[keep], e[keep]]))
            base_labels.append(f"baseline n={n}")
    baselines = CurveSet(base_curves, "lambda-E", "baselines", base_labels)

    judd_pts, new_pts = [], []
    lo = max(lam_lo, cfg.lam_step / 10)
    for n in range(0, math.ceil(e_hi + lam_hi**2) + 1):
        if n >= 1:
            for lam in _integer_points_along(judd_array, n, mu, lo, lam_hi, cfg.lam_step, cfg):
                if e_lo <= n - lam * lam <= e_hi:
                    judd_pts.append((lam, n - lam * lam))
        for lam in _integer_points_along(f_array, n, mu, lo, lam_hi, cfg.lam_step, cfg):
            if not e_lo <= n - lam * lam <= e_hi:
                continue
            if n >= 1 and abs(judd_condition(n, lam, mu).normalized) < 1e3 * cfg.cond_tol:
                continue
            new_pts.append((lam, n - lam * lam))
    return EnergyCurves(
        levels,
        baselines,
        np.array(judd_pts).reshape(-1, 2),
        np.array(new_pts).reshape(-1, 2),
        breaks,
    )


# -- level sets in the (lambda, mu) plane --------------------------------------


@dataclass(frozen=True)
class Condition:
    kind: str  # "wronskian", "f", "judd"
    value: float

    @classmethod
    def wronskian(cls, x: float) -> Condition:
        if abs(x - round(x)) <= EPS_INT and round(x) >= 0:
            raise ValueError("the Wronskian condition needs non-integer x")
        return cls("wronskian", float(x))

    @classmethod
    def f(cls, n: int) -> Condition:
        return cls("f", int(n))

    @classmethod
    def judd(cls, n: int) -> Condition:
        return cls("judd", int(n))

    @property
    def label(self) -> str:
        if self.kind == "wronskian":
            return f"S_x x={self.value:.10g}"
        return f"{'F' if self.kind == 'f' else 'J'}_{int(self.value)}"

    def evaluate(self, lam, mu) -> np.ndarray:
        """Condition value normalized by its natural scale (same zero set)."""
        if self.kind == "wronskian":
            v, s = wronskian_array(self.value, lam, mu)
        elif self.kind == "f":
            v, s = f_array(int(self.value), lam, mu)
        else:
            v, s = judd_array(int(self.value), lam, mu)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(s > 0, v / s, v)


def trace_level_set(
    condition: Condition,
    lam_window: tuple[float, float],
    mu_window: tuple[float, float],
    resolution: tuple[int, int] = (241, 241),
    newton: bool = True,
) -> CurveSet:
    """Zero curves of ``condition`` by marching squares plus one Newton step per vertex."""
    from skimage.measure import find_contours

    (l0, l1), (m0, m1) = lam_window, mu_window
    if not (l1 > l0 and m1 > m0):
        raise ValueError("windows must have positive area")
    lam = np.linspace(l0, l1, resolution[0])
    mu = np.linspace(m0, m1, resolution[1])
    L, M = np.meshgrid(lam, mu, indexing="ij")
    Z = condition.evaluate(L, M)
    finite = np.isfinite(Z)
    masked = int(np.count_nonzero(~finite))
    if masked:
        log.warning("%d grid values of %s are non-finite and masked", masked, condition.label)
    dl, dm = lam[1] - lam[0], mu[1] - mu[0]
    curves = []
    for c in find_contours(np.where(finite, Z, 0.0), 0.0, mask=finite):
        pts = np.column_stack([l0 + c[:, 0] * dl, m0 + c[:, 1] * dm])
        if newton:
            pts = _newton_project(condition, pts, (dl, dm), (l0, l1), (m0, m1))
        curves.append(pts)
    return CurveSet(curves, "lambda-mu", condition.label, masked_cells=masked)


def _newton_project(condition, pts, steps, lw, mw):
    h = 1e-6
    f = condition.evaluate(pts[:, 0], pts[:, 1])
    gl = (condition.evaluate(pts[:, 0] + h, pts[:, 1]) - condition.evaluate(pts[:, 0] - h, pts[:, 1])) / (2 * h)
    gm = (condition.evaluate(pts[:, 0], pts[:, 1] + h) - condition.evaluate(pts[:, 0], pts[:, 1] - h)) / (2 * h)
    g2 = gl * gl + gm * gm
    with np.errstate(invalid="ignore", divide="ignore"):
        dl = -f * gl / g2
        dm = -f * gm / g2
    # reject corrections that leave the cell neighbourhood or the window
    ok = np.isfinite(dl) & np.isfinite(dm) & (np.abs(dl) <= steps[0]) & (np.abs(dm) <= steps[1])
    new = pts + np.where(ok[:, None], np.column_stack([dl, dm]), 0.0)
    new[:, 0] = np.clip(new[:, 0], *lw)
    new[:, 1] = np.clip(new[:, 1], *mw)
    return new


# -- avoided crossings -------------------------------------------------------


def min_gap(curves: CurveSet, lam_window, e_window) -> tuple[float, float]:
    """Smallest vertical distance between the two curves that enter the window."""
    (l0, l1), (e0, e1) = lam_window, e_window
    inside = []
    for c in curves.curves:
        sel = (c[:, 0] >= l0) & (c[:, 0] <= l1) & (c[:, 1] >= e0) & (c[:, 1] <= e1)
        if np.any(sel):
            inside.append(c[(c[:, 0] >= l0) & (c[:, 0] <= l1)])
    if len(inside) != 2:
        raise CurveCountMismatch(f"expected 2 curves in the window, found {len(inside)}")
    a, b = (c[np.argsort(c[:, 0])] for c in inside)
    lo, hi = max(a[0, 0], b[0, 0]), min(a[-1, 0], b[-1, 0])
    if hi < lo:
        raise CurveCountMismatch("the two curves do not overlap in lambda")
    grid = np.union1d(a[:, 0], b[:, 0])
    grid = grid[(grid >= lo) & (grid <= hi)]
    gap = np.abs(np.interp(grid, a[:, 0], a[:, 1]) - np.interp(grid, b[:, 0], b[:, 1]))
    i = int(np.argmin(gap))
    return float(grid[i]), float(gap[i])


def window_curves(mu, lam_window, e_window, lam_step=1e-4, x_points=400, cfg=None) -> CurveSet:
    """Levels inside a small ``(lambda, E)`` window with an x-grid fine enough for close pairs."""
    (l0, l1), (e0, e1) = lam_window, e_window
    cfg = replace(cfg or ScanConfig(), grid_step=(e1 - e0) / x_points, lam_step=lam_step)
    # pad the energy range so levels leaving the window stay chained
    pad = 0.5 * (e1 - e0)
    ec = energy_curves(mu, (l0, l1), (e0 - pad, e1 + pad), cfg)
    return ec.levels


def avoided_crossing(mu, lam_window, e_window, lam_step=1e-4, cfg=None, refine=True):
    """``(lambda_star, gap)`` for the two same-parity levels in the window.

    The grid minimum is polished by a bounded scalar minimization of the
    level spacing, computed from fresh root finds at each trial ``lambda``.
    """
    curves = window_curves(mu, lam_window, e_window, lam_step, cfg=cfg)
    lam_star, gap = min_gap(curves, lam_window, e_window)
    if not refine:
        return lam_star, gap
    (e0, e1) = e_window
    pad = 0.5 * (e1 - e0)
    fine = replace(cfg or ScanConfig(), grid_step=(e1 - e0) / 400)

    def spacing(lam):
        pts = scan_spectrum(lam, mu, e0 - pad + lam * lam, e1 + pad + lam * lam, fine)
        best = math.inf
        for par in (1, -1):
            es = np.sort([p.energy for p in pts if p.parity == par])
            if len(es) > 1:
                best = min(best, float(np.min(np.diff(es))))
        return best

    lo, hi = max(lam_window[0], lam_star - 2 * lam_step), min(lam_window[1], lam_star + 2 * lam_step)
    res = optimize.minimize_scalar(spacing, bounds=(lo, hi), method="bounded", options={"xatol": 1e-9})
    if res.fun < gap:
        return float(res.x), float(res.fun)
    return lam_star, gap
