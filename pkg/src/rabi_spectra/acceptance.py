"""Exit criteria for the library, runnable from pytest or ``rabi-spectra verify``.

Each check returns a :class:`CheckResult`; tolerances are fixed here.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize

from . import oracle
from .conditions import (
    ROOT_TOL,
    f_array,
    judd_array,
    judd_condition,
    judd_eigenstates,
    new_state_condition_F,
    wronskian_array,
    wronskian_form_w,
    wronskian_W,
)
from .rabi_map import RabiPoint, residual
from .solver import (
    Condition,
    ScanConfig,
    avoided_crossing,
    min_gap,
    scan_spectrum,
    trace_level_set,
    window_curves,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    budget: float = math.inf

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s / {self.budget:g}s)"


def _timed(number, name, budget):
    def deco(fn):
        def run() -> CheckResult:
            t0 = time.perf_counter()
            passed, detail = fn()
            dt = time.perf_counter() - t0
            if dt > budget:
                passed, detail = False, detail + f"; over time budget {budget:g}s"
            return CheckResult(number, name, bool(passed), detail, dt, budget)

        run.number = number
        run.__name__ = fn.__name__
        return run

    return deco


@_timed(1, "lambda=0 exactness and small-lambda Heun limit", 5)
def lambda_zero():
    mu = 0.6
    expected = sorted({m + s * mu for m in range(4) for s in (1, -1)})
    got = {p.energy for p in scan_spectrum(0.0, mu, -1.0, 3.7)}
    missing = [e for e in expected if e not in got]
    lam = 1e-3
    roots = [p.energy for p in scan_spectrum(lam, mu, -1.0 + lam**2, 3.7 + lam**2)]
    dev = max(min((abs(r - e) for r in roots), default=math.inf) for e in expected)
    ok = not missing and dev <= 1e-3
    return ok, f"analytic values missing: {missing}; {len(roots)} W roots, max |dE| to m+-mu {dev:.2e}"


@_timed(2, "mu=0 displaced oscillator", 5)
def mu_zero():
    spec = oracle.eigenvalues(1.0, 0.0, N=400, k=12)
    ev = spec.eigenvalues
    target = np.repeat(np.arange(6) - 1.0, 2)
    err = float(np.max(np.abs(ev - target)))
    mult = [oracle.multiplicity_at(k - 1.0, 1.0, 0.0, N=400, tol=1e-6) for k in range(6)]
    ok = err <= 1e-8 and all(m == 2 for m in mult) and spec.converged_count == 12
    return ok, f"max |E - (k-1)| = {err:.1e}, multiplicities {mult}"


@_timed(3, "Judd n=1 ellipse, degeneracy, eigenstates", 10)
def judd_one():
    rng = np.random.default_rng(1)
    phi = rng.uniform(0, 2 * np.pi, 100)
    lam, mu = 0.5 * np.cos(phi), np.sin(phi)
    on = max(abs(judd_condition(1, a, b).value) for a, b in zip(lam, mu))
    la, mb = rng.uniform(-1, 1, 100), rng.uniform(-2, 2, 100)
    ident = max(abs(judd_condition(1, a, b).value + (4 * a * a + b * b - 1)) for a, b in zip(la, mb))
    mult = oracle.multiplicity_at(0.84, 0.4, 0.6, N=400, tol=1e-6)
    s1, s2 = judd_eigenstates(1, 0.4, 0.6)
    zs = np.array([0.3 + 0.2j, -1.1 + 0.5j, 2.0, -0.7j, 1.3 - 0.4j])
    r = max(residual(s1, zs), residual(s2, zs))
    ok = on <= 1e-12 and ident <= 1e-12 and mult == 2 and r <= 1e-10
    return ok, f"|L1| on ellipse {on:.1e}, identity {ident:.1e}, multiplicity {mult}, residual {r:.1e}"


@_timed(4, "Judd n=5 oval count", 60)
def judd_five_ovals():
    cs = trace_level_set(Condition.judd(5), (1e-3, 1.2), (1e-3, 6.0))
    return len(cs) == 5, f"{len(cs)} curves"


def _bijection(lam, mu):
    x_lo, x_hi = -2 + lam * lam, 6 + lam * lam
    pts = scan_spectrum(lam, mu, x_lo, x_hi)
    spec = oracle.eigenvalues_below(lam, mu, 6.0, N=400)
    ev = spec.eigenvalues[spec.eigenvalues >= -2.0]
    found = []
    for p in pts:
        found.extend([p.energy] * p.kind.degeneracy)
    found = np.sort(found)
    if len(found) != len(ev):
        return False, f"({lam}, {mu}): {len(found)} roots vs {len(ev)} eigenvalues", 0.0
    d = float(np.max(np.abs(found - ev))) if len(ev) else 0.0
    return d <= 1e-6, f"({lam}, {mu}): {len(ev)} levels, max |dE| {d:.1e}", d


@_timed(5, "oracle bijection", 60)
def oracle_bijection():
    results = [_bijection(0.7, 1.0), _bijection(0.5, 3.75)]
    return all(r[0] for r in results), "; ".join(r[1] for r in results)


def locate_f_root(n=5, lam=0.5, mu_range=(0.05, 6.0)):
    """First root of ``mu -> F_n(lam, mu)`` in the range."""
    mus = np.linspace(*mu_range, 600)
    v, s = f_array(n, lam, mus)
    f = v / s
    idx = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    if len(idx) == 0:
        return None

    def g(m):
        c = new_state_condition_F(n, lam, m)
        return c.normalized

    return optimize.brentq(g, mus[idx[0]], mus[idx[0] + 1], xtol=1e-14)


@_timed(6, "new integer states exist and are non-degenerate", 60)
def new_states():
    lam = 0.5
    mu = locate_f_root(5, lam)
    if mu is None:
        return False, "no root of F_5 found"
    energy = 5 - lam * lam
    ev = oracle.eigenvalues_below(lam, mu, energy + 1.0, N=400).eigenvalues
    delta = float(np.min(np.abs(ev - energy)))
    mult = oracle.multiplicity_at(energy, lam, mu, N=400, tol=1e-6)
    judd = abs(judd_condition(5, lam, mu).normalized)
    ok = 0.1 <= lam <= 1 and 0 < mu < 6 and delta <= 1e-6 and mult == 1 and judd > 1e3 * ROOT_TOL
    return ok, f"root (0.5, {mu:.10f}); oracle |dE| {delta:.1e}, multiplicity {mult}, |Judd| {judd:.2e}"


@_timed(7, "F_5 crosses lambda->0 near mu = 6, 7, 8", 30)
def f_small_lambda():
    mus = np.linspace(0.05, 9.5, 2000)
    v, s = f_array(5, 1e-3, mus)
    f = v / s
    idx = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]
    roots = [float(0.5 * (mus[i] + mus[i + 1])) for i in idx]
    dists = [min(abs(r - m) for r in roots) if roots else math.inf for m in (6, 7, 8)]
    return all(d <= 0.05 for d in dists), f"sign changes at {[round(r, 4) for r in roots]}"


@_timed(8, "avoided crossing in the mu=3.75 inset window", 120)
def avoided_crossing_inset():
    mu, lw, ew = 3.75, (0.806, 0.817), (3.835, 3.850)
    curves = window_curves(mu, lw, ew, lam_step=1e-4)
    in_window = [
        c
        for c in curves.curves
        if np.any((c[:, 0] >= lw[0]) & (c[:, 0] <= lw[1]) & (c[:, 1] >= ew[0]) & (c[:, 1] <= ew[1]))
    ]
    _, g1 = min_gap(curves, lw, ew)
    _, g2 = min_gap(window_curves(mu, lw, ew, lam_step=5e-5), lw, ew)
    lam_star, g_ref = avoided_crossing(mu, lw, ew)
    stable = abs(g2 - g1) <= 0.1 * g1
    # oracle pointwise on every curve vertex inside the window
    worst = 0.0
    for c in in_window:
        sel = c[(c[:, 1] >= ew[0] - 0.01) & (c[:, 1] <= ew[1] + 0.01)]
        for lam, e in sel:
            ev = oracle.eigenvalues(lam, mu, N=400, k=24, check=False).eigenvalues
            worst = max(worst, float(np.min(np.abs(ev - e))))
    conv = oracle.eigenvalues(lam_star, mu, N=400, k=24).converged_count == 24
    ok = len(in_window) == 2 and g1 > 0 and g2 > 0 and g_ref > 0 and stable and worst <= 1e-6 and conv
    return ok, (
        f"{len(in_window)} curves, gap {g1:.4e} (step 1e-4), {g2:.4e} (step 5e-5), "
        f"refined {g_ref:.6e} at lambda {lam_star:.6f}; oracle max |dE| {worst:.1e}"
    )


def _roots_in_mu(fn, mus):
    vals = np.array([fn(m) for m in mus])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    return [optimize.brentq(fn, mus[i], mus[i + 1], xtol=1e-13) for i in idx]


@_timed(9, "w(1/2) and F_5 vanish together", 30)
def condition_agreement():
    mus = np.linspace(0.05, 9.0, 300)
    worst, counts = 0.0, []
    ok = True
    for lam in (0.2, 0.5, 0.8):
        rf = _roots_in_mu(lambda m: new_state_condition_F(5, lam, m).normalized, mus)
        rw = _roots_in_mu(lambda m: wronskian_form_w(5, lam, m).normalized, mus)
        counts.append(len(rf))
        if len(rf) != len(rw) or not rf:
            ok = False
            continue
        worst = max(worst, float(np.max(np.abs(np.array(rf) - np.array(rw)))))
    ok = ok and worst <= 1e-8
    return ok, f"root counts {counts}, max |d mu| {worst:.1e}"


@_timed(10, "sign symmetry lambda->-lambda, mu->-mu", 10)
def symmetry():
    rng = np.random.default_rng(10)
    m = 1000
    lam, mu = rng.uniform(0.05, 1.2, m), rng.uniform(0.05, 6, m)
    x = rng.uniform(-1.5, 6.5, m)
    x = np.where(np.abs(x - np.round(x)) < 1e-3, x + 0.01, x)
    n = int(rng.integers(1, 7))
    bad = 0
    ref = (wronskian_array(x, lam, mu)[0], f_array(n, lam, mu)[0], judd_array(n, lam, mu)[0])
    for sl, sm in ((-1, 1), (1, -1), (-1, -1)):
        got = (wronskian_array(x, sl * lam, sm * mu)[0], f_array(n, sl * lam, sm * mu)[0], judd_array(n, sl * lam, sm * mu)[0])
        bad += sum(int(np.sum(~((a == b) | (np.isnan(a) & np.isnan(b))))) for a, b in zip(ref, got))
    # scalar entry points on a subset
    for i in range(100):
        k = 1 + i % 6
        pts = [(lam[i], mu[i]), (-lam[i], mu[i]), (lam[i], -mu[i]), (-lam[i], -mu[i])]
        vals = {
            (
                wronskian_W(RabiPoint(x[i], a, b)).value,
                new_state_condition_F(k, a, b).value,
                judd_condition(k, a, b).value,
            )
            for a, b in pts
        }
        bad += len(vals) - 1
    return bad == 0, f"{bad} mismatches (1000 array points x 3 flips, 100 scalar points)"


@_timed(11, "Wronskian independent of the matching point", 30)
def point_independence():
    rng = np.random.default_rng(11)
    ys = (0.4, 0.5, 0.6)
    inconsistent = 0
    for _ in range(50):
        x = rng.uniform(-1.0, 6.0)
        while abs(x - round(x)) < 0.01:
            x = rng.uniform(-1.0, 6.0)
        lam, mu = rng.uniform(0.1, 1.0), rng.uniform(0.5, 4.0)
        signs = {np.sign(wronskian_array(x, lam, mu, y)[0]) for y in ys}
        inconsistent += len(signs) != 1
    worst = 0.0
    n_roots = 0
    for lam, mu in ((0.7, 1.0), (0.5, 3.75), (0.3, 2.0)):
        for p in scan_spectrum(lam, mu, -1.0, 6.0, ScanConfig()):
            if p.kind.kind.value != "generic":
                continue
            n_roots += 1
            for y in ys:
                w, s = wronskian_array(p.pt.x, lam, mu, y)
                worst = max(worst, abs(float(w / s)))
    ok = inconsistent == 0 and worst <= ROOT_TOL
    return ok, f"{inconsistent}/50 sign-inconsistent; {n_roots} roots, max |w|/scale {worst:.1e}"


CHECKS = [
    lambda_zero,
    mu_zero,
    judd_one,
    judd_five_ovals,
    oracle_bijection,
    new_states,
    f_small_lambda,
    avoided_crossing_inset,
    condition_agreement,
    symmetry,
    point_independence,
]


def figure_checks() -> list[CheckResult]:
    """Regenerate all four figure bundles into a scratch directory."""
    from .figures import FIGURES

    out = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, (name, fn) in enumerate(FIGURES.items(), start=12):
            t0 = time.perf_counter()
            b = fn(Path(tmp) / name)
            dt = time.perf_counter() - t0
            if name == "fig1a":
                ok = b.summary["curves"] > 0
            elif name == "fig1b":
                ok = b.summary["J_curves"] == 5 and b.summary["F_curves"] > 0
            elif name == "fig1c":
                ok = b.summary["levels"] > 0
            else:
                ok = b.summary["gap"] > 0
            out.append(CheckResult(i, f"figure {name}", ok, str(b.summary), dt))
    return out


def run(suite: str = "quick") -> list[CheckResult]:
    if suite not in ("quick", "full"):
        raise ValueError(f"unknown suite {suite!r}")
    results = [check() for check in CHECKS]
    if suite == "full":
        results += figure_checks()
    return results
