"""Canned parameter sets for the four reference figures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report
from .solver import (
    Condition,
    CurveSet,
    ScanConfig,
    avoided_crossing,
    energy_curves,
    trace_level_set,
    window_curves,
)

FIG2_MU = 3.75
FIG2_INSET = ((0.806, 0.817), (3.835, 3.850))


@dataclass
class FigureBundle:
    name: str
    files: list[Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _finish(bundle: FigureBundle, outdir: Path, groups, xlabel, ylabel, title, ranges=None):
    script = outdir / f"{bundle.name}.gp"
    script.write_text(report.gnuplot_script(groups, xlabel, ylabel, title, f"{bundle.name}_gnuplot.png", ranges))
    bundle.files.append(script)


def fig1a(outdir: Path, plot: bool = False, cfg=None, resolution=(241, 241)) -> FigureBundle:
    b = FigureBundle("fig1a")
    cs = trace_level_set(Condition.wronskian(2 + math.pi), (1e-3, 1.0), (1e-3, 4.0), resolution)
    files = report.write_curves(cs, outdir, "fig1a_sx")
    b.files += files
    b.summary = {"curves": len(cs), "x": 2 + math.pi}
    _finish(b, outdir, [(files, "solid", cs.label)], "lambda", "mu", "S_x, x = 2 + pi")
    if plot:
        from .plotting import plot_level_sets

        b.files.append(plot_level_sets([(cs, "solid")], outdir / "fig1a.png", title="$x = 2 + \\pi$"))
    return b


def fig1b(outdir: Path, plot: bool = False, cfg=None, n: int = 5, resolution=(241, 321)) -> FigureBundle:
    b = FigureBundle("fig1b")
    lw, mw = (1e-3, 1.2), (1e-3, 8.0)
    f = trace_level_set(Condition.f(n), lw, mw, resolution)
    j = trace_level_set(Condition.judd(n), lw, mw, resolution)
    ff = report.write_curves(f, outdir, f"fig1b_F{n}")
    jf = report.write_curves(j, outdir, f"fig1b_J{n}")
    b.files += ff + jf
    b.summary = {"F_curves": len(f), "J_curves": len(j), "n": n}
    _finish(b, outdir, [(ff, "solid", f.label), (jf, "dashed", j.label)], "lambda", "mu", f"F_{n} and J_{n}")
    if plot:
        from .plotting import plot_level_sets

        b.files.append(plot_level_sets([(f, "solid"), (j, "dashed")], outdir / "fig1b.png"))
    return b


def _spectrum_bundle(name, mu, lam_range, e_range, outdir, cfg, half=False):
    b = FigureBundle(name)
    ec = energy_curves(mu, lam_range, e_range, cfg)
    lf = report.write_curves(ec.levels, outdir, f"{name}_level")
    bf = report.write_curves(ec.baselines, outdir, f"{name}_baseline")
    jp = report.write_points(ec.judd_points, outdir / f"{name}_judd.dat", "Judd points: lambda E")
    npf = report.write_points(ec.new_points, outdir / f"{name}_new.dat", "new integer points: lambda E")
    b.files += lf + bf + [jp, npf]
    groups = [(bf, "dashed", "baselines"), (lf, "solid", "levels"), ([jp, npf], "points", "integer points")]
    hb = None
    if half:
        lam = np.linspace(*lam_range, 200)
        curves, labels = [], []
        for n in range(0, math.ceil(e_range[1] + lam_range[1] ** 2) + 1):
            e = n + 0.5 - lam**2
            keep = (e >= e_range[0]) & (e <= e_range[1])
            if np.any(keep):
                curves.append(np.column_stack([lam[keep], e[keep]]))
                labels.append(f"baseline n={n}.5")
        hb = CurveSet(curves, "lambda-E", "half-integer baselines", labels)
        hf = report.write_curves(hb, outdir, f"{name}_halfbaseline")
        b.files += hf
        groups.insert(1, (hf, "dotted", "half-integer baselines"))
    b.summary = {
        "levels": len(ec.levels),
        "judd_points": len(ec.judd_points),
        "new_points": len(ec.new_points),
        "chain_breaks": len(ec.chain_breaks),
    }
    return b, ec, groups, hb


FIG1C_LAMBDA = (0.0, 2.3)  # at mu = 1 the first non-degenerate integer states sit at lambda > 1


def fig1c(outdir: Path, plot: bool = False, cfg: ScanConfig | None = None) -> FigureBundle:
    lam_range, e_range = FIG1C_LAMBDA, (-1.0, 4.0)
    b, ec, groups, _ = _spectrum_bundle("fig1c", 1.0, lam_range, e_range, outdir, cfg)
    _finish(b, outdir, groups, "lambda", "E", "spectrum, mu = 1", (lam_range, e_range))
    if plot:
        from .plotting import plot_energy_curves

        b.files.append(plot_energy_curves(ec, outdir / "fig1c.png", title="$\\mu = 1$"))
    return b


def fig2(outdir: Path, plot: bool = False, cfg: ScanConfig | None = None) -> FigureBundle:
    lam_range, e_range = (0.0, 1.0), (-4.0, 6.0)
    b, ec, groups, hb = _spectrum_bundle("fig2", FIG2_MU, lam_range, e_range, outdir, cfg, half=True)
    _finish(b, outdir, groups, "lambda", "E", "spectrum, mu = 3.75", (lam_range, e_range))
    lw, ew = FIG2_INSET
    lam_star, gap = avoided_crossing(FIG2_MU, lw, ew, cfg=cfg)
    inset = window_curves(FIG2_MU, lw, ew, cfg=cfg)
    inf = report.write_curves(inset, outdir, "fig2_inset")
    b.files += inf
    gap_csv = outdir / "fig2_gap.csv"
    gap_csv.write_text(
        report.write_rows(
            [{"mu": FIG2_MU, "lambda_star": lam_star, "E_star": _e_at(inset, lam_star), "gap": gap}],
            ["mu", "lambda_star", "E_star", "gap"],
        )
    )
    b.files.append(gap_csv)
    b.summary.update({"lambda_star": lam_star, "gap": gap})
    if plot:
        from .plotting import plot_energy_curves

        b.files.append(
            plot_energy_curves(
                ec,
                outdir / "fig2.png",
                title="$\\mu = 3\\frac{3}{4}$",
                half_baselines=hb,
                inset=(lw, ew, inset),
                marker=(lam_star, _e_at(inset, lam_star)),
            )
        )
    return b


def _e_at(cs: CurveSet, lam: float) -> float:
    """Midpoint energy of the two curves at ``lam``."""
    es = []
    for c in cs.curves:
        c = c[np.argsort(c[:, 0])]
        if c[0, 0] <= lam <= c[-1, 0]:
            es.append(float(np.interp(lam, c[:, 0], c[:, 1])))
    es.sort()
    if len(es) >= 2:
        # the closest pair straddles the crossing point
        i = int(np.argmin(np.diff(es)))
        return 0.5 * (es[i] + es[i + 1])
    return es[0] if es else float("nan")


FIGURES = {"fig1a": fig1a, "fig1b": fig1b, "fig1c": fig1c, "fig2": fig2}
