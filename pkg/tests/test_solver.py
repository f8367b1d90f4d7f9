import warnings

import numpy as np
import pytest

from rabi_spectra import oracle
from rabi_spectra.conditions import Kind
from rabi_spectra.errors import CurveCountMismatch, GridTooCoarse
from rabi_spectra.solver import (
    Condition,
    CurveSet,
    ScanConfig,
    attach_oracle,
    energy_curves,
    min_gap,
    scan_spectrum,
    trace_level_set,
)


def energies(points):
    out = []
    for p in points:
        out += [p.energy] * p.kind.degeneracy
    return np.sort(out)


def test_analytic_branch_at_lambda_zero():
    pts = scan_spectrum(0.0, 0.6, 0.0, 4.0)
    got = [p.energy for p in pts]
    assert got == pytest.approx([0.4, 0.6, 1.4, 1.6, 2.4, 2.6, 3.4, 3.6], abs=1e-15)
    assert all(p.kind.kind is Kind.ANALYTIC for p in pts)


def test_mu_zero_is_doubly_degenerate():
    pts = scan_spectrum(0.5, 0.0, -0.5, 3.5)
    assert [p.pt.x for p in pts] == [0.0, 1.0, 2.0, 3.0]
    assert all(p.kind.degeneracy == 2 for p in pts)
    assert pts[0].energy == -0.25


def test_empty_range():
    with pytest.raises(ValueError):
        scan_spectrum(0.7, 1.0, 6.0, 0.0)


def test_matches_oracle_example():
    lam, mu = 0.7, 1.0
    pts = scan_spectrum(lam, mu, 0.0, 6.0)
    ev = oracle.eigenvalues_below(lam, mu, 6.0 - lam * lam).eigenvalues
    ev = ev[ev >= -lam * lam]
    np.testing.assert_allclose(energies(pts), ev, atol=1e-7)


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0, 3.75])
def test_completeness_against_oracle(lam, mu):
    pts = scan_spectrum(lam, mu, -2.0 + lam * lam, 6.0 + lam * lam)
    ev = oracle.eigenvalues_below(lam, mu, 6.0).eigenvalues
    ev = ev[ev >= -2.0]
    got = energies(pts)
    assert len(got) == len(ev)
    np.testing.assert_allclose(got, ev, atol=1e-6)


def test_judd_point_reported_once():
    pts = scan_spectrum(0.4, 0.6, 0.5, 1.5)
    judd = [p for p in pts if p.kind.kind is Kind.JUDD]
    assert len(judd) == 1
    assert judd[0].pt.x == 1.0 and judd[0].kind.degeneracy == 2


def test_integer_points_sit_exactly_on_baselines():
    lam = 0.5
    mu = 5.769583662906  # near an F_5 root
    pts = scan_spectrum(lam, mu, 4.5, 5.5, ScanConfig(cond_tol=1e-6))
    ints = [p for p in pts if p.kind.kind is Kind.NEW_INTEGER]
    assert len(ints) == 1 and ints[0].pt.x == 5.0


def test_residuals_within_root_tolerance():
    for p in scan_spectrum(0.5, 3.75, -1.0, 6.0):
        if p.kind.kind is Kind.GENERIC:
            assert p.condition_residual <= 1e-10


def test_halving_grid_step_changes_nothing():
    a = scan_spectrum(0.7, 1.0, 0.0, 6.0, ScanConfig(grid_step=0.02))
    b = scan_spectrum(0.7, 1.0, 0.0, 6.0, ScanConfig(grid_step=0.01))
    assert len(a) == len(b)
    assert max(abs(p.pt.x - q.pt.x) for p, q in zip(a, b)) <= 1e-12


def test_bisection_refiner_agrees():
    a = scan_spectrum(0.5, 3.75, 0.0, 5.0)
    b = scan_spectrum(0.5, 3.75, 0.0, 5.0, ScanConfig(bracket_refiner="bisection"))
    assert max(abs(p.pt.x - q.pt.x) for p, q in zip(a, b)) <= 1e-11


def test_close_pair_triggers_grid_warning():
    lam = 0.81126486
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pts = scan_spectrum(lam, 3.75, 3.5 + lam * lam, 4.2 + lam * lam)
    assert any(issubclass(w.category, GridTooCoarse) for w in caught)
    ev = oracle.eigenvalues_below(lam, 3.75, 4.2).eigenvalues
    np.testing.assert_allclose(energies(pts), ev[ev > 3.5], atol=1e-9)


def test_attach_oracle_fills_deltas():
    pts = attach_oracle(scan_spectrum(0.7, 1.0, 0.0, 3.0), 0.7, 1.0)
    assert all(p.oracle_delta is not None and p.oracle_delta < 1e-9 for p in pts)


def test_threads_do_not_change_results(monkeypatch):
    ref = energy_curves(1.0, (0.0, 0.3), (-1.0, 2.0), ScanConfig(lam_step=0.02))
    monkeypatch.setenv("RABI_SPECTRA_THREADS", "3")
    par = energy_curves(1.0, (0.0, 0.3), (-1.0, 2.0), ScanConfig(lam_step=0.02))
    assert len(ref.levels) == len(par.levels)
    for a, b in zip(ref.levels.curves, par.levels.curves):
        assert np.array_equal(a, b)


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(grid_step=0)
    with pytest.raises(ValueError):
        ScanConfig(root_tol=-1)
    with pytest.raises(ValueError):
        ScanConfig(bracket_refiner="newton")


@pytest.fixture(scope="module")
def resonant():
    return energy_curves(1.0, (0.0, 1.8), (-1.0, 4.0), ScanConfig(lam_step=0.01))


def test_energy_curves_single_valued(resonant):
    for c in resonant.levels.curves:
        assert np.all(np.diff(c[:, 0]) > 0)


def test_judd_and_new_points_on_baselines(resonant):
    assert len(resonant.judd_points) >= 4
    assert len(resonant.new_points) >= 2  # first two at lambda ~ 1.16 and 1.61
    for lam, e in np.vstack([resonant.judd_points, resonant.new_points]):
        x = e + lam * lam
        assert abs(x - round(x)) <= 1e-12


def test_new_points_are_nondegenerate(resonant):
    for lam, e in resonant.new_points:
        assert oracle.multiplicity_at(e, lam, 1.0) == 1


def test_baselines_labelled(resonant):
    assert all(label.startswith("baseline n=") for label in resonant.baselines.labels)


def test_judd_five_ovals():
    cs = trace_level_set(Condition.judd(5), (1e-3, 1.2), (1e-3, 6.0))
    assert len(cs) == 5
    assert cs.label == "J_5"


def test_f5_has_more_branches_than_judd_in_tall_window():
    f = trace_level_set(Condition.f(5), (1e-3, 1.2), (1e-3, 12.0), (241, 481))
    j = trace_level_set(Condition.judd(5), (1e-3, 1.2), (1e-3, 12.0), (241, 481))
    assert len(f) > len(j)
    # branches reach the lambda -> 0 edge near integer mu
    ends = [c[np.argmin(c[:, 0])] for c in f.curves if c[:, 0].min() < 0.01]
    assert any(abs(m - round(m)) < 0.05 for _, m in ends)


def test_wronskian_level_set_nonempty_and_on_spectrum():
    x = 2 + np.pi
    cs = trace_level_set(Condition.wronskian(x), (1e-3, 1.0), (1e-3, 4.0))
    assert len(cs) > 0
    c = cs.curves[0]
    lam, mu = c[len(c) // 2]
    ev = oracle.eigenvalues_below(lam, mu, x).eigenvalues
    assert np.min(np.abs(ev - (x - lam * lam))) < 1e-6


def test_wronskian_condition_rejects_integers():
    with pytest.raises(ValueError):
        Condition.wronskian(3.0)


def test_min_gap_degenerate_inputs():
    lam = np.linspace(0.1, 0.9, 50)
    e = 2 - lam**2
    cs = CurveSet([np.column_stack([lam, e])] * 2, "lambda-E", "mu=0 pair")
    assert min_gap(cs, (0.0, 1.0), (0.0, 3.0))[1] == 0.0


def test_min_gap_needs_two_curves():
    lam = np.linspace(0.1, 0.9, 10)
    cs = CurveSet([np.column_stack([lam, lam + k]) for k in range(3)], "lambda-E", "three")
    with pytest.raises(CurveCountMismatch):
        min_gap(cs, (0.0, 1.0), (0.0, 5.0))
