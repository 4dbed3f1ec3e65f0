"""
Tests for gap detection, labelling, the all-labels-open report and the
duality check.
"""

import numpy as np
import pytest

from arithmetic import golden, silver
from cocycle import UHScan
from errors import AmbiguousLabelError, DomainError, GapInconsistencyError, NoLabelError
import gaps
from gaps import (SpectralGap, _label_order, _multisection, detect_gaps, doubled_rotation_residual,
                  dry_martini_check, duality_check, gap_edge_probe, label_gap)
from spectrum import SpectrumApproximation, SpectrumParams, ids_from_rotation, merge_runs, spectrum_intervals

ALPHA = golden()
TWO_ALPHA = float(np.mod(2 * ALPHA.value, 1.0))


def test_label_order():
    assert list(_label_order(3)) == [1, -1, 2, -2, 3, -3]


@pytest.mark.parametrize("value, k", [(0.236068, 2), (1.0 - 0.236068, -2), (0.618034, 1), (0.381966, -1)])
def test_label_gap(value, k):
    label, residual = label_gap(value, ALPHA)
    assert label == k
    assert residual < 1e-5


def test_label_gap_without_match():
    with pytest.raises(NoLabelError):
        label_gap(0.05, ALPHA, k_max=2)


def test_label_gap_ambiguous():
    with pytest.raises(AmbiguousLabelError):
        label_gap(0.5, ALPHA, k_max=2, tol=0.5)


@pytest.mark.parametrize("value", [0.0, 1.0, -0.2])
def test_label_gap_rejects_values_outside_unit_interval(value):
    with pytest.raises(DomainError):
        label_gap(value, ALPHA)


def test_spectral_gap():
    gap = SpectralGap(-0.5, 0.5, 0.3)
    assert gap.width == 1.0
    assert gap.midpoint == 0.0
    assert gap.to_dict()['label'] is None
    with pytest.raises(DomainError):
        SpectralGap(1.0, 0.5, 0.3)


def test_multisection_brackets_threshold():
    lo, hi = _multisection(lambda e: e >= 0.3, 0.0, 1.0, 1e-3, 11)
    assert lo < 0.3 <= hi
    assert hi - lo <= 1e-3
    assert _multisection(lambda e: e >= -1.0, 0.0, 1.0, 1e-3, 11) == (0.0, 0.0)


def _scan(holes, ids_values=None):
    energies = np.round(np.linspace(-1.0, 1.0, 201), 10)
    member = np.ones(energies.shape, dtype=bool)
    for lo, hi in holes:
        member &= ~((energies >= lo) & (energies <= hi))
    density = np.clip(0.5 + 0.5 * energies, 0.0, 1.0) if ids_values is None else ids_values(energies)
    zeros = np.zeros(energies.shape)
    return SpectrumApproximation(1.0, ALPHA, 0.01, energies, member, zeros, zeros.astype(bool),
                                 density, merge_runs(energies, member))


def _plateau(lo, hi, value):
    def build(energies):
        density = np.clip(0.5 + 0.5 * energies, 0.0, 1.0)
        density[(energies > lo) & (energies < hi)] = value
        return density
    return build


def test_detect_gaps_labels_plateau():
    scan = _scan([(-0.455, -0.345)], _plateau(-0.46, -0.34, TWO_ALPHA))
    gaps = detect_gaps(scan, alpha=ALPHA, k_max=5)
    assert len(gaps) == 1
    gap = gaps[0]
    assert gap.e_minus == pytest.approx(-0.46)
    assert gap.e_plus == pytest.approx(-0.34)
    assert gap.ids_value == pytest.approx(TWO_ALPHA)
    assert gap.label == 2


def test_detect_gaps_skips_narrow_gaps():
    scan = _scan([(-0.455, -0.345), (0.495, 0.505)])
    gaps = detect_gaps(scan, min_width=0.05, ids_tol=1.0)
    assert len(gaps) == 1
    assert gaps[0].label is None


def test_detect_gaps_uses_ids_function():
    scan = _scan([(-0.455, -0.345)])
    gaps = detect_gaps(scan, ids_fn=lambda e: np.full(e.shape, 0.25))
    assert gaps[0].ids_value == 0.25


def test_detect_gaps_rejects_sloped_ids():
    scan = _scan([(-0.455, -0.345)])
    with pytest.raises(GapInconsistencyError):
        detect_gaps(scan)


def test_detect_gaps_rejects_ids_drift_above_tolerance():
    scan = _scan([(-0.455, -0.345)])
    with pytest.raises(GapInconsistencyError):
        detect_gaps(scan, ids_fn=lambda e: np.linspace(0.3, 0.3015, e.size))
    gaps_found = detect_gaps(scan, ids_fn=lambda e: np.linspace(0.3, 0.3009, e.size))
    assert len(gaps_found) == 1


def test_intervals_and_gaps_tile_the_grid():
    scan = _scan([(-0.455, -0.345), (0.345, 0.455)])
    found = detect_gaps(scan, ids_fn=lambda e: np.full(e.shape, 0.25), min_width=0.0)
    assert len(found) == len(scan.intervals) - 1
    assert scan.intervals[0][0] == scan.energies[0]
    assert scan.intervals[-1][1] == scan.energies[-1]
    for gap, below, above in zip(found, scan.intervals[:-1], scan.intervals[1:]):
        assert gap.e_minus == below[1]
        assert gap.e_plus == above[0]


def test_detect_gaps_needs_ids():
    scan = _scan([(-0.455, -0.345)], lambda e: np.full(e.shape, np.nan))
    with pytest.raises(DomainError):
        detect_gaps(scan)


def test_detect_gaps_rejects_shared_labels():
    def two_plateaus(energies):
        density = _plateau(-0.46, -0.34, TWO_ALPHA)(energies)
        density[(energies > 0.34) & (energies < 0.46)] = TWO_ALPHA
        return density

    scan = _scan([(-0.455, -0.345), (0.345, 0.455)], two_plateaus)
    with pytest.raises(AmbiguousLabelError):
        detect_gaps(scan, alpha=ALPHA, k_max=5)


def test_dry_check_free_operator():
    report = dry_martini_check(0.0, ALPHA, 3, 0.01)
    assert [e.k for e in report.entries] == [1, -1, 2, -2, 3, -3]
    assert all(e.status == 'free-operator' for e in report.entries)
    assert not report.all_open
    assert report.flags == ('free-operator: no gaps',)


@pytest.mark.parametrize("kwargs", [
    dict(lam=-1.0, k_max=2, grid_step=0.01),
    dict(lam=0.5, k_max=0, grid_step=0.01),
    dict(lam=0.5, k_max=31, grid_step=0.01),
    dict(lam=0.5, k_max=2, grid_step=0.0),
])
def test_dry_check_rejects_bad_arguments(kwargs):
    with pytest.raises(DomainError):
        dry_martini_check(alpha=ALPHA, **kwargs)


@pytest.mark.slow
def test_dry_check_opens_first_labels():
    report = dry_martini_check(0.5, ALPHA, 1, 0.01)
    assert report.all_open
    assert report.flags == ()
    for entry in report.entries:
        assert entry.gap.label == entry.k
        assert entry.width > 0.02
        assert entry.residual < 1e-3
    rows = report.csv_rows()
    assert [row[2] for row in rows] == ['open', 'open']


def _uh_settling_at(settle_iters, calls):
    def scan(lam, alpha, energies, n_iter, n_phases=8, seed=0, **kwargs):
        calls.append(n_iter)
        energies = np.atleast_1d(np.asarray(energies, dtype=float))
        unsure = np.full(energies.shape, n_iter < settle_iters)
        margin = 0.1 - 0.01 * np.abs(energies)
        return UHScan(energies, margin, margin, np.ones(energies.shape), ~unsure, unsure)
    return scan


def test_dry_check_retries_indeterminate_verdicts(monkeypatch):
    calls = []
    monkeypatch.setattr(gaps, 'uh_scan', _uh_settling_at(10000, calls))
    report = dry_martini_check(0.5, ALPHA, 1, 0.01, params=SpectrumParams(n_iter=2000))
    assert [e.status for e in report.entries] == ['open', 'open']
    assert 10000 in calls
    assert max(calls) == 10000


def test_dry_check_reports_unsettled_verdicts_as_unresolved(monkeypatch):
    monkeypatch.setattr(gaps, 'uh_scan', _uh_settling_at(10000, []))
    report = dry_martini_check(0.5, ALPHA, 1, 0.01, params=SpectrumParams(n_iter=2000), max_uh_iters=2000)
    assert [e.status for e in report.entries] == ['unresolved', 'unresolved']
    assert not any(e.found for e in report.entries)
    assert all(e.residual is not None for e in report.entries)


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [golden(), silver()], ids=['golden', 'silver'])
@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8])
def test_dry_check_opens_labels_up_to_five(lam, alpha):
    report = dry_martini_check(lam, alpha, 5, 1e-4)
    assert report.all_open, [(e.k, e.status) for e in report.entries if not e.found]
    assert all(e.width > 1e-4 for e in report.entries)


@pytest.mark.slow
def test_edge_margins_inside_open_gap():
    report = dry_martini_check(0.5, ALPHA, 1, 0.01)
    edge = gap_edge_probe(0.5, ALPHA, report.entries[0].gap, n_tau=4)
    assert edge.mid_hyperbolic
    assert edge.rotation_constant
    assert edge.label_residual < 1e-3
    assert edge.taus.shape == (4,)
    gap = report.entries[0].gap
    assert doubled_rotation_residual(0.5, ALPHA, gap.midpoint, gap.label) < 1e-3


def test_doubled_rotation_residual_below_spectrum():
    # rho = 1/2 below the spectrum, so the residual is ||1 + alpha||
    value = doubled_rotation_residual(0.5, ALPHA, -6.0, 1, n_iter=5000)
    assert value == pytest.approx(1.0 - ALPHA.value, abs=1e-3)


def test_edge_margins_reject_bad_steps():
    with pytest.raises(DomainError):
        gap_edge_probe(0.5, ALPHA, SpectralGap(0.0, 1.0, 0.3), n_tau=0)


@pytest.fixture(scope='module')
def half_coupling_gaps():
    scan = spectrum_intervals(0.5, ALPHA, step=1e-3, with_ids=False)
    found = detect_gaps(scan, ids_fn=lambda e: ids_from_rotation(0.5, ALPHA, e, n_iter=20000),
                        alpha=ALPHA, label_tol=1e-3)
    return scan, found


@pytest.mark.slow
def test_gaps_of_a_real_scan_are_labelled(half_coupling_gaps):
    scan, found = half_coupling_gaps
    labels = [g.label for g in found]
    assert len(labels) == len(set(labels))
    assert {1, -1, 2, -2} <= set(labels)
    assert all(abs(k) <= 30 for k in labels)
    assert all(g.label_residual < 1e-3 for g in found)
    edges = {(hi, lo) for (_, hi), (lo, _) in zip(scan.intervals[:-1], scan.intervals[1:])}
    assert all((g.e_minus, g.e_plus) in edges for g in found)


@pytest.mark.slow
def test_rotation_is_constant_across_a_detected_gap(half_coupling_gaps):
    _, found = half_coupling_gaps
    widest = max(found, key=lambda g: g.width)
    result = gap_edge_probe(0.5, ALPHA, widest)
    assert result.rotation_constant
    assert result.rotation_spread <= 2.0 / 20000
    assert result.label_residual < 1e-3


def test_duality_skips_self_dual_point():
    report = duality_check(1.0, ALPHA, 0.01)
    assert report.skipped
    assert report.hausdorff is None


def test_duality_needs_supercritical_coupling():
    with pytest.raises(DomainError):
        duality_check(0.5, ALPHA, 0.01)


@pytest.mark.slow
def test_duality_at_coupling_two():
    report = duality_check(2.0, ALPHA, 1e-3)
    assert not report.skipped
    assert report.hausdorff < 5e-3
    assert report.ids_discrepancy < 0.01


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
