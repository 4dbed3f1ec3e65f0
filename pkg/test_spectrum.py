"""
Tests for Sturm counting, the integrated density of states, spectrum scans
and rational surrogates.
"""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given, settings, strategies as st

from arithmetic import golden
from errors import DomainError
from spectrum import (SpectrumApproximation, SpectrumParams, TridiagonalOperator, brute_force_count, band_edges,
                      discriminant, energy_grid, hausdorff_distance, ids, ids_from_rotation, merge_intervals,
                      merge_runs, rational_spectrum, spectrum_intervals, spectrum_member, sturm_count,
                      truncated_tridiagonal)

ALPHA = golden()

FAST = SpectrumParams(n_iter=500, n_phases=4, seed=0, ids_size=200)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=8), st.floats(-5.0, 5.0))
def test_sturm_count_matches_eigensolve(diagonal, energy):
    t = TridiagonalOperator(np.array(diagonal))
    eigenvalues = scipy.linalg.eigvalsh(t.dense())
    assume(np.min(np.abs(eigenvalues - energy)) > 1e-9)
    assert sturm_count(t, energy) == brute_force_count(t, energy)


def test_sturm_count_vectorized():
    t = truncated_tridiagonal(0.5, ALPHA, 0.1, 40)
    energies = np.array([-10.0, 0.0, 10.0])
    counts = sturm_count(t, energies)
    assert list(counts) == [0, brute_force_count(t, 0.0), 40]


def test_tridiagonal_operator_basics():
    t = TridiagonalOperator(np.array([1.0, -2.0, 0.5]))
    assert t.size == 3
    assert t.norm_bound == 4.0
    assert np.array_equal(t.dense(), [[1.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, 0.5]])
    with pytest.raises(DomainError):
        truncated_tridiagonal(0.5, ALPHA, 0.0, 0)


def test_truncated_tridiagonal_diagonal():
    t = truncated_tridiagonal(1.0, ALPHA, 0.0, 2)
    assert t.diagonal == pytest.approx([2.0, -1.4721], abs=1e-4)


@pytest.mark.parametrize("diagonal, energy, expected", [([0.0], 1.0, 1), ([0.0, 0.0, 0.0], 1.0, 2)])
def test_sturm_count_small_sections(diagonal, energy, expected):
    assert sturm_count(TridiagonalOperator(np.array(diagonal)), energy) == expected


@pytest.mark.parametrize("lam", [0.0, 0.5])
def test_ids_at_band_center(lam):
    assert ids(lam, ALPHA, 0.0) == pytest.approx(0.5, abs=0.01)


def test_ids_is_monotone_and_bounded():
    energies = np.linspace(-5.0, 5.0, 81)
    values = ids(0.5, ALPHA, energies, n=200, n_phases=4)
    assert np.all(np.diff(values) >= 0)
    assert values[0] == 0.0
    assert values[-1] == 1.0


def test_ids_needs_large_sections():
    with pytest.raises(DomainError):
        ids(0.5, ALPHA, 0.0, n=50)


@pytest.mark.parametrize("energy", [-2.2, -1.0, 0.0, 0.7, 1.9])
def test_ids_agrees_with_rotation_number(energy):
    from_sturm = ids(0.5, ALPHA, energy, n=2000, n_phases=8)
    from_rotation = ids_from_rotation(0.5, ALPHA, energy, n_iter=20000)
    assert from_sturm == pytest.approx(from_rotation, abs=0.01)


@pytest.mark.slow
def test_ids_agrees_with_rotation_number_on_a_grid():
    energies = np.linspace(-3.0, 3.0, 200)
    from_sturm = ids(0.5, ALPHA, energies, n=2000)
    from_rotation = ids_from_rotation(0.5, ALPHA, energies, n_iter=100000)
    assert np.max(np.abs(from_sturm - from_rotation)) < 0.01


@pytest.mark.parametrize("energy", [0.3, 0.82, 1.7, 2.5])
def test_ids_is_symmetric_about_zero(energy):
    values = ids_from_rotation(0.5, ALPHA, np.array([energy, -energy]), n_iter=50000)
    assert values[0] + values[1] == pytest.approx(1.0, abs=1e-3)


def test_spectrum_member_verdicts():
    assert spectrum_member(0.5, ALPHA, 0.0, FAST).member
    outside = spectrum_member(0.5, ALPHA, 4.0, FAST)
    assert not outside.member
    assert outside.margin > 0


def test_spectrum_member_free_operator():
    assert spectrum_member(0.0, ALPHA, 1.0, FAST).member
    assert not spectrum_member(0.0, ALPHA, 3.0, FAST).member


def test_spectrum_intervals_small_scan():
    approx = spectrum_intervals(0.5, ALPHA, step=0.05, params=FAST)
    assert approx.energies[0] <= -3.0 and approx.energies[-1] >= 3.0
    assert approx.member[np.argmin(np.abs(approx.energies))]
    assert not np.any(approx.member[np.abs(approx.energies) > 3.0])
    assert np.all(np.diff(approx.ids) >= 0)
    lows = [lo for lo, _ in approx.intervals]
    assert lows == sorted(lows)
    for (_, hi), (lo, _) in zip(approx.intervals[:-1], approx.intervals[1:]):
        assert hi < lo
    assert len(approx.csv_rows()) == approx.energies.size
    assert approx.cell_ids.shape == (approx.energies.size + 1,)
    assert np.all(np.diff(approx.cell_ids) >= 0)


def test_ids_growth_credits_each_cell_once():
    energies = np.arange(5, dtype=float)
    member = np.array([0, 1, 1, 0, 0], dtype=bool)
    cell_ids = np.array([0.0, 0.0, 0.4, 0.8, 0.8, 0.8005])
    zeros = np.zeros(5)
    scan = SpectrumApproximation(0.5, ALPHA, 1.0, energies, member, zeros, member & False, zeros,
                                 merge_runs(energies, member), cell_ids)
    assert list(scan.ids_member(1e-3)) == [False, True, True, False, False]
    assert scan.johnson_agreement(1e-3) == 1.0
    assert scan.johnson_agreement(1.0) == pytest.approx(0.6)


def test_ids_growth_needs_cell_ids():
    approx = spectrum_intervals(0.5, ALPHA, step=0.05, params=FAST, with_ids=False)
    assert approx.cell_ids is None
    with pytest.raises(DomainError):
        approx.ids_member(1e-3)


@pytest.fixture(scope='module')
def golden_scan():
    return spectrum_intervals(0.5, ALPHA, E_grid=np.linspace(-3.0, 3.0, 1001))


@pytest.mark.slow
def test_uh_and_ids_growth_agree(golden_scan):
    assert golden_scan.johnson_agreement() >= 0.99
    growth = golden_scan.ids_member()
    changes = np.flatnonzero(np.diff(golden_scan.member.astype(np.int8)))
    for i in np.flatnonzero(growth != golden_scan.member):
        assert np.min(np.abs(changes - i)) <= 2


@pytest.mark.slow
def test_spectrum_is_symmetric(golden_scan):
    mirrored = [(-hi, -lo) for lo, hi in reversed(golden_scan.intervals)]
    assert hausdorff_distance(golden_scan.intervals, mirrored) <= 5 * golden_scan.step


@pytest.mark.slow
def test_rational_surrogate_is_close_to_golden_spectrum(golden_scan):
    assert hausdorff_distance(rational_spectrum(0.5, 13, 21), golden_scan.intervals) < 0.05


@pytest.mark.parametrize("grid", [
    np.array([-4.0, -3.0, 0.0, 4.0]),
    np.linspace(-2.0, 2.0, 101),
    np.array([0.0]),
])
def test_spectrum_intervals_rejects_bad_grids(grid):
    with pytest.raises(DomainError):
        spectrum_intervals(0.5, ALPHA, grid, FAST)


def test_spectrum_intervals_needs_grid_or_step():
    with pytest.raises(DomainError):
        spectrum_intervals(0.5, ALPHA)


def test_energy_grid_covers_bound():
    grid = energy_grid(1.0, 0.1)
    assert grid[0] == -4.0
    assert grid[-1] >= 4.0 - 1e-12
    assert np.allclose(np.diff(grid), 0.1)


def test_merge_runs():
    energies = np.arange(8, dtype=float)
    member = np.array([1, 1, 0, 0, 1, 0, 1, 1], dtype=bool)
    assert merge_runs(energies, member) == [(0.0, 1.0), (4.0, 4.0), (6.0, 7.0)]


def test_merge_intervals():
    assert merge_intervals([(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)]) == [(0.0, 1.5), (2.0, 3.0)]


def test_single_band_for_constant_potential():
    assert rational_spectrum(0.5, 0, 1) == [pytest.approx((-1.0, 3.0))]


def test_rational_bands_match_discriminant():
    edges = band_edges(0.5, 1, 3, 0.0)
    assert edges.shape == (3, 2)
    assert np.allclose(np.abs(discriminant(0.5, 1, 3, 0.0, edges.ravel())), 2.0, atol=1e-8)
    mids = edges.mean(axis=1)
    assert np.all(np.abs(discriminant(0.5, 1, 3, 0.0, mids)) <= 2.0 + 1e-9)


def test_rational_spectrum_band_count():
    bands = rational_spectrum(0.5, 2, 5, theta_samples=[0.0])
    assert 1 <= len(bands) <= 5
    with pytest.raises(DomainError):
        rational_spectrum(0.5, 2, 4)


@pytest.mark.parametrize("a, b, expected", [
    ([(0.0, 1.0)], [(0.0, 1.0)], 0.0),
    ([(0.0, 1.0)], [(0.0, 2.0)], 1.0),
    ([(0.0, 1.0), (3.0, 4.0)], [(0.0, 4.0)], 1.0),
    ([(0.0, 0.0)], [(5.0, 6.0)], 6.0),
])
def test_hausdorff_distance(a, b, expected):
    assert hausdorff_distance(a, b) == pytest.approx(expected)
    assert hausdorff_distance(b, a) == pytest.approx(expected)


def test_hausdorff_needs_intervals():
    with pytest.raises(DomainError):
        hausdorff_distance([], [(0.0, 1.0)])


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
