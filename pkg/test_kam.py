"""
Tests for Fourier truncation, resonance splitting, homological solves and
the Newton step.
"""

import numpy as np
import pytest

from arithmetic import golden, torus_distance
from cocycle import parabolic, rotation
from errors import DomainError, ResonantModeError, SmallnessGateError
from kam import (FourierSeries, ParabolicConstant, SlMatSeries, averaged_shift_matrix, averaged_shift_trace,
                 contraction_table, homological_residual, newton_step, random_sl_series, resonant_split,
                 solve_homological, solve_homological_diagonalizable, solve_homological_parabolic,
                 truncate_high, truncate_low)

ALPHA = golden()
Q_NEXT = 8


def _single(k, value, entry='y21', degree=None):
    degree = abs(k) if degree is None else degree
    parts = {name: FourierSeries.zeros(degree) for name in ('y11', 'y12', 'y21')}
    parts[entry] = FourierSeries.mode(k, value, degree)
    return SlMatSeries(**parts)


def test_truncation_splits_modes():
    f = FourierSeries(np.arange(7))
    assert np.array_equal(truncate_low(f, 2).coefficients, [0, 0, 2, 3, 4, 0, 0])
    assert np.array_equal(truncate_high(f, 2).coefficients, [0, 1, 0, 0, 0, 5, 6])
    assert np.array_equal((truncate_low(f, 2) + truncate_high(f, 2)).coefficients, f.coefficients)
    with pytest.raises(DomainError):
        truncate_low(f, -1)


def test_series_rejects_even_length():
    with pytest.raises(DomainError):
        FourierSeries(np.zeros(4))


def test_series_fit_from_samples():
    f = FourierSeries.mode(2, 0.5 + 0.25j, degree=3)
    thetas = np.arange(16) / 16
    fitted = FourierSeries.from_samples(f.evaluate(thetas), 3)
    assert np.allclose(fitted.coefficients, f.coefficients, atol=1e-14)
    assert np.allclose(f.evaluate(thetas).imag, 0.0, atol=1e-14)


def test_series_shift_and_mean_product():
    f = FourierSeries.mode(1, 0.3)
    g = f.shifted(0.25)
    assert g.evaluate(0.0) == pytest.approx(f.evaluate(0.25))
    assert f.mean_product(f).real == pytest.approx(2 * 0.3 ** 2)


def test_series_dict_round_trip():
    series = random_sl_series((1, 3), 1e-3, seed=2)
    again = SlMatSeries.from_dict(series.to_dict())
    assert np.array_equal(again.coefficient_matrices(), series.coefficient_matrices())


def test_random_series_is_real_with_requested_norm():
    series = random_sl_series((1, 2, 3), 1e-4, seed=5)
    assert series.is_real()
    assert series.norm() == pytest.approx(1e-4)
    assert series.active_modes() == frozenset({-3, -2, -1, 1, 2, 3})


def test_resonant_split():
    m = _single(1, 1e-3, degree=34) + _single(34, 1e-3, 'y12') + _single(0, 1e-3, 'y11', degree=34)
    nonresonant, resonant = resonant_split(m, ALPHA, Q_NEXT)
    assert nonresonant.active_modes() == frozenset({-1, 1})
    assert resonant.active_modes() == frozenset({-34, 0, 34})
    assert torus_distance(34 * ALPHA.value) < 1.0 / (7 * Q_NEXT)


def test_resonant_split_needs_convergent_denominator():
    with pytest.raises(DomainError):
        resonant_split(_single(1, 1e-3), ALPHA, 7)


def test_parabolic_solve_single_mode_without_shear():
    m = _single(1, 1e-3)
    solved = solve_homological_parabolic(ParabolicConstant(0.0), ALPHA, m, Q_NEXT)
    divisor = np.exp(2j * np.pi * ALPHA.value) - 1.0
    assert solved.y.y21.coefficient(1) == pytest.approx(1e-3 / divisor)
    assert solved.y.y11.norm() == 0.0
    assert solved.y.y12.norm() == 0.0
    assert solved.route == 'parabolic'


def test_parabolic_solve_residual():
    m = random_sl_series((1, 2, 3), 1e-3, seed=1)
    solved = solve_homological_parabolic(ParabolicConstant(0.1), ALPHA, m, Q_NEXT)
    assert solved.residual <= 1e-12 * m.norm()
    assert solved.residual == pytest.approx(homological_residual(parabolic(0.1), ALPHA, solved.y, m))
    assert solved.y.is_real()


def test_parabolic_solve_rejects_resonant_modes():
    with pytest.raises(ResonantModeError) as info:
        solve_homological_parabolic(ParabolicConstant(0.2), ALPHA, _single(34, 1e-3), Q_NEXT)
    assert info.value.modes == (-34, 34)
    with pytest.raises(ResonantModeError):
        solve_homological_parabolic(ParabolicConstant(0.2), ALPHA, _single(0, 1e-3, 'y11'), Q_NEXT)


def test_solution_size_stays_within_cubic_bound():
    floor = 1.0 / (7 * Q_NEXT)
    modes = [k for k in range(1, 100) if torus_distance(k * ALPHA.value) >= floor][:50]
    m = random_sl_series(modes, 1e-3, seed=3)
    solved = solve_homological_parabolic(ParabolicConstant(0.5), ALPHA, m, Q_NEXT)
    assert solved.ratio <= 10 * Q_NEXT ** 3
    assert solved.bound_ratio == pytest.approx(solved.ratio / Q_NEXT ** 3)


def test_elliptic_solve():
    m = random_sl_series((1, 2), 1e-3, seed=4)
    solved = solve_homological_diagonalizable(rotation(0.1), ALPHA, m, Q_NEXT)
    assert solved.residual <= 1e-10 * m.norm()
    assert solved.y.is_real()
    assert solved.route == 'diagonalizable'


def test_dispatch_routes_parabolic_constants_through_frame():
    c = np.array([[1.0, 0.0], [0.3, 1.0]])
    m = random_sl_series((1, 2), 1e-3, seed=6)
    solved = solve_homological(c, ALPHA, m, Q_NEXT)
    assert solved.route == 'parabolic'
    assert solved.residual <= 1e-10 * m.norm()


def test_newton_step_with_zero_perturbation():
    result = newton_step(parabolic(0.2), SlMatSeries.zeros(2), ALPHA, Q_NEXT)
    assert result.remainder_norm == 0.0
    assert result.contraction_constant == 0.0
    assert result.resonant_modes == frozenset()


def test_newton_step_is_quadratic_for_single_mode():
    f = _single(1, 1e-4)
    f = f.scaled(1e-4 / f.norm())
    result = newton_step(parabolic(0.2), f, ALPHA, Q_NEXT)
    assert result.input_norm == pytest.approx(1e-4)
    assert result.remainder_norm <= 1e-6
    assert result.resonant_modes == frozenset()
    assert result.new_perturbation.is_real()
    assert result.homological_residual <= 1e-12


def test_newton_step_keeps_resonant_modes():
    f = _single(1, 1e-5, degree=34) + _single(34, 1e-6, 'y12')
    result = newton_step(parabolic(0.2), f, ALPHA, Q_NEXT, gate=10.0)
    assert result.resonant_modes == frozenset({-34, 34})
    assert result.removed.active_modes() == frozenset({-1, 1})


def test_newton_step_gate():
    f = random_sl_series((1,), 1e-2)
    with pytest.raises(SmallnessGateError):
        newton_step(parabolic(0.2), f, ALPHA, Q_NEXT)


def test_newton_step_needs_unimodular_constant():
    with pytest.raises(DomainError):
        newton_step(2.0 * np.eye(2), random_sl_series((1,), 1e-6), ALPHA, Q_NEXT)


def test_contraction_is_quadratic():
    table = contraction_table(parabolic(0.2), ALPHA, Q_NEXT)
    assert table.exponent >= 1.8
    assert len(table.csv_rows()) == 3
    with pytest.raises(DomainError):
        contraction_table(parabolic(0.2), ALPHA, Q_NEXT, norms=(1e-4,))


@pytest.mark.parametrize("tau", [0.1, -0.1])
def test_averaged_shift_trace(tau):
    z11 = FourierSeries.mode(1, 0.3)
    z21 = FourierSeries.mode(1, 0.2j)
    trace = averaged_shift_trace(0.2, tau, z11, z21)
    assert trace == pytest.approx(2.0 - 0.2 * tau * 0.18)
    assert (abs(trace) > 2.0) == (tau < 0)
    assert np.allclose(averaged_shift_matrix(0.2, 0.0, z11, z21), parabolic(0.2))


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
