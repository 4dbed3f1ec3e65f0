"""
One-step KAM machinery for quasiperiodic SL(2,R) cocycles.
Finite Fourier series, resonance splitting against the 1/(7 q_next) floor,
homological solves for parabolic and diagonalizable constants, and one
Newton step with a measured quadratic remainder.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from arithmetic import Frequency, torus_distance
from config import TOLERANCES
from errors import DomainError, ResonantModeError, SmallnessGateError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
# refits after exponentiation keep at most DEGREE_GROWTH * input degree
DEGREE_GROWTH = 4


@dataclass(frozen=True)
class FourierSeries:
    """
    Finite trigonometric polynomial sum_{|k| <= L} c(k) e^{2 pi i k theta}.

    coefficients[j] holds c(j - L).
    """

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise DomainError("coefficients must be a 1-D array of odd length 2L + 1")
        object.__setattr__(self, 'coefficients', c)

    @classmethod
    def zeros(cls, degree: int) -> "FourierSeries":
        return cls(np.zeros(2 * degree + 1, dtype=complex))

    @classmethod
    def mode(cls, k: int, value: complex, degree: Optional[int] = None, real: bool = True) -> "FourierSeries":
        """A single mode k; with real=True the conjugate mode -k is added too."""
        degree = abs(k) if degree is None else degree
        if abs(k) > degree:
            raise DomainError(f"mode {k} exceeds degree {degree}")
        c = np.zeros(2 * degree + 1, dtype=complex)
        c[degree + k] += value
        if real and k != 0:
            c[degree - k] += np.conj(value)
        elif real:
            c[degree] = complex(value).real
        return cls(c)

    @classmethod
    def from_samples(cls, values: np.ndarray, degree: int) -> "FourierSeries":
        """Fit coefficients |k| <= degree from samples on theta_j = j / N."""
        values = np.asarray(values)
        n = values.shape[-1]
        if n <= 2 * degree:
            raise DomainError(f"{n} samples cannot resolve degree {degree}")
        spectrum = np.fft.fft(values) / n
        ks = np.arange(-degree, degree + 1)
        return cls(spectrum[ks % n])

    @classmethod
    def from_triples(cls, triples: Sequence[Sequence[float]]) -> "FourierSeries":
        degree = max((abs(int(k)) for k, _, _ in triples), default=0)
        c = np.zeros(2 * degree + 1, dtype=complex)
        for k, re, im in triples:
            c[degree + int(k)] = complex(re, im)
        return cls(c)

    @property
    def degree(self) -> int:
        return self.coefficients.size // 2

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def coefficient(self, k: int) -> complex:
        return complex(self.coefficients[self.degree + k]) if abs(k) <= self.degree else 0j

    def resized(self, degree: int) -> "FourierSeries":
        """Pad or cut to a new degree bound."""
        out = np.zeros(2 * degree + 1, dtype=complex)
        keep = min(degree, self.degree)
        out[degree - keep:degree + keep + 1] = self.coefficients[self.degree - keep:self.degree + keep + 1]
        return FourierSeries(out)

    def masked(self, mask: np.ndarray) -> "FourierSeries":
        return FourierSeries(np.where(mask, self.coefficients, 0))

    def shifted(self, alpha_value: float) -> "FourierSeries":
        """theta -> f(theta + alpha)."""
        return FourierSeries(self.coefficients * np.exp(1j * TWO_PI * self.ks * alpha_value))

    def evaluate(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        phases = np.exp(1j * TWO_PI * np.multiply.outer(thetas, self.ks))
        return phases @ self.coefficients

    def norm(self, weight: float = 0.0) -> float:
        """Weighted l1 proxy sum |c(k)| e^{|k| weight}; dominates the sup norm."""
        return float(np.sum(np.abs(self.coefficients) * np.exp(np.abs(self.ks) * weight)))

    def is_real(self, tol: float = 0.0) -> bool:
        c = self.coefficients
        return bool(np.max(np.abs(c - np.conj(c[::-1])), initial=0.0) <= tol)

    def made_real(self) -> "FourierSeries":
        """Mirror the k > 0 half so that c(-k) = conj(c(k)) exactly."""
        c = self.coefficients.copy()
        L = self.degree
        c[:L] = np.conj(c[:L:-1])
        c[L] = c[L].real
        return FourierSeries(c)

    def mean_product(self, other: "FourierSeries") -> complex:
        """Average of f * g over the circle."""
        L = min(self.degree, other.degree)
        a = self.resized(L).coefficients
        b = other.resized(L).coefficients
        return complex(np.sum(a * b[::-1]))

    def to_triples(self) -> List[List[float]]:
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.ks, self.coefficients)]

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        L = max(self.degree, other.degree)
        return FourierSeries(self.resized(L).coefficients + other.resized(L).coefficients)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        return self + other.scaled(-1.0)

    def scaled(self, factor: complex) -> "FourierSeries":
        return FourierSeries(self.coefficients * factor)


def truncate_low(f: FourierSeries, L: int) -> FourierSeries:
    """T_L f: modes |k| < L."""
    if L < 0:
        raise DomainError("truncation order must be non-negative")
    return f.masked(np.abs(f.ks) < L)


def truncate_high(f: FourierSeries, L: int) -> FourierSeries:
    """R_L f: modes |k| >= L."""
    if L < 0:
        raise DomainError("truncation order must be non-negative")
    return f.masked(np.abs(f.ks) >= L)


@dataclass(frozen=True)
class SlMatSeries:
    """
    Traceless matrix-valued series [[y11, y12], [y21, -y11]].
    """

    y11: FourierSeries
    y12: FourierSeries
    y21: FourierSeries

    def __post_init__(self):
        L = max(self.y11.degree, self.y12.degree, self.y21.degree)
        for name in ('y11', 'y12', 'y21'):
            object.__setattr__(self, name, getattr(self, name).resized(L))

    @classmethod
    def zeros(cls, degree: int) -> "SlMatSeries":
        z = FourierSeries.zeros(degree)
        return cls(z, z, z)

    @classmethod
    def from_coefficient_matrices(cls, mats: np.ndarray) -> "SlMatSeries":
        """From (2L+1, 2, 2) coefficient matrices; the trace part is dropped."""
        return cls(FourierSeries(0.5 * (mats[:, 0, 0] - mats[:, 1, 1])),
                   FourierSeries(mats[:, 0, 1]), FourierSeries(mats[:, 1, 0]))

    @classmethod
    def from_samples(cls, values: np.ndarray, degree: int) -> "SlMatSeries":
        """Fit from (N, 2, 2) samples on theta_j = j / N."""
        return cls(FourierSeries.from_samples(0.5 * (values[:, 0, 0] - values[:, 1, 1]), degree),
                   FourierSeries.from_samples(values[:, 0, 1], degree),
                   FourierSeries.from_samples(values[:, 1, 0], degree))

    @property
    def degree(self) -> int:
        return self.y11.degree

    @property
    def ks(self) -> np.ndarray:
        return self.y11.ks

    def coefficient_matrices(self) -> np.ndarray:
        out = np.empty((self.ks.size, 2, 2), dtype=complex)
        out[:, 0, 0] = self.y11.coefficients
        out[:, 0, 1] = self.y12.coefficients
        out[:, 1, 0] = self.y21.coefficients
        out[:, 1, 1] = -self.y11.coefficients
        return out

    def active_modes(self, tol: float = 0.0) -> FrozenSet[int]:
        size = np.abs(self.y11.coefficients) + np.abs(self.y12.coefficients) + np.abs(self.y21.coefficients)
        return frozenset(int(k) for k in self.ks[size > tol])

    def masked(self, mask: np.ndarray) -> "SlMatSeries":
        return SlMatSeries(self.y11.masked(mask), self.y12.masked(mask), self.y21.masked(mask))

    def scaled(self, factor: complex) -> "SlMatSeries":
        return SlMatSeries(self.y11.scaled(factor), self.y12.scaled(factor), self.y21.scaled(factor))

    def __add__(self, other: "SlMatSeries") -> "SlMatSeries":
        return SlMatSeries(self.y11 + other.y11, self.y12 + other.y12, self.y21 + other.y21)

    def __sub__(self, other: "SlMatSeries") -> "SlMatSeries":
        return self + other.scaled(-1.0)

    def norm(self, weight: float = 0.0) -> float:
        return self.y11.norm(weight) + self.y12.norm(weight) + self.y21.norm(weight)

    def is_real(self, tol: float = 0.0) -> bool:
        return self.y11.is_real(tol) and self.y12.is_real(tol) and self.y21.is_real(tol)

    def made_real(self) -> "SlMatSeries":
        return SlMatSeries(self.y11.made_real(), self.y12.made_real(), self.y21.made_real())

    def matrices(self, thetas) -> np.ndarray:
        """Sample on thetas; real-valued series come back as real arrays."""
        a, b, c = (s.evaluate(thetas) for s in (self.y11, self.y12, self.y21))
        out = np.stack([np.stack([a, b], axis=-1), np.stack([c, -a], axis=-1)], axis=-2)
        return out.real if self.is_real(1e-12 * max(self.norm(), 1.0)) else out

    def to_dict(self) -> Dict[str, Any]:
        return {'y11': self.y11.to_triples(), 'y12': self.y12.to_triples(), 'y21': self.y21.to_triples()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SlMatSeries":
        return cls(FourierSeries.from_triples(data['y11']), FourierSeries.from_triples(data['y12']),
                   FourierSeries.from_triples(data['y21']))


@dataclass(frozen=True)
class ParabolicConstant:
    """D = [[1, d], [0, 1]]."""

    d: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[1.0, self.d], [0.0, 1.0]])


def random_sl_series(modes: Sequence[int], norm: float, seed: int = 0) -> SlMatSeries:
    """A real series on the given positive modes, scaled to the requested norm."""
    rng = np.random.default_rng(seed)
    degree = max(abs(int(k)) for k in modes)
    parts = []
    for _ in range(3):
        f = FourierSeries.zeros(degree)
        for k in modes:
            f = f + FourierSeries.mode(int(k), complex(*rng.standard_normal(2)), degree)
        parts.append(f)
    series = SlMatSeries(*parts)
    return series.scaled(norm / series.norm())


def _nonresonant_mask(ks: np.ndarray, alpha: Frequency, q_next: int) -> np.ndarray:
    return torus_distance(ks * alpha.value) >= 1.0 / (7 * q_next)


def _check_denominator(alpha: Frequency, q_next: int):
    if q_next not in alpha.denominators:
        raise DomainError(f"q_next={q_next} is not a convergent denominator of {alpha.describe()}")


def resonant_split(m: SlMatSeries, alpha: Frequency, q_next: int) -> Tuple[SlMatSeries, SlMatSeries]:
    """
    Split m into modes with ||k alpha|| >= 1/(7 q_next) and the rest.
    k = 0 always lands in the resonant part.
    """
    _check_denominator(alpha, q_next)
    mask = _nonresonant_mask(m.ks, alpha, q_next)
    return m.masked(mask), m.masked(~mask)


def _divisor_floor(q_next: int) -> float:
    return 2.0 * np.sin(np.pi / (7 * q_next))


def _guard_divisors(divisors: np.ndarray, rhs_size: np.ndarray, ks: np.ndarray, q_next: int):
    """Refuse to divide a nonzero coefficient by anything below the floor."""
    bad = (np.abs(divisors) < _divisor_floor(q_next)) & (rhs_size > 0)
    if np.any(bad):
        modes = sorted({int(k) for k in np.broadcast_to(ks, bad.shape)[bad]})
        raise ResonantModeError(f"divisors below 2 sin(pi / {7 * q_next}) for modes {modes}", modes)


def homological_residual(c_matrix: np.ndarray, alpha: Frequency, y: SlMatSeries, m: SlMatSeries) -> float:
    """Norm of C Y(theta + alpha) C^{-1} - Y(theta) - M(theta), coefficientwise."""
    L = max(y.degree, m.degree)
    y_hat = SlMatSeries(y.y11.resized(L), y.y12.resized(L), y.y21.resized(L)).coefficient_matrices()
    m_hat = SlMatSeries(m.y11.resized(L), m.y12.resized(L), m.y21.resized(L)).coefficient_matrices()
    phase = np.exp(1j * TWO_PI * np.arange(-L, L + 1) * alpha.value)[:, None, None]
    lhs = c_matrix @ (phase * y_hat) @ np.linalg.inv(c_matrix) - y_hat
    return float(np.sum(np.abs(lhs - m_hat)))


@dataclass(frozen=True)
class HomologicalSolve:
    """Solution Y with its back-substituted residual and size ratio."""

    y: SlMatSeries
    residual: float
    ratio: float
    q_next: int
    route: str

    @property
    def bound_ratio(self) -> float:
        """||Y|| / (q_next^3 ||M||), the constant in front of the cubic bound."""
        return self.ratio / self.q_next ** 3


def _finish(c_matrix: np.ndarray, alpha: Frequency, y: SlMatSeries, m: SlMatSeries,
            q_next: int, route: str) -> HomologicalSolve:
    if m.is_real():
        y = y.made_real()
    size = m.norm()
    ratio = y.norm() / size if size > 0 else 0.0
    residual = homological_residual(c_matrix, alpha, y, m)
    logger.debug("%s solve: ||Y||/||M|| = %.3g, residual %.2e", route, ratio, residual)
    return HomologicalSolve(y, residual, ratio, q_next, route)


def solve_homological_parabolic(d: ParabolicConstant, alpha: Frequency, m: SlMatSeries,
                                q_next: int) -> HomologicalSolve:
    """
    Solve D Y(theta + alpha) D^{-1} - Y(theta) = M(theta) for D = [[1, d], [0, 1]].

    Conjugation by D is upper triangular, so the modes are solved in the order
    y21, then y11 (right side gains -d y21(theta + alpha)), then y12 (right side
    gains 2d y11(theta + alpha) + d^2 y21(theta + alpha)). Each scalar equation
    y(theta + alpha) - y(theta) = g(theta) is solved by g(k) / (e^{2 pi i k alpha} - 1).

    Raises:
        ResonantModeError: a nonzero mode sits below the divisor floor
    """
    _check_denominator(alpha, q_next)
    ks = m.ks
    shift = np.exp(1j * TWO_PI * ks * alpha.value)
    divisor = shift - 1.0
    size = np.abs(m.y11.coefficients) + np.abs(m.y12.coefficients) + np.abs(m.y21.coefficients)
    _guard_divisors(divisor, size, ks, q_next)
    safe = np.where(size > 0, divisor, 1.0)

    s = np.where(size > 0, m.y21.coefficients / safe, 0)
    p = np.where(size > 0, (m.y11.coefficients - d.d * shift * s) / safe, 0)
    r = np.where(size > 0, (m.y12.coefficients + 2.0 * d.d * shift * p + d.d ** 2 * shift * s) / safe, 0)
    y = SlMatSeries(FourierSeries(p), FourierSeries(r), FourierSeries(s))
    return _finish(d.matrix, alpha, y, m, q_next, 'parabolic')


def _parabolic_frame(c_matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    For C = +-W [[1, d], [0, 1]] W^{-1}, return (W, d).
    """
    sign = np.sign(np.trace(c_matrix)) or 1.0
    nil = sign * c_matrix - np.eye(2)
    norms = np.linalg.norm(nil, axis=0)
    if norms.max() < TOLERANCES['parabolic_trace']:
        return np.eye(2), 0.0
    v = nil[:, int(np.argmax(norms))]
    v = v / np.linalg.norm(v)
    w = np.array([-v[1], v[0]])
    frame = np.column_stack([v, w])
    return frame, float(v @ (nil @ w))


def solve_homological_diagonalizable(c_matrix: np.ndarray, alpha: Frequency, m: SlMatSeries,
                                     q_next: int) -> HomologicalSolve:
    """
    Solve C Y(theta + alpha) C^{-1} - Y(theta) = M(theta) for a diagonalizable C.

    With C = V diag(mu_1, mu_2) V^{-1} and Z = V^{-1} Y V the entries decouple:
    z_ij(k) = n_ij(k) / ((mu_i / mu_j) e^{2 pi i k alpha} - 1). For an elliptic
    C = R_phi the off-diagonal divisors are e^{2 pi i (k alpha +- 2 phi)} - 1.
    """
    _check_denominator(alpha, q_next)
    eigenvalues, vecs = np.linalg.eig(c_matrix.astype(complex))
    vinv = np.linalg.inv(vecs)
    n_hat = vinv @ m.coefficient_matrices() @ vecs
    ks = m.ks
    shift = np.exp(1j * TWO_PI * ks * alpha.value)
    ratios = eigenvalues[:, None] / eigenvalues[None, :]
    divisors = ratios[None, :, :] * shift[:, None, None] - 1.0
    sizes = np.abs(n_hat)
    _guard_divisors(divisors, sizes, ks[:, None, None], q_next)
    z_hat = np.where(sizes > 0, n_hat / np.where(sizes > 0, divisors, 1.0), 0)
    y = SlMatSeries.from_coefficient_matrices(vecs @ z_hat @ vinv)
    return _finish(c_matrix, alpha, y, m, q_next, 'diagonalizable')


def solve_homological(c_matrix: np.ndarray, alpha: Frequency, m: SlMatSeries, q_next: int) -> HomologicalSolve:
    """
    Solve C Y(theta + alpha) C^{-1} - Y(theta) = M(theta) for any constant C in SL(2,R).

    Constants with | |trace| - 2 | below the parabolic tolerance go through the
    triangular solver in a frame where C = +-[[1, d], [0, 1]].
    """
    c_matrix = np.asarray(c_matrix, dtype=float)
    if abs(abs(np.trace(c_matrix)) - 2.0) >= TOLERANCES['parabolic_trace']:
        return solve_homological_diagonalizable(c_matrix, alpha, m, q_next)
    frame, d = _parabolic_frame(c_matrix)
    inv = np.linalg.inv(frame)
    local = SlMatSeries.from_coefficient_matrices(inv @ m.coefficient_matrices() @ frame)
    solved = solve_homological_parabolic(ParabolicConstant(d), alpha, local, q_next)
    y = SlMatSeries.from_coefficient_matrices(frame @ solved.y.coefficient_matrices() @ inv)
    return _finish(c_matrix, alpha, y, m, q_next, 'parabolic')


@dataclass(frozen=True)
class KamStepResult:
    """One conjugation step e^{-Y(theta + alpha)} A e^{F(theta)} e^{Y(theta)}."""

    conjugation: SlMatSeries
    removed: SlMatSeries
    kept: SlMatSeries
    new_perturbation: SlMatSeries
    input_norm: float
    remainder_norm: float
    resonant_modes: FrozenSet[int]
    homological_residual: float
    solution_ratio: float

    @property
    def contraction_constant(self) -> float:
        """C in remainder <= C * ||f||^2."""
        return self.remainder_norm / self.input_norm ** 2 if self.input_norm > 0 else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'conjugation': self.conjugation.to_dict(),
            'kept': self.kept.to_dict(),
            'input_norm': self.input_norm,
            'remainder_norm': self.remainder_norm,
            'contraction_constant': self.contraction_constant,
            'resonant_modes': sorted(self.resonant_modes),
            'homological_residual': self.homological_residual,
            'solution_ratio': self.solution_ratio,
        }


def newton_step(a_const: np.ndarray, f: SlMatSeries, alpha: Frequency, q_next: int,
                gate: float = 1.0, n_grid: Optional[int] = None) -> KamStepResult:
    """
    Remove the nonresonant part of F from the cocycle A e^{F(theta)}.

    Y solves A^{-1} Y(theta + alpha) A - Y(theta) = F_nonresonant, and the
    remainder is the sampled sup norm of
    e^{-Y(theta + alpha)} A e^{F(theta)} e^{Y(theta)} - A e^{F_resonant(theta)}.

    Args:
        a_const: constant SL(2,R) matrix
        f: real sl(2) perturbation
        alpha: frequency
        q_next: convergent denominator setting the resonance floor
        gate: smallness gate on ||f|| * q_next^3
        n_grid: sampling grid size (default fits 4x the input degree)

    Raises:
        SmallnessGateError: ||f|| * q_next^3 above gate
    """
    a_const = np.asarray(a_const, dtype=float)
    if abs(np.linalg.det(a_const) - 1.0) > TOLERANCES['det']:
        raise DomainError("constant part must lie in SL(2,R)")
    size = f.norm()
    if size * q_next ** 3 > gate:
        raise SmallnessGateError(f"||f|| * q_next^3 = {size * q_next ** 3:.3g} exceeds the gate {gate:g}")
    nonresonant, resonant = resonant_split(f, alpha, q_next)
    if size == 0:
        zero = SlMatSeries.zeros(f.degree)
        return KamStepResult(zero, zero, zero, zero, 0.0, 0.0, frozenset(), 0.0, 0.0)

    solved = solve_homological(np.linalg.inv(a_const), alpha, nonresonant, q_next)
    y = solved.y
    cap = DEGREE_GROWTH * max(f.degree, 1)
    n_grid = n_grid or max(256, 4 * (2 * cap + 1))
    thetas = np.arange(n_grid) / n_grid

    y_now = y.matrices(thetas)
    y_next = y.matrices(thetas + alpha.value)
    new = expm(-y_next) @ a_const @ expm(f.matrices(thetas)) @ expm(y_now)
    target = a_const @ expm(resonant.matrices(thetas))
    remainder = float(np.max(np.linalg.norm(new - target, ord=2, axis=(-2, -1))))

    relative = np.linalg.solve(a_const, new) - np.eye(2)
    new_perturbation = SlMatSeries.from_samples(relative, cap)
    if f.is_real():
        new_perturbation = new_perturbation.made_real()
    kept_modes = resonant.active_modes(1e-15 * size)
    logger.debug("newton step: ||f|| %.2e -> remainder %.2e", size, remainder)
    return KamStepResult(y, nonresonant, resonant, new_perturbation, size, remainder,
                         kept_modes, solved.residual, solved.ratio)


@dataclass(frozen=True)
class ContractionTable:
    """Remainders of one Newton step over a sweep of perturbation sizes."""

    norms: np.ndarray
    remainders: np.ndarray
    ratios: np.ndarray
    residuals: np.ndarray
    exponent: float
    q_next: int

    def csv_rows(self) -> List[List[float]]:
        return [[float(n), float(r), float(r / n ** 2), float(y), float(h)]
                for n, r, y, h in zip(self.norms, self.remainders, self.ratios, self.residuals)]


def contraction_table(a_const: np.ndarray, alpha: Frequency, q_next: int,
                      norms: Sequence[float] = (1e-3, 1e-4, 1e-5), modes: Sequence[int] = (1, 2, 3),
                      seed: int = 0, gate: float = 1.0) -> ContractionTable:
    """
    Apply newton_step to one random perturbation shape at several sizes and
    fit remainder ~ ||f||^p on log scales.
    """
    if len(norms) < 2:
        raise DomainError("need at least two perturbation sizes to fit an exponent")
    shape = random_sl_series(modes, 1.0, seed)
    results = [newton_step(a_const, shape.scaled(n), alpha, q_next, gate) for n in norms]
    remainders = np.array([r.remainder_norm for r in results])
    exponent = float(np.polyfit(np.log(norms), np.log(remainders), 1)[0])
    return ContractionTable(np.asarray(norms, dtype=float), remainders,
                            np.array([r.solution_ratio for r in results]),
                            np.array([r.homological_residual for r in results]), exponent, q_next)


def averaged_shift_matrix(d: float, tau: float, z11: FourierSeries, z21: FourierSeries) -> np.ndarray:
    """
    Averaged constant after shifting the energy by tau near a parabolic
    constant [[1, d], [0, 1]], with z11, z21 the entries of the conjugation.
    """
    m11_21 = z11.mean_product(z21).real
    m11_11 = z11.mean_product(z11).real
    m21_21 = z21.mean_product(z21).real
    return np.array([
        [1.0 + tau * (m11_21 - d * m11_11), d + tau * (-d * m11_21 + m21_21)],
        [-tau * m11_11, 1.0 - tau * m11_21],
    ])


def averaged_shift_trace(d: float, tau: float, z11: FourierSeries, z21: FourierSeries) -> float:
    """2 - d tau [z11^2]; hyperbolic exactly when d tau < 0."""
    return float(np.trace(averaged_shift_matrix(d, tau, z11, z21)))
