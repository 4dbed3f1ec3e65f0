"""
SL(2,R) / SL(2,C) cocycle engine over the rotation theta -> theta + alpha.

A cocycle map is any callable taking an array of phases (turns) and
returning matrices of shape (..., 2, 2). Products are kept in renormalized
form M * exp(log_scale) with ||M|| = 1 so that e^{Ln} growth never overflows.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from arithmetic import Frequency, phase_sample
from config import TOLERANCES
from errors import DomainError, ResolutionError, SingularConjugationError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
MIN_LYAPUNOV_ITERS = 1000

CocycleMap = Callable[[np.ndarray], np.ndarray]


def rotation(phi) -> np.ndarray:
    """R_phi = [[cos 2 pi phi, -sin 2 pi phi], [sin 2 pi phi, cos 2 pi phi]], broadcast over phi."""
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(TWO_PI * phi), np.sin(TWO_PI * phi)
    return np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2)


def parabolic(d: float) -> np.ndarray:
    return np.array([[1.0, d], [0.0, 1.0]])


def is_sl2(m: np.ndarray, tol: float = TOLERANCES['det']) -> bool:
    return bool(np.all(np.abs(np.linalg.det(m) - 1.0) <= tol))


def spectral_norm(m: np.ndarray) -> np.ndarray:
    """Operator 2-norm of a stack of 2x2 matrices in closed form."""
    frob = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = np.abs(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])
    disc = np.sqrt(np.maximum(frob ** 2 - 4.0 * det ** 2, 0.0))
    return np.sqrt((frob + disc) / 2.0)


def _wrap_half(x):
    """Reduce turn-valued x into (-1/2, 1/2]."""
    return x - np.ceil(x - 0.5)


@dataclass(frozen=True, eq=False)
class ConstantCocycle:
    """theta -> matrix, the same fiber map everywhere."""

    matrix: np.ndarray
    lift_reference: float = 0.0

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.broadcast_to(np.asarray(self.matrix), theta.shape + (2, 2)).copy()


@dataclass(frozen=True, eq=False)
class RotationFamily:
    """theta -> R_{k theta / 2 + phase}; degree k as a PSL(2,R) map."""

    k: int
    phase: float = 0.0
    lift_reference: float = 0.0

    def __call__(self, theta) -> np.ndarray:
        return rotation(self.k * np.asarray(theta, dtype=float) / 2.0 + self.phase)


@dataclass(frozen=True)
class SchrodingerCocycle:
    """
    The almost Mathieu transfer matrix family theta -> S_E^lambda(theta + i epsilon).

    lam = 0 is accepted (free Laplacian); epsilon is the imaginary phase shift in
    radians, so the potential grows like lam * e^epsilon.
    """

    lam: float
    energy: float
    alpha: Frequency
    epsilon: float = 0.0

    # homotopic to R_{1/4} through lam, E -> 0
    lift_reference: ClassVar[float] = 0.25

    def __post_init__(self):
        if self.lam < 0:
            raise DomainError(f"coupling lambda must be non-negative, got {self.lam}")

    def potential(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.epsilon:
            return self.energy - 2.0 * self.lam * np.cos(TWO_PI * theta + 1j * self.epsilon)
        return self.energy - 2.0 * self.lam * np.cos(TWO_PI * theta)

    def __call__(self, theta) -> np.ndarray:
        v = self.potential(theta)
        one = np.ones_like(v)
        zero = np.zeros_like(v)
        return np.stack([np.stack([v, -one], axis=-1), np.stack([one, zero], axis=-1)], axis=-2)


def transfer_matrix(c: SchrodingerCocycle, theta: float) -> np.ndarray:
    """[[E - 2 lam cos(2 pi (theta + i eps)), -1], [1, 0]]; complex when eps != 0."""
    return c(theta)


def _generic_products(c: CocycleMap, alpha_value: float, thetas: np.ndarray,
                      n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Renormalized products for any vectorized cocycle map, one per phase."""
    probe = np.asarray(c(thetas % 1.0))
    prod = np.broadcast_to(np.eye(2, dtype=probe.dtype), thetas.shape + (2, 2)).copy()
    log_scale = np.zeros(thetas.shape)
    if n >= 0:
        for j in range(n):
            step = probe if j == 0 else np.asarray(c((thetas + j * alpha_value) % 1.0))
            prod = step @ prod
            scale = np.max(np.abs(prod), axis=(-2, -1))
            prod /= scale[..., None, None]
            log_scale += np.log(scale)
    else:
        for k in range(1, -n + 1):
            step = np.linalg.inv(np.asarray(c((thetas - k * alpha_value) % 1.0)))
            prod = step @ prod
            scale = np.max(np.abs(prod), axis=(-2, -1))
            prod /= scale[..., None, None]
            log_scale += np.log(scale)
    return prod, log_scale


def schrodinger_products(lam: float, alpha_value: float, energies, thetas, n: int,
                         epsilon: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Renormalized n-step almost Mathieu products for every (energy, phase) pair.

    Args:
        lam: coupling
        alpha_value: rotation frequency
        energies: 1-D array of energies
        thetas: 1-D array of starting phases
        n: number of steps, n >= 0
        epsilon: imaginary phase shift (radians)

    Returns:
        (matrices of shape (len(energies), len(thetas), 2, 2) with unit norm, log_scale)
    """
    energies = np.asarray(energies, dtype=float).reshape(-1, 1)
    thetas = np.asarray(thetas, dtype=float).reshape(1, -1)
    dtype = complex if epsilon else float
    shape = (energies.shape[0], thetas.shape[1])
    m11 = np.ones(shape, dtype)
    m12 = np.zeros(shape, dtype)
    m21 = np.zeros(shape, dtype)
    m22 = np.ones(shape, dtype)
    log_scale = np.zeros(shape)

    for j in range(n):
        phase = TWO_PI * ((thetas + j * alpha_value) % 1.0)
        if epsilon:
            v = energies - 2.0 * lam * np.cos(phase + 1j * epsilon)
        else:
            v = energies - 2.0 * lam * np.cos(phase)
        m11, m12, m21, m22 = v * m11 - m21, v * m12 - m22, m11, m12
        scale = np.maximum(np.maximum(np.abs(m11), np.abs(m12)),
                           np.maximum(np.abs(m21), np.abs(m22)))
        m11 /= scale
        m12 /= scale
        m21 /= scale
        m22 /= scale
        log_scale += np.log(scale)

    prod = np.stack([np.stack([m11, m12], axis=-1), np.stack([m21, m22], axis=-1)], axis=-2)
    norm = spectral_norm(prod)
    prod /= norm[..., None, None]
    log_scale += np.log(norm)
    return prod, log_scale


def cocycle_product(c: CocycleMap, alpha: Frequency, theta, n: int):
    """
    A_n(theta) = A(theta + (n-1) alpha) ... A(theta), with A_0 = id and
    A_{-n}(theta) = A_n(theta - n alpha)^{-1}.

    Args:
        c: cocycle map
        alpha: frequency
        theta: phase or array of phases
        n: number of steps (may be negative)

    Returns:
        (M, log_scale) with ||M|| = 1 and A_n = M * exp(log_scale)
    """
    scalar = np.ndim(theta) == 0
    thetas = np.atleast_1d(np.asarray(theta, dtype=float))
    if n == 0:
        prod = np.broadcast_to(np.eye(2), thetas.shape + (2, 2)).copy()
        log_scale = np.zeros(thetas.shape)
    elif n > 0 and isinstance(c, SchrodingerCocycle):
        prod, log_scale = schrodinger_products(c.lam, alpha.value, [c.energy], thetas, n, c.epsilon)
        prod, log_scale = prod[0], log_scale[0]
    else:
        prod, log_scale = _generic_products(c, alpha.value, thetas, n)
        norm = spectral_norm(prod)
        prod = prod / norm[..., None, None]
        log_scale = log_scale + np.log(norm)
    if scalar:
        return prod[0], float(log_scale[0])
    return prod, log_scale


def lyapunov_exponents(lam: float, alpha: Frequency, energies, n_iter: int,
                       n_phases: int = 8, seed: int = 0, epsilon: float = 0.0,
                       chunk: int = 4096) -> np.ndarray:
    """Phase-averaged log_scale / n_iter for an array of energies."""
    thetas = phase_sample(n_phases, seed)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    out = np.empty(energies.shape)
    per_chunk = max(1, chunk // n_phases)
    for start in range(0, energies.size, per_chunk):
        sl = slice(start, start + per_chunk)
        _, log_scale = schrodinger_products(lam, alpha.value, energies[sl], thetas, n_iter, epsilon)
        out[sl] = log_scale.mean(axis=1) / n_iter
    return out


def lyapunov_exponent(c: SchrodingerCocycle, n_iter: int, n_phases: int = 8, seed: int = 0) -> float:
    """
    L = (1/n) * integral of ln ||A_n(theta)|| d theta, averaged over `n_phases`
    equidistributed phases. The complexified phase of `c` is honoured.
    """
    if n_iter < MIN_LYAPUNOV_ITERS:
        raise DomainError(f"n_iter must be at least {MIN_LYAPUNOV_ITERS}, got {n_iter}")
    if n_phases < 1:
        raise DomainError("n_phases must be at least 1")
    value = lyapunov_exponents(c.lam, c.alpha, [c.energy], n_iter, n_phases, seed, c.epsilon)[0]
    return max(float(value), 0.0)


def lyapunov_complexified(c: SchrodingerCocycle, n_iter: int, n_phases: int = 8, seed: int = 0) -> float:
    """Lyapunov exponent of the SL(2,C) cocycle at phase theta + i epsilon."""
    return lyapunov_exponent(c, n_iter, n_phases, seed)


def complexified_prediction(lam: float, epsilon: float, real_exponent: float = 0.0) -> float:
    """max{L(alpha, S_E^lam), epsilon + ln lam} for lam > 0."""
    if lam <= 0:
        raise DomainError("the complexified formula needs lambda > 0")
    return max(real_exponent, epsilon + math.log(lam))


def acceleration_profile(lam: float, energy: float, alpha: Frequency, epsilons: Sequence[float],
                         n_iter: int, n_phases: int = 8, seed: int = 0) -> np.ndarray:
    """L(epsilon) on a grid of non-negative imaginary shifts."""
    values = [lyapunov_exponent(SchrodingerCocycle(lam, energy, alpha, eps), n_iter, n_phases, seed)
              for eps in epsilons]
    return np.array(values)


def is_subcritical(lam: float, energy: float, alpha: Frequency, strip: float, n_iter: int,
                   n_phases: int = 8, seed: int = 0, n_eps: int = 5, tol: float = 0.02) -> bool:
    """True when L(epsilon) vanishes (within tol) for 0 <= epsilon <= strip."""
    profile = acceleration_profile(lam, energy, alpha, np.linspace(0.0, strip, n_eps), n_iter, n_phases, seed)
    return bool(np.all(profile < tol))


@dataclass(frozen=True)
class ProjectiveTrajectory:
    """Lift of the projective orbit of a unit vector at angle t0 (turns)."""

    t0: float
    length: int
    displacement: float
    half_displacement: float

    @property
    def average(self) -> float:
        return self.displacement / self.length


@dataclass(frozen=True)
class RotationNumber:
    """Fibered rotation number, raw (mod 1) and folded into [0, 1/2]."""

    value: float
    raw: float
    window_gap: float
    converged: bool
    trajectory: Optional[ProjectiveTrajectory] = field(default=None, repr=False)


def fold_rotation(rho):
    """Fold a rotation number mod 1 into [0, 1/2]."""
    rho = np.mod(rho, 1.0)
    folded = np.where(rho <= 0.5, rho, 1.0 - rho)
    return float(folded) if np.ndim(folded) == 0 else folded


def _window_tolerance(n_iter: int) -> float:
    return max(10.0 / n_iter, 1e-4)


def projective_trajectory(c: CocycleMap, alpha: Frequency, n_iter: int, t0: float = 0.0,
                          theta: float = 0.0, reference: Optional[float] = None) -> ProjectiveTrajectory:
    """
    Follow v = (cos 2 pi t0, sin 2 pi t0) under the cocycle and sum the lifted
    angle increments. Each increment is taken in the window
    (reference - 1/2, reference + 1/2]; `reference` defaults to the map's
    `lift_reference` attribute.
    """
    if reference is None:
        reference = getattr(c, 'lift_reference', 0.0)
    mats = np.asarray(c((theta + np.arange(n_iter) * alpha.value) % 1.0))
    if np.iscomplexobj(mats):
        if np.max(np.abs(mats.imag)) > 0:
            raise DomainError("rotation numbers need real SL(2,R) fiber maps")
        mats = mats.real
    x, y = math.cos(TWO_PI * t0), math.sin(TWO_PI * t0)
    angle = t0
    total = 0.0
    half = 0.0
    half_at = n_iter // 2
    for j, ((a, b), (cc, d)) in enumerate(mats.tolist()):
        x, y = a * x + b * y, cc * x + d * y
        r = math.hypot(x, y)
        x, y = x / r, y / r
        new_angle = math.atan2(y, x) / TWO_PI
        diff = new_angle - angle - reference
        total += reference + diff - math.ceil(diff - 0.5)
        angle = new_angle
        if j + 1 == half_at:
            half = total
    return ProjectiveTrajectory(t0, n_iter, total, half)


def rotation_number(c: CocycleMap, alpha: Frequency, n_iter: int, t0: float = 0.0,
                    theta: float = 0.0, reference: Optional[float] = None,
                    tol: Optional[float] = None) -> RotationNumber:
    """
    Birkhoff average of the lifted projective displacement.

    Args:
        c: real cocycle map homotopic to the identity
        alpha: frequency
        n_iter: orbit length
        t0: initial vector angle in turns
        theta: starting phase
        reference: lift window centre (turns)
        tol: allowed difference between the two half-window averages

    Returns:
        RotationNumber with the folded value in [0, 1/2]
    """
    if n_iter < 2:
        raise DomainError("n_iter must be at least 2")
    traj = projective_trajectory(c, alpha, n_iter, t0, theta, reference)
    half_at = n_iter // 2
    first = traj.half_displacement / half_at
    second = (traj.displacement - traj.half_displacement) / (n_iter - half_at)
    gap = abs(first - second)
    tol = _window_tolerance(n_iter) if tol is None else tol
    raw = traj.average % 1.0
    return RotationNumber(fold_rotation(raw), raw, gap, gap <= tol, traj)


def rotation_numbers(lam: float, alpha: Frequency, energies, n_iter: int, theta: float = 0.0,
                     t0: float = 0.0, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Folded rotation numbers of the almost Mathieu cocycle for many energies.

    Returns:
        (folded values, converged flags)
    """
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    reference = SchrodingerCocycle.lift_reference
    x = np.full(energies.shape, math.cos(TWO_PI * t0))
    y = np.full(energies.shape, math.sin(TWO_PI * t0))
    angle = np.full(energies.shape, float(t0))
    total = np.zeros(energies.shape)
    half = np.zeros(energies.shape)
    half_at = n_iter // 2
    for j in range(n_iter):
        v = energies - 2.0 * lam * math.cos(TWO_PI * ((theta + j * alpha.value) % 1.0))
        x, y = v * x - y, x
        r = np.hypot(x, y)
        x /= r
        y /= r
        new_angle = np.arctan2(y, x) / TWO_PI
        total += reference + _wrap_half(new_angle - angle - reference)
        angle = new_angle
        if j + 1 == half_at:
            half = total.copy()
    first = half / half_at
    second = (total - half) / (n_iter - half_at)
    tol = _window_tolerance(n_iter) if tol is None else tol
    return np.atleast_1d(fold_rotation(total / n_iter)), np.abs(first - second) <= tol


@dataclass(frozen=True)
class UHResult:
    """
    Verdict of the uniform hyperbolicity test.

    margin is the minimal observed exponent log_scale / n over the phase sample;
    excess is margin minus the growth threshold.
    """

    hyperbolic: bool
    margin: float
    excess: float
    transversality: float
    indeterminate: bool


def growth_floor(n_iter: int) -> float:
    """Finite-n slack 2 ln(n) / n above the asymptotic exponent."""
    return 2.0 * math.log(n_iter) / n_iter


def amo_growth_threshold(lam: float, n_iter: int) -> float:
    """Growth needed off the spectrum: L = max{0, ln lam} on it, strictly more on gaps."""
    base = math.log(lam) if lam > 1 else 0.0
    return base + growth_floor(n_iter)


def _transversality(forward: np.ndarray, backward: np.ndarray) -> np.ndarray:
    """|sin| of the angle between the unstable and stable directions at each phase."""
    u_back, _, _ = np.linalg.svd(backward)
    _, _, vh_fwd = np.linalg.svd(forward)
    unstable = u_back[..., :, 0]
    stable = vh_fwd[..., 1, :]
    return np.abs(unstable[..., 0] * stable[..., 1] - unstable[..., 1] * stable[..., 0])


def _uh_verdict(growth, cross, threshold, tol, cone_floor):
    margin = growth.min(axis=-1)
    transversality = cross.min(axis=-1)
    excess = margin - threshold
    indeterminate = np.abs(excess) < tol
    hyperbolic = (excess >= tol) & (transversality >= cone_floor)
    return margin, excess, transversality, hyperbolic, indeterminate


def is_uniformly_hyperbolic(c: CocycleMap, alpha: Frequency, n_iter: int, growth_threshold: float,
                            n_phases: int = 8, seed: int = 0, tol: Optional[float] = None,
                            cone_floor: float = TOLERANCES['cone_floor']) -> UHResult:
    """
    Growth plus cone-consistency test for uniform hyperbolicity.

    Every sampled phase must show log_scale / n >= growth_threshold, and the
    unstable direction (pushed forward from theta - n alpha) must stay
    transversal to the stable direction of A_n(theta).

    Args:
        c: real cocycle map
        alpha: frequency
        n_iter: product length, at least 1000
        growth_threshold: required exponent
        n_phases: phase sample size
        seed: phase jitter seed
        tol: indeterminate band around the threshold (default: half the growth floor)
        cone_floor: minimal transversality

    Returns:
        UHResult
    """
    if n_iter < MIN_LYAPUNOV_ITERS:
        raise DomainError(f"n_iter must be at least {MIN_LYAPUNOV_ITERS}, got {n_iter}")
    tol = growth_floor(n_iter) / 2.0 if tol is None else tol
    thetas = phase_sample(n_phases, seed)
    starts = np.concatenate([thetas, (thetas - n_iter * alpha.value) % 1.0])
    if isinstance(c, SchrodingerCocycle) and not c.epsilon:
        prod, log_scale = schrodinger_products(c.lam, alpha.value, [c.energy], starts, n_iter)
        prod, log_scale = prod[0], log_scale[0]
    else:
        prod, log_scale = _generic_products(c, alpha.value, starts, n_iter)
    if np.iscomplexobj(prod):
        raise DomainError("uniform hyperbolicity is tested on real cocycles only")
    forward, backward = prod[:n_phases], prod[n_phases:]
    growth = log_scale[:n_phases] / n_iter
    cross = _transversality(forward, backward)
    margin, excess, trans, hyperbolic, indeterminate = _uh_verdict(
        growth[None, :], cross[None, :], growth_threshold, tol, cone_floor)
    return UHResult(bool(hyperbolic[0]), float(margin[0]), float(excess[0]),
                    float(trans[0]), bool(indeterminate[0]))


@dataclass(frozen=True)
class UHScan:
    """Vectorized UH verdicts over an energy array."""

    energies: np.ndarray
    margin: np.ndarray
    excess: np.ndarray
    transversality: np.ndarray
    hyperbolic: np.ndarray
    indeterminate: np.ndarray

    def result(self, i: int) -> UHResult:
        return UHResult(bool(self.hyperbolic[i]), float(self.margin[i]), float(self.excess[i]),
                        float(self.transversality[i]), bool(self.indeterminate[i]))


def uh_scan(lam: float, alpha: Frequency, energies, n_iter: int, n_phases: int = 8, seed: int = 0,
            threshold: Optional[float] = None, tol: Optional[float] = None,
            cone_floor: float = TOLERANCES['cone_floor'], chunk: int = 8192) -> UHScan:
    """Almost Mathieu UH verdicts for every energy, threshold max{0, ln lam} + floor."""
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    threshold = amo_growth_threshold(lam, n_iter) if threshold is None else threshold
    tol = growth_floor(n_iter) / 2.0 if tol is None else tol
    thetas = phase_sample(n_phases, seed)
    starts = np.concatenate([thetas, (thetas - n_iter * alpha.value) % 1.0])
    outputs = [np.empty(energies.shape) for _ in range(3)] + [np.empty(energies.shape, bool) for _ in range(2)]
    per_chunk = max(1, chunk // starts.size)
    for start in range(0, energies.size, per_chunk):
        sl = slice(start, start + per_chunk)
        prod, log_scale = schrodinger_products(lam, alpha.value, energies[sl], starts, n_iter)
        growth = log_scale[:, :n_phases] / n_iter
        cross = _transversality(prod[:, :n_phases], prod[:, n_phases:])
        for out, values in zip(outputs, _uh_verdict(growth, cross, threshold, tol, cone_floor)):
            out[sl] = values
    logger.debug("UH scan: %d energies, %d iterations, threshold %.5f", energies.size, n_iter, threshold)
    return UHScan(energies, *outputs)


def degree(b: CocycleMap, n_samples: int = 1024, max_step: float = TOLERANCES['degree_step']) -> int:
    """
    Winding of theta -> [first column of B(theta)] in the projective circle.

    theta -> R_{theta/2} has degree 1 and theta -> R_theta degree 2.
    """
    if n_samples < 4:
        raise DomainError("degree needs at least 4 samples")
    thetas = np.arange(n_samples + 1) / n_samples
    column = np.asarray(b(thetas))[..., :, 0].real
    angles = np.mod(np.arctan2(column[:, 1], column[:, 0]) / TWO_PI, 0.5)
    steps = np.diff(angles)
    steps -= 0.5 * np.round(steps / 0.5)
    worst = float(np.max(np.abs(steps)))
    if worst > max_step:
        raise ResolutionError(f"projective angle jumps {worst:.3f} turns between samples; raise n_samples")
    return int(np.rint(steps.sum() / 0.5))


@dataclass(frozen=True, eq=False)
class ConjugatedCocycle:
    """theta -> B(theta + alpha)^{-1} A(theta) B(theta)."""

    a: CocycleMap
    b: CocycleMap
    alpha_value: float
    lift_reference: float = 0.0

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.linalg.solve(self.b((theta + self.alpha_value) % 1.0), self.a(theta) @ self.b(theta))


def conjugate(a: CocycleMap, b: CocycleMap, alpha: Frequency, n_check: int = 256,
              tol: float = TOLERANCES['singular_det']) -> ConjugatedCocycle:
    """
    Conjugate the cocycle a by b.

    Raises:
        SingularConjugationError: |det B| below tol at some sample
    """
    samples = np.arange(n_check) / n_check
    dets = np.abs(np.linalg.det(np.asarray(b(samples))))
    if float(dets.min()) < tol:
        raise SingularConjugationError(f"conjugation map is singular near theta={samples[int(dets.argmin())]:.4f}")
    return ConjugatedCocycle(a, b, alpha.value, getattr(a, 'lift_reference', 0.0))


@dataclass(frozen=True)
class SensitivityFit:
    """Empirical constant C in |rot(A) - phi| <= C ||A - R_phi||_0."""

    distances: np.ndarray
    deviations: np.ndarray
    constant: float


def rotation_sensitivity(phi: float, perturbation: CocycleMap, alpha: Frequency,
                         deltas: Sequence[float], n_iter: int = 20000,
                         n_grid: int = 512) -> SensitivityFit:
    """
    Perturb R_phi by exp(delta * P(theta)) and fit C over the deltas.

    Args:
        phi: base rotation in turns, 0 < phi < 1/2
        perturbation: sl(2,R)-valued map P
        alpha: frequency
        deltas: perturbation sizes
        n_iter: orbit length for each rotation number
        n_grid: sampling grid for the sup norm
    """
    grid = np.arange(n_grid) / n_grid
    base = rotation(phi)
    distances, deviations = [], []
    for delta in deltas:
        def perturbed(theta, delta=delta):
            theta = np.asarray(theta, dtype=float)
            return rotation(phi) @ scipy.linalg.expm(delta * np.asarray(perturbation(theta)))
        sup = float(np.max(spectral_norm(perturbed(grid) - base)))
        rho = rotation_number(perturbed, alpha, n_iter).raw
        distances.append(sup)
        deviations.append(abs(_wrap_half(rho - phi)))
    distances = np.array(distances)
    deviations = np.array(deviations)
    constant = float(np.max(deviations / np.maximum(distances, np.finfo(float).tiny)))
    return SensitivityFit(distances, deviations, constant)
