"""
Operator-side computations for the almost Mathieu operator
(H u)_j = u_{j+1} + u_{j-1} + 2 lam cos(2 pi (j alpha + theta)) u_j.

Dirichlet sections counted by Sturm sequences give the integrated density
of states; Johnson's criterion (spectrum = energies without uniform
hyperbolicity) gives membership; periodic band edges give the spectra of
rational surrogates.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Any, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from arithmetic import Frequency, phase_sample
from cocycle import rotation_numbers, uh_scan
from config import TOLERANCES
from errors import DomainError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
MIN_IDS_SIZE = 100

Interval = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Symmetric tridiagonal section with the given diagonal and unit off-diagonal."""

    diagonal: np.ndarray

    @property
    def size(self) -> int:
        return int(self.diagonal.shape[-1])

    @property
    def norm_bound(self) -> float:
        """Row-sum bound on the operator norm."""
        off = 2.0 if self.size > 1 else 0.0
        return float(np.max(np.abs(self.diagonal))) + off

    def dense(self) -> np.ndarray:
        n = self.size
        return np.diag(self.diagonal) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)


def amo_diagonal(lam: float, alpha_value: float, thetas, n: int) -> np.ndarray:
    """v_j = 2 lam cos(2 pi (j alpha + theta)) for j = 0..n-1, one row per phase."""
    thetas = np.asarray(thetas, dtype=float)
    j = np.arange(n)
    return 2.0 * lam * np.cos(TWO_PI * ((np.multiply.outer(thetas, np.ones(n)) + j * alpha_value) % 1.0))


def truncated_tridiagonal(lam: float, alpha: Frequency, theta: float, n: int) -> TridiagonalOperator:
    """The n x n Dirichlet section on sites j = 0..n-1."""
    if n < 1:
        raise DomainError("truncation size must be at least 1")
    return TridiagonalOperator(amo_diagonal(lam, alpha.value, float(theta), n))


def _sturm_counts(diagonals: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """
    Negative pivots of T - E for every (energy, diagonal row).

    Args:
        diagonals: (m, n) rows of tridiagonal diagonals
        energies: (k,) energies

    Returns:
        (k, m) integer counts
    """
    diagonals = np.atleast_2d(diagonals)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))[:, None]
    norm = np.max(np.abs(diagonals), axis=1)[None, :] + 2.0
    pivmin = np.finfo(float).eps * (norm + np.abs(energies))
    count = np.zeros((energies.shape[0], diagonals.shape[0]), dtype=np.int64)
    for j in range(diagonals.shape[1]):
        if j == 0:
            d = diagonals[None, :, 0] - energies
        else:
            d = diagonals[None, :, j] - energies - 1.0 / d
        d = np.where(d == 0.0, -pivmin, d)
        count += d < 0
    return count


def sturm_count(t: TridiagonalOperator, E) -> Union[int, np.ndarray]:
    """
    Number of eigenvalues of t strictly below E.

    Counts negative values of d_1 = v_1 - E, d_j = v_j - E - 1/d_{j-1}; a zero
    pivot is replaced by -eps * (||t|| + |E|).
    """
    counts = _sturm_counts(t.diagonal[None, :], np.atleast_1d(E))[:, 0]
    return int(counts[0]) if np.ndim(E) == 0 else counts


def brute_force_count(t: TridiagonalOperator, E: float) -> int:
    """Eigenvalues below E from a dense symmetric eigensolve."""
    return int(np.count_nonzero(scipy.linalg.eigvalsh(t.dense()) < E))


def ids(lam: float, alpha: Frequency, E, n: int = 2000, n_phases: int = 8, seed: int = 0,
        chunk: int = 512):
    """
    Integrated density of states N(E), the phase average of sturm_count / n.

    Monotone non-decreasing in E by construction; deterministic given seed.
    """
    if n < MIN_IDS_SIZE:
        raise DomainError(f"IDS truncation must be at least {MIN_IDS_SIZE}, got {n}")
    diagonals = amo_diagonal(lam, alpha.value, phase_sample(n_phases, seed), n)
    energies = np.atleast_1d(np.asarray(E, dtype=float))
    values = np.empty(energies.shape)
    for start in range(0, energies.size, chunk):
        sl = slice(start, start + chunk)
        values[sl] = _sturm_counts(diagonals, energies[sl]).mean(axis=1) / n
    return float(values[0]) if np.ndim(E) == 0 else values


def ids_from_rotation(lam: float, alpha: Frequency, E, n_iter: int = 20000, theta: float = 0.0):
    """N(E) = 1 - 2 rho(E) from the folded fibered rotation number."""
    rho, _ = rotation_numbers(lam, alpha, E, n_iter, theta=theta)
    values = 1.0 - 2.0 * rho
    return float(values[0]) if np.ndim(E) == 0 else values


@dataclass(frozen=True)
class SpectrumParams:
    """Iteration budget shared by membership scans."""

    n_iter: int = 2000
    n_phases: int = 8
    seed: int = 0
    ids_size: int = 2000


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    margin: float
    indeterminate: bool


def spectrum_member(lam: float, alpha: Frequency, E: float,
                    params: SpectrumParams = SpectrumParams()) -> MembershipResult:
    """E is in the spectrum iff (alpha, S_E^lam) is not uniformly hyperbolic."""
    scan = uh_scan(lam, alpha, [E], params.n_iter, params.n_phases, params.seed)
    verdict = scan.result(0)
    return MembershipResult(not verdict.hyperbolic, verdict.margin, verdict.indeterminate)


@dataclass(frozen=True, eq=False)
class SpectrumApproximation:
    """Grid scan of the spectrum: per-point membership plus merged intervals."""

    lam: float
    alpha: Frequency
    step: float
    energies: np.ndarray
    member: np.ndarray
    margin: np.ndarray
    indeterminate: np.ndarray
    ids: np.ndarray
    intervals: List[Interval] = field(default_factory=list)
    cell_ids: Optional[np.ndarray] = None

    def ids_member(self, tol: float = TOLERANCES['ids_growth']) -> np.ndarray:
        """Membership from IDS growth: N increases by more than tol across [E - step/2, E + step/2]."""
        if self.cell_ids is None:
            raise DomainError("scan was run without the IDS")
        return np.diff(self.cell_ids) > tol

    def johnson_agreement(self, tol: float = TOLERANCES['ids_growth']) -> float:
        """Fraction of grid points where the UH verdict and IDS growth agree on membership."""
        return float(np.mean(self.ids_member(tol) == self.member))

    def csv_rows(self) -> List[List[Any]]:
        return [[float(e), int(m), float(g), float(n)]
                for e, m, g, n in zip(self.energies, self.member, self.margin, self.ids)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda': self.lam,
            'alpha': self.alpha.to_dict(),
            'grid_step': self.step,
            'intervals': [[a, b] for a, b in self.intervals],
        }


def energy_grid(lam: float, step: float, pad: float = 0.0) -> np.ndarray:
    """Uniform grid covering [-2 - 2 lam - pad, 2 + 2 lam + pad]."""
    if step <= 0:
        raise DomainError("grid step must be positive")
    bound = 2.0 + 2.0 * lam + pad
    count = int(math.ceil(2.0 * bound / step))
    return -bound + step * np.arange(count + 1)


def merge_runs(energies: np.ndarray, member: np.ndarray) -> List[Interval]:
    """Maximal runs of member grid points as closed intervals [E_first, E_last]."""
    intervals = []
    padded = np.concatenate([[False], member.astype(bool), [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    for start, stop in zip(edges[::2], edges[1::2]):
        intervals.append((float(energies[start]), float(energies[stop - 1])))
    return intervals


def spectrum_intervals(lam: float, alpha: Frequency, E_grid: Optional[np.ndarray] = None,
                       params: SpectrumParams = SpectrumParams(), step: Optional[float] = None,
                       with_ids: bool = True) -> SpectrumApproximation:
    """
    Scan a uniform energy grid with Johnson's criterion.

    Indeterminate UH verdicts count as spectrum; member runs are merged into
    closed intervals.

    Args:
        lam: coupling
        alpha: frequency
        E_grid: uniform grid covering [-2 - 2 lam, 2 + 2 lam]; built from `step` if omitted
        params: iteration budget
        step: grid step used when E_grid is omitted
        with_ids: also evaluate the Sturm IDS on the grid and at the cell boundaries
    """
    if E_grid is None:
        if step is None:
            raise DomainError("pass either E_grid or step")
        E_grid = energy_grid(lam, step)
    E_grid = np.asarray(E_grid, dtype=float)
    bound = 2.0 + 2.0 * lam
    spacing = np.diff(E_grid)
    if E_grid.size < 2 or np.any(spacing <= 0):
        raise DomainError("energy grid must be increasing with at least two points")
    grid_step = float(spacing.mean())
    if not np.allclose(spacing, grid_step, rtol=1e-6, atol=1e-12):
        raise DomainError("energy grid must be uniform")
    if E_grid[0] > -bound + 1e-12 or E_grid[-1] < bound - 1e-12:
        raise DomainError(f"energy grid must cover [-{bound:g}, {bound:g}]")

    logger.debug("spectrum scan: lam=%g, %d grid points", lam, E_grid.size)
    scan = uh_scan(lam, alpha, E_grid, params.n_iter, params.n_phases, params.seed)
    member = ~scan.hyperbolic
    member &= np.abs(E_grid) <= bound
    density, cell_density = np.full(E_grid.shape, np.nan), None
    if with_ids:
        boundaries = np.append(E_grid - grid_step / 2.0, E_grid[-1] + grid_step / 2.0)
        values = ids(lam, alpha, np.concatenate([E_grid, boundaries]), params.ids_size, params.n_phases,
                     params.seed)
        density, cell_density = values[:E_grid.size], values[E_grid.size:]
    return SpectrumApproximation(lam, alpha, grid_step, E_grid, member, scan.margin,
                                 scan.indeterminate, density, merge_runs(E_grid, member), cell_density)


def discriminant(lam: float, p: int, q: int, theta: float, E):
    """Trace of the q-step transfer matrix product at alpha = p/q."""
    energies = np.atleast_1d(np.asarray(E, dtype=float))
    prod = np.broadcast_to(np.eye(2), energies.shape + (2, 2)).copy()
    step = np.zeros(energies.shape + (2, 2))
    step[..., 0, 1] = -1.0
    step[..., 1, 0] = 1.0
    for j in range(q):
        step[..., 0, 0] = energies - 2.0 * lam * math.cos(TWO_PI * ((theta + j * p / q) % 1.0))
        prod = step @ prod
    traces = np.trace(prod, axis1=-2, axis2=-1)
    return float(traces[0]) if np.ndim(E) == 0 else traces


def _periodic_matrix(lam: float, p: int, q: int, theta: float, sign: float) -> np.ndarray:
    """q x q section with corner entries `sign` (Floquet phase 0 or pi)."""
    diag = 2.0 * lam * np.cos(TWO_PI * ((theta + np.arange(q) * p / q) % 1.0))
    mat = np.diag(diag)
    if q == 1:
        mat[0, 0] += 2.0 * sign
        return mat
    off = np.ones(q - 1)
    mat += np.diag(off, 1) + np.diag(off, -1)
    mat[0, q - 1] += sign
    mat[q - 1, 0] += sign
    return mat


def band_edges(lam: float, p: int, q: int, theta: float) -> np.ndarray:
    """(q, 2) band edges from periodic and antiperiodic eigenvalues."""
    periodic = scipy.linalg.eigvalsh(_periodic_matrix(lam, p, q, theta, 1.0))
    antiperiodic = scipy.linalg.eigvalsh(_periodic_matrix(lam, p, q, theta, -1.0))
    edges = np.sort(np.concatenate([periodic, antiperiodic]))
    return edges.reshape(q, 2)


def merge_intervals(intervals: Sequence[Interval]) -> List[Interval]:
    """Union of closed intervals, sorted and disjoint."""
    merged: List[List[float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(float(lo), float(hi)) for lo, hi in merged]


def rational_spectrum(lam: float, p: int, q: int, theta_samples=1) -> List[Interval]:
    """
    Spectrum of the periodic operator at alpha = p/q: energies where
    |discriminant| <= 2 for at least one sampled phase, as merged intervals.

    Args:
        lam: coupling
        p, q: coprime, q >= 1
        theta_samples: number of equidistributed phases or an explicit sequence
    """
    if q < 1 or math.gcd(p, q) != 1:
        raise DomainError(f"{p}/{q} must be a reduced fraction with q >= 1")
    if np.ndim(theta_samples) == 0:
        thetas = np.arange(int(theta_samples)) / (int(theta_samples) * q)
    else:
        thetas = np.asarray(theta_samples, dtype=float)
    bands = [tuple(edge) for theta in thetas for edge in band_edges(lam, p, q, float(theta))]
    return merge_intervals(bands)


def _distance_to_union(points: np.ndarray, intervals: Sequence[Interval]) -> np.ndarray:
    lo = np.array([a for a, _ in intervals])[None, :]
    hi = np.array([b for _, b in intervals])[None, :]
    pts = points[:, None]
    gaps = np.maximum(np.maximum(lo - pts, pts - hi), 0.0)
    return gaps.min(axis=1)


def _directed_hausdorff(a: Sequence[Interval], b: Sequence[Interval]) -> float:
    points = [x for interval in a for x in interval]
    for (_, hi), (lo, _) in zip(b[:-1], b[1:]):
        mid = 0.5 * (hi + lo)
        if any(x <= mid <= y for x, y in a):
            points.append(mid)
    return float(np.max(_distance_to_union(np.array(points), b)))


def hausdorff_distance(intervals_a: Sequence[Interval], intervals_b: Sequence[Interval]) -> float:
    """Hausdorff distance between two finite unions of closed intervals."""
    if not intervals_a or not intervals_b:
        raise DomainError("Hausdorff distance needs two non-empty interval lists")
    a = merge_intervals(intervals_a)
    b = merge_intervals(intervals_b)
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
