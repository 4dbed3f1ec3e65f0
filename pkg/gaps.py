"""
Spectral gaps of the almost Mathieu operator.
Detection on a scanned grid, gap labels N = {k alpha}, the all-labels-open
report, gap-edge probes and the lambda <-> 1/lambda duality check.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from arithmetic import Frequency, torus_distance
from cocycle import UHResult, rotation_numbers, uh_scan
from config import MAX_LABEL, TOLERANCES
from errors import AmbiguousLabelError, DomainError, GapInconsistencyError, NoLabelError
from spectrum import (SpectrumApproximation, SpectrumParams, hausdorff_distance, ids,
                      spectrum_intervals)

logger = logging.getLogger(__name__)

# rotation-based IDS estimates are trusted to PLATEAU_SLACK / n_iter
PLATEAU_SLACK = 20.0

# indeterminate UH verdicts are retried with UH_ESCALATION times more iterations
UH_ESCALATION = 5

# energies sampled across a plateau bracket when looking for its most hyperbolic point
PLATEAU_SAMPLES = 33


@dataclass(frozen=True)
class SpectralGap:
    """An open interval (e_minus, e_plus) of the resolvent set with constant IDS."""

    e_minus: float
    e_plus: float
    ids_value: float
    label: Optional[int] = None
    label_residual: Optional[float] = None

    def __post_init__(self):
        if not self.e_minus < self.e_plus:
            raise DomainError(f"gap edges out of order: {self.e_minus} >= {self.e_plus}")

    @property
    def width(self) -> float:
        return self.e_plus - self.e_minus

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.e_minus + self.e_plus)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'e_minus': self.e_minus,
            'e_plus': self.e_plus,
            'width': self.width,
            'ids': self.ids_value,
            'label': self.label,
            'residual': self.label_residual,
        }


def _label_order(k_max: int) -> np.ndarray:
    """1, -1, 2, -2, ..., k_max, -k_max."""
    ks = np.arange(1, k_max + 1)
    return np.column_stack([ks, -ks]).ravel()


def label_gap(ids_value: float, alpha: Frequency, k_max: int = MAX_LABEL,
              tol: float = 1e-3) -> Tuple[int, float]:
    """
    The label k, 0 < |k| <= k_max, minimizing ||ids_value - k alpha||.

    Raises:
        NoLabelError: best residual above tol
        AmbiguousLabelError: runner-up within tol/2 of the best
    """
    if not 0.0 < ids_value < 1.0:
        raise DomainError(f"IDS value {ids_value} outside (0, 1)")
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    ks = _label_order(k_max)
    residuals = torus_distance(ids_value - ks * alpha.value)
    order = np.argsort(residuals, kind='stable')
    best, runner_up = order[0], order[1]
    if residuals[best] > tol:
        raise NoLabelError(f"IDS {ids_value:.6f} is {residuals[best]:.2e} away from every k*alpha, |k| <= {k_max}")
    if residuals[runner_up] <= residuals[best] + tol / 2.0:
        raise AmbiguousLabelError(
            f"IDS {ids_value:.6f} matches k={ks[best]} and k={ks[runner_up]} within {tol / 2:.1e}")
    return int(ks[best]), float(residuals[best])


def detect_gaps(spec: SpectrumApproximation, ids_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                min_width: Optional[float] = None, ids_tol: float = TOLERANCES['ids_plateau'],
                alpha: Optional[Frequency] = None, k_max: int = MAX_LABEL,
                label_tol: Optional[float] = None) -> List[SpectralGap]:
    """
    Bounded complement intervals of a spectrum scan, wider than min_width.

    Each gap carries the IDS at the grid point nearest its midpoint; the IDS
    must stay within ids_tol across the gap. With `alpha` given, gaps are also
    labelled and labels must be distinct.

    Args:
        spec: scan covering the norm-bound interval
        ids_fn: IDS evaluator on an energy array; defaults to the scan's IDS column
        min_width: default 2 * grid step
        ids_tol: allowed IDS variation inside a gap
        alpha: frequency for labelling, optional
        k_max: label search bound
        label_tol: labelling tolerance, default 10 * grid step
    """
    min_width = 2.0 * spec.step if min_width is None else min_width
    label_tol = 10.0 * spec.step if label_tol is None else label_tol
    gaps: List[SpectralGap] = []
    for (_, lo), (hi, _) in zip(spec.intervals[:-1], spec.intervals[1:]):
        if hi - lo <= min_width:
            logger.debug("unresolved gap (%.6f, %.6f)", lo, hi)
            continue
        mask = (spec.energies > lo) & (spec.energies < hi)
        inside = spec.energies[mask]
        values = np.asarray(ids_fn(inside)) if ids_fn is not None else spec.ids[mask]
        if np.any(np.isnan(values)):
            raise DomainError("gap detection needs IDS values; pass ids_fn or scan with IDS")
        spread = float(values.max() - values.min())
        if spread > ids_tol:
            raise GapInconsistencyError(
                f"IDS varies by {spread:.2e} inside the gap ({lo:.6f}, {hi:.6f})")
        mid = int(np.argmin(np.abs(inside - 0.5 * (lo + hi))))
        value = float(values[mid])
        label, residual = (label_gap(value, alpha, k_max, label_tol) if alpha is not None else (None, None))
        gaps.append(SpectralGap(lo, hi, value, label, residual))

    labels = [g.label for g in gaps if g.label is not None]
    if len(labels) != len(set(labels)):
        raise AmbiguousLabelError(f"two gaps share a label: {sorted(labels)}")
    return gaps


def _multisection(predicate: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                  xtol: float, points: int) -> Tuple[float, float]:
    """
    Bracket the first point of [lo, hi] where a monotone predicate turns true.

    Returns:
        (last false, first true); equal ends when the predicate holds at lo
    """
    while hi - lo > xtol:
        grid = np.linspace(lo, hi, points)
        flags = np.asarray(predicate(grid), dtype=bool)
        flags[-1] = True
        first = int(np.argmax(flags))
        if first == 0:
            return lo, lo
        lo, hi = float(grid[first - 1]), float(grid[first])
    return lo, hi


@dataclass(frozen=True)
class DryMartiniEntry:
    """Outcome for one label k."""

    k: int
    found: bool
    status: str
    width: float = 0.0
    ids: Optional[float] = None
    residual: Optional[float] = None
    gap: Optional[SpectralGap] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'found': self.found,
            'e_minus': self.gap.e_minus if self.gap else None,
            'e_plus': self.gap.e_plus if self.gap else None,
            'width': self.width,
            'ids': self.ids,
            'residual': self.residual,
        }


@dataclass(frozen=True)
class DryMartiniReport:
    """Are all gaps with labels 0 < |k| <= k_max open?"""

    lam: float
    alpha: Frequency
    k_max: int
    grid_step: float
    entries: Tuple[DryMartiniEntry, ...]
    flags: Tuple[str, ...] = ()

    @property
    def all_open(self) -> bool:
        return bool(self.entries) and all(e.found for e in self.entries)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda': self.lam,
            'alpha': self.alpha.to_dict(),
            'k_max': self.k_max,
            'grid_step': self.grid_step,
            'labels': [e.to_dict() for e in self.entries],
            'all_open': self.all_open,
            'flags': list(self.flags),
        }

    def csv_rows(self) -> List[List[Any]]:
        return [[e.k, int(e.found), e.status,
                 e.gap.e_minus if e.gap else '', e.gap.e_plus if e.gap else '',
                 e.width, '' if e.ids is None else e.ids, '' if e.residual is None else e.residual]
                for e in self.entries]


def _rotation_ids(lam: float, alpha: Frequency, n_iter: int) -> Callable[[np.ndarray], np.ndarray]:
    def evaluate(energies: np.ndarray) -> np.ndarray:
        rho, _ = rotation_numbers(lam, alpha, energies, n_iter)
        return 1.0 - 2.0 * rho
    return evaluate


def _certified(lam: float, alpha: Frequency, params: SpectrumParams) -> Callable[[np.ndarray], np.ndarray]:
    def evaluate(energies: np.ndarray) -> np.ndarray:
        return uh_scan(lam, alpha, energies, params.n_iter, params.n_phases, params.seed).hyperbolic
    return evaluate


def _plateau_verdict(lam: float, alpha: Frequency, e_left: float, e_right: float, params: SpectrumParams,
                     max_uh_iters: int) -> Tuple[float, UHResult, SpectrumParams]:
    """
    Most hyperbolic sample of the plateau bracket, with its UH verdict.

    An indeterminate verdict is recomputed with UH_ESCALATION times more
    iterations, up to max_uh_iters; the budget that settled it is returned.
    """
    samples = np.linspace(e_left, e_right, PLATEAU_SAMPLES)
    scan = uh_scan(lam, alpha, samples, params.n_iter, params.n_phases, params.seed)
    best = int(np.argmax(scan.excess))
    mid = float(samples[best])
    verdict = scan.result(best)
    budget = params
    while verdict.indeterminate and budget.n_iter < max_uh_iters:
        budget = replace(budget, n_iter=min(UH_ESCALATION * budget.n_iter, max_uh_iters))
        verdict = uh_scan(lam, alpha, [mid], budget.n_iter, budget.n_phases, budget.seed).result(0)
        logger.debug("UH at %.6f retried with %d iterations: excess %.3e", mid, budget.n_iter, verdict.excess)
    return mid, verdict, budget


def _check_label(lam: float, alpha: Frequency, k: int, grid_step: float, min_width: float,
                 params: SpectrumParams, section_points: int, max_uh_iters: int) -> DryMartiniEntry:
    target = float(np.mod(k * alpha.value, 1.0))
    slack = PLATEAU_SLACK / params.n_iter
    bound = 2.0 + 2.0 * lam + grid_step
    xtol = grid_step / 8.0
    density = _rotation_ids(lam, alpha, params.n_iter)

    _, e_left = _multisection(lambda e: density(e) >= target - slack, -bound, bound, xtol, section_points)
    e_right, _ = _multisection(lambda e: density(e) > target + slack, -bound, bound, xtol, section_points)
    if e_right - e_left <= grid_step:
        return DryMartiniEntry(k, False, 'unresolved', max(e_right - e_left, 0.0))

    mid, verdict, budget = _plateau_verdict(lam, alpha, e_left, e_right, params, max_uh_iters)
    measured = float(density(np.array([mid]))[0])
    residual = float(torus_distance(measured - k * alpha.value))
    if verdict.indeterminate:
        return DryMartiniEntry(k, False, 'unresolved', 0.0, measured, residual)
    if not verdict.hyperbolic:
        return DryMartiniEntry(k, False, 'not-hyperbolic', 0.0, measured, residual)
    certified = _certified(lam, alpha, budget)

    uh_points = max(8, section_points // 4)
    _, e_minus = _multisection(certified, e_left - grid_step, mid, grid_step / 4.0, uh_points)
    e_plus, _ = _multisection(lambda e: ~certified(e), mid, e_right + grid_step, grid_step / 4.0, uh_points)
    width = e_plus - e_minus
    if width <= min_width:
        return DryMartiniEntry(k, False, 'unresolved', max(width, 0.0), measured, residual)
    gap = SpectralGap(e_minus, e_plus, measured, k, residual)
    logger.debug("label %d open: (%.6f, %.6f)", k, e_minus, e_plus)
    return DryMartiniEntry(k, True, 'open', width, measured, residual, gap)


def dry_martini_check(lam: float, alpha: Frequency, k_max: int, grid_step: float,
                      min_width: Optional[float] = None, params: SpectrumParams = SpectrumParams(n_iter=20000),
                      section_points: int = 64, max_uh_iters: Optional[int] = None) -> DryMartiniReport:
    """
    Look for the gap of every label 0 < |k| <= k_max.

    The IDS (through the rotation number) is bisected to the plateau at
    {k alpha}; a gap counts as open when the most hyperbolic point of the
    plateau passes the UH test and the certified interval around it is wider
    than min_width. Narrow plateaus, and plateaus whose UH verdict stays
    indeterminate up to max_uh_iters, are reported as unresolved, never as
    closed.

    Args:
        lam: coupling (lam = 1 is reported but carries no openness claim)
        alpha: frequency
        k_max: label bound
        grid_step: energy resolution
        min_width: default 2 * grid_step
        params: iteration budget for rotation numbers and UH tests
        section_points: evaluations per multisection round
        max_uh_iters: iteration cap for retried UH verdicts, default UH_ESCALATION**2 * params.n_iter
    """
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if k_max < 1 or k_max > MAX_LABEL:
        raise DomainError(f"k_max must lie in 1..{MAX_LABEL}")
    if grid_step <= 0:
        raise DomainError("grid step must be positive")
    min_width = 2.0 * grid_step if min_width is None else min_width
    max_uh_iters = UH_ESCALATION ** 2 * params.n_iter if max_uh_iters is None else max_uh_iters
    labels = [int(k) for k in _label_order(k_max)]

    if lam == 0:
        entries = tuple(DryMartiniEntry(k, False, 'free-operator') for k in labels)
        return DryMartiniReport(lam, alpha, k_max, grid_step, entries, ('free-operator: no gaps',))

    flags = ('critical-coupling: openness not expected',) if lam == 1 else ()
    entries = tuple(_check_label(lam, alpha, k, grid_step, min_width, params, section_points, max_uh_iters)
                    for k in labels)
    return DryMartiniReport(lam, alpha, k_max, grid_step, entries, flags)


def _doubled_residual(rho: float, k: int, alpha: Frequency) -> float:
    return float(torus_distance(2.0 * rho + k * alpha.value))


def doubled_rotation_residual(lam: float, alpha: Frequency, E: float, k: int, n_iter: int = 20000) -> float:
    """||2 rho(E) + k alpha||, zero inside the gap labelled k."""
    rho, _ = rotation_numbers(lam, alpha, [E], n_iter)
    return _doubled_residual(float(rho[0]), k, alpha)


@dataclass(frozen=True)
class GapEdgeProbe:
    """UH margins and rotation numbers stepping from each edge into a gap."""

    taus: np.ndarray
    left_margins: np.ndarray
    right_margins: np.ndarray
    mid_margin: float
    mid_hyperbolic: bool
    margins_monotone: bool
    rotation_spread: float
    rotation_constant: bool
    indeterminate_count: int
    label_residual: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'taus': self.taus.tolist(),
            'left_margins': self.left_margins.tolist(),
            'right_margins': self.right_margins.tolist(),
            'mid_margin': self.mid_margin,
            'mid_hyperbolic': self.mid_hyperbolic,
            'margins_monotone': self.margins_monotone,
            'rotation_spread': self.rotation_spread,
            'rotation_constant': self.rotation_constant,
            'indeterminate_count': self.indeterminate_count,
            'label_residual': self.label_residual,
        }


def gap_edge_probe(lam: float, alpha: Frequency, gap: SpectralGap, n_tau: int = 8,
                   params: SpectrumParams = SpectrumParams(n_iter=20000),
                   rotation_tol: Optional[float] = None) -> GapEdgeProbe:
    """
    Probe E_edge + tau for tau stepping into the gap from both edges.

    Margin monotonicity is reported, not asserted. Rotation constancy is
    measured on the interior samples against the midpoint value, since the
    edges themselves are the outermost spectrum cells of the scan. When the
    gap is labelled, the doubled rotation number is also compared with
    -k alpha.
    """
    if gap.width <= 0:
        raise DomainError("gap must have positive width")
    if n_tau < 1:
        raise DomainError("n_tau must be at least 1")
    rotation_tol = 2.0 / params.n_iter if rotation_tol is None else rotation_tol
    taus = 0.5 * gap.width * np.arange(1, n_tau + 1) / (n_tau + 1)
    left = gap.e_minus + taus
    right = gap.e_plus - taus
    energies = np.concatenate([[gap.e_minus], left, [gap.midpoint], right, [gap.e_plus]])

    scan = uh_scan(lam, alpha, energies, params.n_iter, params.n_phases, params.seed)
    left_margins = scan.margin[1:n_tau + 1]
    right_margins = scan.margin[n_tau + 2:2 * n_tau + 2]
    mid = n_tau + 1
    slack = scan.margin.std() * 1e-3 + 1e-12
    monotone = bool(np.all(np.diff(left_margins) >= -slack) and np.all(np.diff(right_margins) >= -slack)
                    and scan.margin[mid] >= max(left_margins[0], right_margins[0]))

    rho, _ = rotation_numbers(lam, alpha, energies, params.n_iter)
    spread = float(np.max(np.abs(rho[1:-1] - rho[mid])))
    residual = None if gap.label is None else _doubled_residual(rho[mid], gap.label, alpha)
    return GapEdgeProbe(taus, left_margins, right_margins, float(scan.margin[mid]),
                        bool(scan.hyperbolic[mid]), monotone, spread, spread <= rotation_tol,
                        int(np.count_nonzero(scan.indeterminate)), residual)


@dataclass(frozen=True)
class DualityReport:
    """Comparison of lam * Sigma_{1/lam} with Sigma_lam and of the two IDS."""

    lam: float
    grid_step: float
    hausdorff: Optional[float] = None
    ids_discrepancy: Optional[float] = None
    intervals: List[Tuple[float, float]] = field(default_factory=list)
    dual_intervals: List[Tuple[float, float]] = field(default_factory=list)
    skipped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lambda': self.lam,
            'grid_step': self.grid_step,
            'hausdorff': self.hausdorff,
            'ids_discrepancy': self.ids_discrepancy,
            'intervals': [list(i) for i in self.intervals],
            'scaled_dual_intervals': [list(i) for i in self.dual_intervals],
            'skipped': self.skipped,
        }


def duality_check(lam: float, alpha: Frequency, grid_step: float,
                  params: SpectrumParams = SpectrumParams(), ids_points: int = 200) -> DualityReport:
    """
    Compute Sigma_{1/lam} and Sigma_lam independently and compare
    lam * Sigma_{1/lam} with Sigma_lam, plus sup |N_{1/lam}(E) - N_lam(lam E)|.

    The dual scan uses step grid_step / lam so both grids coincide after scaling.
    lam = 1 is self-dual and returns a skipped report.
    """
    if lam == 1:
        return DualityReport(lam, grid_step, skipped=True)
    if lam < 1:
        raise DomainError(f"duality check needs lambda > 1, got {lam}")
    dual = 1.0 / lam
    main_scan = spectrum_intervals(lam, alpha, params=params, step=grid_step, with_ids=False)
    dual_scan = spectrum_intervals(dual, alpha, params=params, step=grid_step / lam, with_ids=False)
    scaled = [(lam * a, lam * b) for a, b in dual_scan.intervals]
    distance = hausdorff_distance(scaled, main_scan.intervals)

    energies = np.linspace(-2.0 - 2.0 * dual, 2.0 + 2.0 * dual, ids_points)
    dual_ids = ids(dual, alpha, energies, params.ids_size, params.n_phases, params.seed)
    main_ids = ids(lam, alpha, lam * energies, params.ids_size, params.n_phases, params.seed)
    discrepancy = float(np.max(np.abs(dual_ids - main_ids)))
    logger.debug("duality lam=%g: hausdorff %.2e, ids %.2e", lam, distance, discrepancy)
    return DualityReport(lam, grid_step, distance, discrepancy, main_scan.intervals, scaled)
