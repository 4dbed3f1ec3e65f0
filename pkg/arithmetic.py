"""
Continued-fraction machinery for rotation frequencies.
Best approximants p_n/q_n, the exponential Liouville measure beta(alpha),
torus distances and the small-divisor profile every other module consumes.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Any, List, Optional, Sequence, Tuple

import numpy as np

from config import ALPHA_PRESETS, TOLERANCES
from errors import DomainError, InsufficientDataError, ConvergentIndexError

logger = logging.getLogger(__name__)

INT64_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class Approximant:
    """A best rational approximation p/q sitting at position `index`."""

    p: int
    q: int
    index: int

    def __post_init__(self):
        if self.q < 1 or math.gcd(self.p, self.q) != 1:
            raise DomainError(f"approximant {self.p}/{self.q} is not reduced")

    @property
    def value(self) -> float:
        return self.p / self.q


def _convergents(quotients: Sequence[int]) -> Tuple[List[Tuple[int, int]], bool]:
    """
    Run the recurrence p_{n+1} = a_{n+1} p_n + p_{n-1} (same for q).

    Starts from (p_0, q_0) = (0, 1) and (p_{-1}, q_{-1}) = (1, 0).

    Returns:
        (list of (p_n, q_n), truncated flag)
    """
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    pairs = [(p_cur, q_cur)]
    for a in quotients:
        p_next = a * p_cur + p_prev
        q_next = a * q_cur + q_prev
        if q_next > INT64_MAX or p_next > INT64_MAX:
            return pairs, True
        p_prev, q_prev, p_cur, q_cur = p_cur, q_cur, p_next, q_next
        pairs.append((p_cur, q_cur))
    return pairs, False


@dataclass(frozen=True)
class Frequency:
    """
    A rotation frequency in (0, 1) with its continued-fraction data.

    Attributes:
        value: the frequency as a float
        partial_quotients: a_1..a_m
        convergents: (p_n, q_n) for n = 0..m, starting at (0, 1)
        rational: True when the expansion terminated (periodic surrogate)
        truncated: True when the expansion stopped before 64-bit overflow
    """

    value: float
    partial_quotients: Tuple[int, ...]
    convergents: Tuple[Tuple[int, int], ...] = field(repr=False)
    rational: bool = False
    truncated: bool = False
    name: Optional[str] = None

    @classmethod
    def from_quotients(cls, quotients: Sequence[int], value: Optional[float] = None,
                       rational: bool = False, name: Optional[str] = None) -> "Frequency":
        """Build a Frequency directly from partial quotients, avoiding float noise."""
        quotients = [int(a) for a in quotients]
        if not quotients or any(a < 1 for a in quotients):
            raise DomainError("partial quotients must be positive integers")
        pairs, truncated = _convergents(quotients)
        quotients = quotients[:len(pairs) - 1]
        if value is None:
            # evaluate [0; a_1, a_2, ...] from the tail
            tail = 0.0
            for a in reversed(quotients):
                tail = 1.0 / (a + tail)
            value = tail
        if not 0.0 < value < 1.0:
            raise DomainError(f"frequency {value} outside (0, 1)")
        return cls(float(value), tuple(quotients), tuple(pairs), rational, truncated, name)

    @classmethod
    def rational_surrogate(cls, p: int, q: int) -> "Frequency":
        """The exact frequency p/q, 0 < p < q."""
        if q < 2 or not 0 < p < q or math.gcd(p, q) != 1:
            raise DomainError(f"{p}/{q} is not a reduced fraction in (0, 1)")
        quotients = []
        x = Fraction(p, q)
        while x:
            y = 1 / x
            a = math.floor(y)
            quotients.append(a)
            x = y - a
        return cls.from_quotients(quotients, value=p / q, rational=True, name=f"{p}/{q}")

    @classmethod
    def preset(cls, name: str) -> "Frequency":
        if name not in ALPHA_PRESETS:
            raise DomainError(f"unknown alpha preset '{name}' (choose from {sorted(ALPHA_PRESETS)})")
        spec = ALPHA_PRESETS[name]
        return cls.from_quotients(spec['quotients'], value=spec['value'], name=name)

    @property
    def denominators(self) -> List[int]:
        return [q for _, q in self.convergents]

    def approximants(self) -> List[Approximant]:
        return [Approximant(p, q, n) for n, (p, q) in enumerate(self.convergents)]

    def approximant(self, n: int) -> Approximant:
        if not 0 <= n < len(self.convergents):
            raise ConvergentIndexError(f"convergent index {n} outside 0..{len(self.convergents) - 1}")
        p, q = self.convergents[n]
        return Approximant(p, q, n)

    def next_denominator(self, bound: int) -> int:
        """Smallest stored q_n strictly greater than `bound`."""
        for q in self.denominators:
            if q > bound:
                return q
        raise ConvergentIndexError(f"no stored denominator exceeds {bound}")

    def describe(self) -> str:
        return self.name or f"{self.value:.12g}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            'value': self.value,
            'quotients': list(self.partial_quotients),
            'convergents': [[p, q] for p, q in self.convergents],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Frequency":
        return cls.from_quotients(data['quotients'], value=data['value'])


def golden() -> Frequency:
    return Frequency.preset('golden')


def silver() -> Frequency:
    return Frequency.preset('silver')


def continued_fraction_expand(x: float, max_terms: int) -> Frequency:
    """
    Expand x in (0, 1) into a continued fraction.

    The double is expanded exactly (as a Fraction); a remainder below the
    configured tolerance is treated as zero and ends the expansion, which is
    how rational inputs like 0.5 or 0.1 terminate.

    Args:
        x: real number in (0, 1)
        max_terms: maximal number of partial quotients

    Returns:
        Frequency for x
    """
    if not 0.0 < x < 1.0 or not math.isfinite(x):
        raise DomainError(f"cannot expand {x}: expected 0 < x < 1")
    if max_terms < 1:
        raise DomainError("max_terms must be at least 1")

    tol = Fraction(TOLERANCES['cf_remainder'])
    remainder = Fraction(x)
    quotients: List[int] = []
    rational = False
    while len(quotients) < max_terms:
        y = 1 / remainder
        a = math.floor(y)
        frac = y - a
        if frac < tol or 1 - frac < tol:
            quotients.append(a if frac < tol else a + 1)
            rational = True
            break
        quotients.append(a)
        remainder = frac

    pairs, truncated = _convergents(quotients)
    if truncated:
        logger.debug("expansion of %r stopped at %d terms before overflow", x, len(pairs) - 1)
        quotients = quotients[:len(pairs) - 1]
        rational = False
    return Frequency(float(x), tuple(quotients), tuple(pairs), rational, truncated)


def beta_profile(f: Frequency) -> np.ndarray:
    """The finite sequence ln(q_{n+1}) / q_n over stored convergents."""
    q = np.array(f.denominators, dtype=float)
    if q.size < 3:
        raise InsufficientDataError(f"beta needs at least 3 convergents, got {q.size}")
    return np.log(q[1:]) / q[:-1]


def beta_estimate(f: Frequency) -> float:
    """
    Finite-data proxy for beta(alpha) = limsup ln(q_{n+1}) / q_n.

    This is the maximum over stored convergents, an estimate and not the limit.
    """
    return float(np.max(beta_profile(f)))


def torus_distance(x):
    """Distance from x to the nearest integer, elementwise."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x - np.rint(x))
    return float(d) if d.ndim == 0 else d


@dataclass(frozen=True)
class DivisorProfile:
    """Torus distances ||k alpha|| for 1 <= k <= k_max against the 1/(7 q_n) floor."""

    n: int
    q_n: int
    q_next: int
    ks: np.ndarray
    distances: np.ndarray
    exempt: np.ndarray
    violations: np.ndarray

    @property
    def bound(self) -> float:
        return 1.0 / (7 * self.q_n)

    @property
    def violation_count(self) -> int:
        return int(np.count_nonzero(self.violations))

    def rows(self) -> List[Tuple[int, float, bool, bool]]:
        return [(int(k), float(d), bool(e), bool(v))
                for k, d, e, v in zip(self.ks, self.distances, self.exempt, self.violations)]


def divisor_profile(f: Frequency, n: int, k_max: int) -> DivisorProfile:
    """
    Check ||k alpha|| >= 1/(7 q_n) for 1 <= k <= k_max, q_n not dividing k.

    Args:
        f: frequency
        n: convergent index; q_{n+1} must be stored
        k_max: largest k, at most q_{n+1} / 6

    Returns:
        DivisorProfile with exempt multiples of q_n and flagged violations
    """
    if not 0 <= n < len(f.convergents) - 1:
        raise ConvergentIndexError(f"convergent index {n} needs q_(n+1); stored 0..{len(f.convergents) - 1}")
    q_n = f.convergents[n][1]
    q_next = f.convergents[n + 1][1]
    if k_max * 6 > q_next:
        raise DomainError(f"k_max={k_max} exceeds q_(n+1)/6 = {q_next / 6:.3g}")

    ks = np.arange(1, k_max + 1, dtype=np.int64)
    # k * value in float is fine while k stays below q_(n+1)
    distances = torus_distance(ks * f.value) if ks.size else np.zeros(0)
    exempt = ks % q_n == 0
    violations = ~exempt & (distances < 1.0 / (7 * q_n))
    return DivisorProfile(n, q_n, q_next, ks, np.atleast_1d(distances), exempt, violations)


def phase_sample(n_phases: int, seed: int = 0) -> np.ndarray:
    """Equidistributed phases j/n + jitter, the jitter drawn from `seed`."""
    if n_phases < 1:
        raise DomainError("n_phases must be at least 1")
    jitter = np.random.default_rng(seed).random()
    return (np.arange(n_phases) + jitter) / n_phases


def coverage_regime(beta: float, lam: float) -> str:
    """
    Name the arithmetic regime of (beta(alpha), lambda).

    'free' and 'critical' are the degenerate couplings; 'diophantine' is
    beta = 0; 'liouvillean-window' is e^-beta < lambda < e^beta (or beta infinite);
    'arithmetically-critical' is lambda or 1/lambda in [e^beta, e^2beta];
    everything else is 'almost-reducible'.
    """
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    if lam == 0:
        return 'free'
    if lam == 1:
        return 'critical'
    if beta == 0:
        return 'diophantine'
    if math.isinf(beta) or math.exp(-beta) < lam < math.exp(beta):
        return 'liouvillean-window'
    strength = max(lam, 1.0 / lam)
    if math.exp(beta) <= strength <= math.exp(2 * beta):
        return 'arithmetically-critical'
    return 'almost-reducible'
