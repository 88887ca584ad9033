import math
from typing import Iterable, List, Optional, Union

import numpy as np
from scipy import special, stats

ArrayLike = Union[float, np.ndarray]

# Absolute tolerance for endpoint coincidence on the line and the circle.
ENDPOINT_TOL = 1e-12
TWO_PI = 2.0 * math.pi


def normal_cdf(x: ArrayLike) -> ArrayLike:
    """Standard normal distribution function.

    Uses ``scipy.special.ndtr``; infinite arguments map to 0 and 1.

    Args:
        x: Scalar or array of arguments

    Returns:
        Values of the standard normal CDF
    """
    return special.ndtr(x)


def normal_interval_mass(lower: ArrayLike, upper: ArrayLike) -> ArrayLike:
    """Probability that a standard normal variable falls in [lower, upper).

    Evaluated on the tail nearest to the interval so that two values close to 1
    are never subtracted.

    Args:
        lower: Standardized lower endpoints (may be -inf)
        upper: Standardized upper endpoints (may be +inf)

    Returns:
        Interval masses, clipped to [0, 1]
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    right_tail = lower > 0
    direct = special.ndtr(upper) - special.ndtr(lower)
    mirrored = special.ndtr(-lower) - special.ndtr(-upper)
    mass = np.where(right_tail, mirrored, direct)
    return np.clip(mass, 0.0, 1.0)


def binomial_pmf(n: ArrayLike, m: ArrayLike, eps: float) -> ArrayLike:
    """Binomial probability C(m, n) eps^n (1 - eps)^(m - n), zero when n > m.

    Args:
        n: Number of successes
        m: Number of trials
        eps: Success probability in (0, 1)

    Returns:
        Probability mass values
    """
    return stats.binom.pmf(n, m, eps)


def binomial_tail(threshold: ArrayLike, m: ArrayLike, eps: float) -> ArrayLike:
    """P(Bin(m, eps) > threshold)."""
    return stats.binom.sf(threshold, m, eps)


def reduce_angle(theta: float) -> float:
    """Reduce an angle into [0, 2*pi), snapping values within tolerance of 2*pi to 0."""
    reduced = math.fmod(theta, TWO_PI)
    if reduced < 0:
        reduced += TWO_PI
    if reduced >= TWO_PI - ENDPOINT_TOL or abs(reduced) <= ENDPOINT_TOL:
        return 0.0
    return reduced


def format_float(value: float) -> str:
    """Format a float with 17 significant digits (round-trip exact).

    Args:
        value: The number to format

    Returns:
        str: Formatted number; infinities as 'inf' / '-inf'
    """
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def format_endpoint(value: float) -> str:
    """Shortest round-trip text for a set endpoint."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """Return the project's seedable generator (PCG64 through SeedSequence)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def derive_seeds(seed: Optional[int], count: int) -> List[np.random.SeedSequence]:
    """Spawn ``count`` independent child seed sequences from one seed."""
    return np.random.SeedSequence(seed).spawn(count)


def is_nondecreasing(values: Iterable[float], tol: float = 1e-12) -> bool:
    """Check that a sequence never drops by more than ``tol``."""
    values = list(values)
    return all(b >= a - tol for a, b in zip(values, values[1:]))


def is_nonincreasing(values: Iterable[float], tol: float = 1e-12) -> bool:
    """Check that a sequence never rises by more than ``tol``."""
    values = list(values)
    return all(b <= a + tol for a, b in zip(values, values[1:]))


def power_law_exponent(values: List[float], indices: Optional[List[float]] = None) -> float:
    """Least-squares exponent r of values ~ index^(-r) on a log-log scale.

    Args:
        values: Positive sequence values
        indices: Abscissae (defaults to 1..n)

    Returns:
        float: Fitted exponent; +inf if a value is zero, 0.0 for fewer than two points
    """
    if indices is None:
        indices = list(range(1, len(values) + 1))
    if any(v <= 0 for v in values):
        return math.inf
    if len(values) < 2:
        return 0.0
    x = np.log(np.asarray(indices, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if np.ptp(x) == 0:
        return 0.0
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
