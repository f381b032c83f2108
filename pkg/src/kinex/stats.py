"""Distribution estimation and verification.

Everything here is a pure function of its inputs: density estimates on
linear or constant-ratio bins, a Hill tail-exponent estimator reported
as a log-log density slope, goodness-of-fit distances, an analytic Beta
reference, moment-matched gamma fits, and smoothed mode counting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import DomainError

__all__ = [
    "DensityEstimate",
    "TailFit",
    "linear_edges",
    "log_edges",
    "histogram",
    "average_densities",
    "estimate_tail_exponent",
    "beta_pdf",
    "beta_cdf",
    "ks_statistic",
    "ks_two_sample",
    "gamma_moment_fit",
    "count_modes",
    "stationarity_check",
]

DEFAULT_TAIL_FRACTION = 0.05
DEFAULT_LOG_RATIO = 1.25
DEFAULT_SMOOTHING_WINDOW = 5
DEFAULT_PROMINENCE = 1.2


@dataclass(frozen=True)
class DensityEstimate:
    """Binned probability density normalized over the covered range.

    ``n_out`` counts samples that fell outside the bin range; they are
    excluded from the normalization, so density * width always sums
    to 1.
    """

    edges: np.ndarray
    density: np.ndarray
    n_samples: int
    scale: str  # "linear" | "log"
    n_out: int = 0

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise DomainError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if len(self.edges) < 2 or np.any(np.diff(self.edges) <= 0):
            raise DomainError("bin edges must be strictly increasing")
        if np.any(self.density < 0):
            raise DomainError("density must be nonnegative")
        total = float(np.sum(self.density * self.widths()))
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"density must integrate to 1 within 1e-9, got {total!r}")

    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def centers(self) -> np.ndarray:
        """Bin centers: arithmetic midpoints, or geometric means on log bins."""
        if self.scale == "log":
            return np.sqrt(self.edges[:-1] * self.edges[1:])
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True)
class TailFit:
    """Hill fit of a power-law tail, reported as a density exponent.

    ``density_exponent`` is the negated slope of log density vs log
    money, i.e. the survival-function (CDF) index plus one.
    """

    density_exponent: float
    xmin: float
    n_tail: int
    stderr: float

    def __post_init__(self):
        if self.n_tail < 10:
            raise DomainError(f"tail fit needs at least 10 samples, got {self.n_tail}")
        if not self.density_exponent > 1.0:
            raise DomainError(f"density exponent must exceed 1, got {self.density_exponent!r}")


def linear_edges(lo: float, hi: float, n_bins: int) -> np.ndarray:
    if not hi > lo:
        raise DomainError(f"need hi > lo, got [{lo!r}, {hi!r}]")
    if n_bins < 1:
        raise DomainError(f"need at least one bin, got {n_bins}")
    return np.linspace(lo, hi, n_bins + 1)


def log_edges(lo: float, hi: float, ratio: float = DEFAULT_LOG_RATIO) -> np.ndarray:
    """Constant-ratio bin edges from lo up to (at least) hi."""
    if not 0.0 < lo < hi:
        raise DomainError(f"log bins need 0 < lo < hi, got [{lo!r}, {hi!r}]")
    if not ratio > 1.0:
        raise DomainError(f"ratio must exceed 1, got {ratio!r}")
    n_bins = max(1, math.ceil(math.log(hi / lo) / math.log(ratio)))
    return lo * ratio ** np.arange(n_bins + 1)


def histogram(samples, edges, scale: str = "linear") -> DensityEstimate:
    """Density estimate on the given edges; out-of-range samples are dropped."""
    samples = np.asarray(samples, dtype=np.float64)
    edges = np.asarray(edges, dtype=np.float64)
    if len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing")
    counts, _ = np.histogram(samples, bins=edges)
    n_in = int(counts.sum())
    if n_in == 0:
        raise DomainError("no samples inside the bin range")
    density = counts / (n_in * np.diff(edges))
    return DensityEstimate(
        edges=edges,
        density=density,
        n_samples=samples.size,
        scale=scale,
        n_out=samples.size - n_in,
    )


def average_densities(estimates: list[DensityEstimate]) -> DensityEstimate:
    """Mean of densities computed on identical edges."""
    if not estimates:
        raise DomainError("nothing to average")
    first = estimates[0]
    for d in estimates[1:]:
        if d.scale != first.scale or not np.array_equal(d.edges, first.edges):
            raise DomainError("densities must share scale and bin edges")
    return DensityEstimate(
        edges=first.edges,
        density=np.mean([d.density for d in estimates], axis=0),
        n_samples=sum(d.n_samples for d in estimates),
        scale=first.scale,
        n_out=sum(d.n_out for d in estimates),
    )


def estimate_tail_exponent(samples, tail_fraction: float = DEFAULT_TAIL_FRACTION) -> TailFit:
    """Hill estimator on the top ``tail_fraction`` order statistics.

    With the k largest samples x_(1) >= ... >= x_(k) and xmin = x_(k),
    the CDF index is alpha = k / sum(log(x_(i) / xmin)) and the reported
    density exponent is alpha + 1, with stderr alpha / sqrt(k).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < 100:
        raise DomainError(f"tail estimation needs at least 100 samples, got {samples.size}")
    if not 0.0 < tail_fraction <= 1.0:
        raise DomainError(f"tail_fraction must be in (0, 1], got {tail_fraction!r}")
    k = int(samples.size * tail_fraction)
    if k < 10:
        raise DomainError(f"tail has only {k} samples; need at least 10")
    tail = np.partition(samples, samples.size - k)[-k:]
    xmin = float(tail.min())
    if xmin <= 0.0:
        raise DomainError("tail contains nonpositive samples")
    log_spread = float(np.sum(np.log(tail / xmin)))
    if log_spread <= 0.0:
        raise DomainError("tail has zero log-spread; no power law to fit")
    alpha = k / log_spread
    return TailFit(
        density_exponent=alpha + 1.0,
        xmin=xmin,
        n_tail=k,
        stderr=alpha / math.sqrt(k),
    )


def beta_pdf(x: float, a: float, b: float) -> float:
    """Beta(a, b) density at x, via log-gamma for the normalizer."""
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must be in (0, 1), got {x!r}")
    if not a > 0.0 or not b > 0.0:
        raise DomainError(f"shape parameters must be positive, got a={a!r}, b={b!r}")
    log_norm = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    return math.exp((a - 1.0) * math.log(x) + (b - 1.0) * math.log(1.0 - x) - log_norm)


def beta_cdf(x, a: float, b: float):
    """Beta(a, b) CDF (regularized incomplete beta), clipped to [0, 1] support."""
    if not a > 0.0 or not b > 0.0:
        raise DomainError(f"shape parameters must be positive, got a={a!r}, b={b!r}")
    return betainc(a, b, np.clip(x, 0.0, 1.0))


def ks_statistic(samples, reference_cdf) -> float:
    """Sup-norm distance between the empirical CDF and a reference CDF.

    ``reference_cdf`` must accept a sorted array of sample values and be
    monotone over their range.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n == 0:
        raise DomainError("need at least one sample")
    ref = np.asarray(reference_cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - ref))
    d_minus = float(np.max(ref - (grid - 1.0 / n)))
    return max(d_plus, d_minus, 0.0)


def ks_two_sample(a, b) -> float:
    """Sup-norm distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DomainError("both sample sets must be nonempty")
    support = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, support, side="right") / a.size
    cdf_b = np.searchsorted(b, support, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def gamma_moment_fit(samples) -> tuple[float, float]:
    """(shape, scale) of a gamma law by moment matching.

    shape = mean^2 / variance, scale = variance / mean.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < 2:
        raise DomainError("need at least two samples")
    mean = float(samples.mean())
    var = float(samples.var())
    if var == 0.0:
        raise DomainError("samples have zero variance; gamma fit undefined")
    if mean <= 0.0:
        raise DomainError(f"samples must have positive mean, got {mean!r}")
    return mean * mean / var, var / mean


def _smooth(density: np.ndarray, window: int) -> np.ndarray:
    # edge-replicating moving average: keeps boundary modes in place
    padded = np.pad(density, window // 2, mode="edge")
    return np.convolve(padded, np.ones(window) / window, mode="valid")


def count_modes(
    d: DensityEstimate,
    smoothing_window: int = DEFAULT_SMOOTHING_WINDOW,
    prominence: float = DEFAULT_PROMINENCE,
) -> int:
    """Number of significant local maxima of the smoothed density.

    A candidate peak (local maximum of the moving-average smooth,
    boundaries included) counts as a mode when its height exceeds
    ``prominence`` times the higher of the two valleys flanking it, the
    valley being the minimum between the peak and the neighboring
    candidate (or the array end).  The flanking-valley rule is what
    suppresses shoulder and tail wiggles that barely dip.
    """
    if smoothing_window < 1 or smoothing_window % 2 == 0:
        raise DomainError(f"smoothing window must be odd and positive, got {smoothing_window}")
    y = np.asarray(d.density, dtype=np.float64)
    if y.size < smoothing_window:
        raise DomainError(f"need at least {smoothing_window} bins, got {y.size}")
    y = _smooth(y, smoothing_window)
    n = y.size

    peaks = [
        k
        for k in range(n)
        if (k == 0 or y[k] > y[k - 1]) and (k == n - 1 or y[k] > y[k + 1])
    ]
    modes = 0
    for idx, k in enumerate(peaks):
        left_stop = peaks[idx - 1] if idx > 0 else 0
        right_stop = peaks[idx + 1] if idx + 1 < len(peaks) else n - 1
        # a side with nothing beyond the peak does not constrain it
        left_valley = float(y[left_stop : k + 1].min()) if k > left_stop else 0.0
        right_valley = float(y[k : right_stop + 1].min()) if right_stop > k else 0.0
        if y[k] > prominence * max(left_valley, right_valley):
            modes += 1
    return modes


def stationarity_check(window_a, window_b, tol: float) -> bool:
    """True when two sampling windows look like the same distribution."""
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol!r}")
    return ks_two_sample(window_a, window_b) < tol
