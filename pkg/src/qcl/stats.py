"""Empirical CDFs, pointwise confidence bands, mode and infimum estimates,
and the two contraction-coefficient experiments built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .channel import SpaceKind
from .contraction import eta_batch
from .errors import DomainError, UsageError
from .rng import as_stream, map_blocks
from .sampler import GlobalMode, SamplerMode, sample_fiber, sample_global

ETA_SLACK = 1e-10


class EmpiricalCdf:
    """Right-continuous step function F(x) = #{x_i <= x} / n."""

    def __init__(self, values):
        v = np.sort(np.asarray(values, dtype=float).ravel())
        if v.size == 0:
            raise UsageError("empirical CDF of an empty sample")
        self.values = v
        self.n = v.size

    def __call__(self, x):
        out = np.searchsorted(self.values, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    @property
    def grid(self) -> np.ndarray:
        return np.unique(self.values)


def ecdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)


@dataclass(frozen=True)
class ConfidenceBand:
    x: np.ndarray
    F: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    def contains(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return (self.lower <= values) & (values <= self.upper)


def normal_quantile(alpha: float) -> float:
    """Two-sided critical value z_{1 - alpha/2}."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(norm.ppf(1.0 - alpha / 2.0))


def greenwood_band(cdf: EmpiricalCdf, alpha: float, grid=None) -> ConfidenceBand:
    """Pointwise band F +- z sqrt(F (1-F) / n), clipped to [0, 1].

    With no censoring Greenwood's variance reduces to the binomial one. The
    band is evaluated on the distinct sample values unless ``grid`` is given.
    """
    z = normal_quantile(alpha)
    if cdf.n < 2:
        raise UsageError("a confidence band needs at least two samples")
    x = cdf.grid if grid is None else np.asarray(grid, dtype=float)
    F = np.asarray(cdf(x), dtype=float)
    half = z * np.sqrt(F * (1.0 - F) / cdf.n)
    return ConfidenceBand(x, F, np.clip(F - half, 0.0, 1.0), np.clip(F + half, 0.0, 1.0), float(alpha))


def mode_estimate(samples, bins: int = 50, window: int = 5) -> float:
    """Center of the highest bin of a moving-average-smoothed histogram.

    The histogram spans [min, max]. The average is centered with odd width
    ``window`` and truncated at the edges. Ties go to the smaller center.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise UsageError("mode of an empty sample")
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return lo
    if bins < 10:
        raise UsageError(f"need at least 10 bins, got {bins}")
    if window < 1 or window % 2 == 0:
        raise UsageError(f"smoothing window must be a positive odd number, got {window}")
    if x.size < 50:
        raise UsageError(f"mode estimation needs at least 50 samples, got {x.size}")
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    kernel = np.ones(window)
    sums = np.convolve(counts, kernel, mode="same")
    widths = np.convolve(np.ones(bins), kernel, mode="same")
    smooth = sums / widths
    k = int(np.argmax(smooth))  # first maximum, i.e. the smaller center
    return float(0.5 * (edges[k] + edges[k + 1]))


def infimum_estimate(samples, a: float) -> float:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise UsageError("infimum of an empty sample")
    return min(abs(2 * a - 1), float(x.min()))


@dataclass(frozen=True)
class ProfileRow:
    a: float
    inf: float
    mode: float
    mean: float
    ci_lo: float
    ci_hi: float

    @classmethod
    def empty(cls, a: float) -> "ProfileRow":
        nan = math.nan
        return cls(a, nan, nan, nan, nan, nan)


def _check_unital_range(eta: np.ndarray, a: float) -> None:
    lo = abs(2 * a - 1) - ETA_SLACK
    if not np.all((eta >= lo) & (eta <= 1 + ETA_SLACK)):
        bad = eta[(eta < lo) | (eta > 1 + ETA_SLACK)]
        raise AssertionError(f"contraction coefficient {bad[0]!r} outside [{lo}, 1] at a={a}")


def eta_profile(
    kind: SpaceKind,
    grid: int = 100,
    n_per_point: int = 1000,
    alpha: float = 5e-5,
    seed: int = 0,
    workers: int | None = None,
) -> list[ProfileRow]:
    """Contraction-coefficient statistics along a = i/grid over unital fibers.

    Grid point i draws from substream i, so rows do not depend on the worker
    count. The endpoints have degenerate fibers and come back as NaN rows.
    The mean's interval is the normal one with the same critical value as
    the CDF bands.
    """
    kind = SpaceKind(kind)
    if not kind.is_unital:
        raise UsageError("the profile experiment runs over unital fibers")
    if grid < 2:
        raise UsageError(f"grid must be at least 2, got {grid}")
    z = normal_quantile(alpha)
    stream = as_stream(seed)

    def row(i: int) -> ProfileRow:
        a = i / grid
        if i == 0 or i == grid:
            return ProfileRow.empty(a)
        batch = sample_fiber(kind, a, rng=stream.substream(i), size=n_per_point, workers=1)
        eta = eta_batch(batch)
        _check_unital_range(eta, a)
        mean = float(eta.mean())
        half = z * float(eta.std(ddof=1)) / math.sqrt(eta.size) if eta.size > 1 else 0.0
        return ProfileRow(a, infimum_estimate(eta, a), mode_estimate(eta), mean, mean - half, mean + half)

    return map_blocks(row, grid + 1, workers)


def eta_cdf_experiment(
    kind: SpaceKind,
    n: int = 10_000,
    alpha: float = 5e-5,
    seed: int = 0,
    gmode: GlobalMode = GlobalMode.DENSITY_AF,
    smode: SamplerMode = SamplerMode.LAYERED_EXACT,
    workers: int | None = None,
) -> tuple[EmpiricalCdf, ConfidenceBand]:
    if n < 100:
        raise UsageError(f"the CDF experiment needs n >= 100, got {n}")
    batch = sample_global(kind, gmode, smode, rng=seed, size=n, workers=workers)
    eta = eta_batch(batch)
    lo = np.abs(batch.a - batch.f) - ETA_SLACK
    if not np.all((eta >= lo) & (eta <= 1 + ETA_SLACK)):
        raise AssertionError("contraction coefficient outside [|a-f|, 1]")
    cdf = ecdf(eta)
    return cdf, greenwood_band(cdf, alpha)
