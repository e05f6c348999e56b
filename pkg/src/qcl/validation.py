"""Two-sample Kolmogorov-Smirnov comparisons between fiber samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from .channel import FREE_SCALARS, ChannelBatch, SpaceKind
from .contraction import eta_batch
from .montecarlo import oracle_sample_fiber
from .sampler import sample_fiber, sample_fiber_literal


@dataclass(frozen=True)
class KsResult:
    name: str
    statistic: float
    pvalue: float


def marginals(batch: ChannelBatch) -> dict[str, np.ndarray]:
    """Every free real coordinate of the batch plus the contraction coefficient."""
    out = {}
    for s in FREE_SCALARS[batch.kind]:
        v = getattr(batch, s)
        if batch.kind.is_complex:
            out[s + ".re"] = np.real(v)
            out[s + ".im"] = np.imag(v)
        else:
            out[s] = np.asarray(v, dtype=float)
    out["eta"] = eta_batch(batch)
    return out


def compare(x: ChannelBatch, y: ChannelBatch) -> list[KsResult]:
    mx, my = marginals(x), marginals(y)
    return [KsResult(k, *map(float, ks_2samp(mx[k], my[k]))) for k in mx]


def compare_with_oracle(
    kind: SpaceKind,
    a: float,
    f: float | None = None,
    n: int = 10_000,
    seed: int = 0,
    literal: bool = False,
    workers: int | None = None,
    radius: str = "nominal",
) -> list[KsResult]:
    """KS tests of a fast sampler against rejection from the fiber box.

    The two sides use independent streams derived from ``seed``. ``radius``
    selects the step-3 disk of the seven-step scheme when ``literal`` is set.
    """
    kind = SpaceKind(kind)
    if literal:
        fast = sample_fiber_literal(a, f, rng=seed, size=n, workers=workers, radius=radius)
    else:
        fast = sample_fiber(kind, a, f, rng=seed, size=n, workers=workers)
    ref = oracle_sample_fiber(kind, a, f, rng=(int(seed) + 1) * 7919, size=n, workers=workers)
    return compare(fast, ref)


def format_report(results: list[KsResult], title: str = "") -> str:
    lines = [title] if title else []
    lines.append(f"{'marginal':<10} {'D':>10} {'p-value':>12}")
    for r in results:
        lines.append(f"{r.name:<10} {r.statistic:>10.5f} {r.pvalue:>12.4g}")
    return "\n".join(lines)
