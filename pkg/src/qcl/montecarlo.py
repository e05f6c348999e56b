"""Brute-force volume estimates and an exactly uniform (slow) fiber sampler.

Everything here works by drawing parameters uniformly in an axis-aligned box
that contains the channel set and keeping the draws whose Choi matrix is
positive semidefinite. It is deliberately naive: it serves as the reference
for the closed-form volumes and for the fast samplers.

Box bounds come from the 2x2 principal minors of the reordered matrix, e.g.
``|b|^2 <= a(1-a)`` and ``|d|^2 <= a(1-f)`` for general channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import FREE_SCALARS, ChannelBatch, SpaceKind, is_psd
from .errors import DomainError, IterationCapError, UsageError
from .rng import as_stream, block_sizes, map_blocks
from .volume import fiber_positive, _check_fiber_args

MIN_SAMPLES = 10_000
VOLUME_BLOCK = 1 << 16
ORACLE_BLOCK = 1024
ORACLE_CHUNK = 8192
ORACLE_CAP = 10**7

_GLOBAL_RADII = {
    "general": {"b": 0.5, "c": 0.5, "d": 1.0, "e": 1.0, "g": 0.5},
    "unital": {"b": 0.5, "c": 0.5, "d": 1.0, "e": 1.0},
}


def embedding_factor(kind: SpaceKind) -> float:
    """Ratio of the matrix-entry volume element to the parameter-space one.

    Each real coordinate enters the Choi matrix in k entries of modulus one,
    contributing sqrt(k). General kinds: a, f, b, d, e, g appear twice and c
    four times, giving 2^4 (real) and 2^7 (complex, re/im separately). Unital
    kinds: a, b, c four times and d, e twice, again 2^4 and 2^7.
    """
    return 128.0 if SpaceKind(kind).is_complex else 16.0


@dataclass(frozen=True)
class ParamBox:
    """Axis-aligned box over the real coordinates of a channel's parameters.

    Complex scalars contribute two coordinates (``name.re``, ``name.im``), so
    a bound on the modulus becomes a square. ``fixed`` holds the classical
    parameters of a fiber box.
    """

    kind: SpaceKind
    names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    fixed: dict = field(default_factory=dict)

    @property
    def measure(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def bounds(self, name: str) -> tuple[float, float]:
        i = self.names.index(name)
        return float(self.lo[i]), float(self.hi[i])

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return gen.uniform(self.lo, self.hi, size=(n, len(self.names)))

    def to_batch(self, coords: np.ndarray) -> ChannelBatch:
        n = coords.shape[0]
        col = {name: coords[:, i] for i, name in enumerate(self.names)}
        vals = {}
        for key in ("a", "f"):
            if key in col:
                vals[key] = col[key]
            elif key in self.fixed:
                vals[key] = np.full(n, self.fixed[key])
        for s in FREE_SCALARS[self.kind]:
            if self.kind.is_complex:
                vals[s] = col[s + ".re"] + 1j * col[s + ".im"]
            else:
                vals[s] = col[s]
        return ChannelBatch.from_arrays(self.kind, **vals)

    def contains(self, batch: ChannelBatch, atol: float = 0.0) -> np.ndarray:
        """Whether each channel of ``batch`` lies inside the box."""
        ok = np.ones(len(batch), dtype=bool)
        for i, name in enumerate(self.names):
            base, _, part = name.partition(".")
            v = getattr(batch, base)
            v = np.imag(v) if part == "im" else np.real(v)
            ok &= (v >= self.lo[i] - atol) & (v <= self.hi[i] + atol)
        for key, val in self.fixed.items():
            ok &= getattr(batch, key) == val
        return ok


def _coord_names(kind: SpaceKind) -> list[str]:
    out = []
    for s in FREE_SCALARS[kind]:
        out += [s + ".re", s + ".im"] if kind.is_complex else [s]
    return out


def _box(kind: SpaceKind, radii: dict, lead: list[str], fixed: dict) -> ParamBox:
    names = list(lead) + _coord_names(kind)
    lo, hi = [0.0] * len(lead), [1.0] * len(lead)
    for name in names[len(lead):]:
        r = radii[name.partition(".")[0]]
        lo.append(-r)
        hi.append(r)
    return ParamBox(kind, tuple(names), np.array(lo), np.array(hi), dict(fixed))


def param_box(kind: SpaceKind) -> ParamBox:
    """Box containing the whole channel space of the given kind."""
    kind = SpaceKind(kind)
    if kind.is_unital:
        return _box(kind, _GLOBAL_RADII["unital"], ["a"], {})
    return _box(kind, _GLOBAL_RADII["general"], ["a", "f"], {})


def fiber_box(kind: SpaceKind, a: float, f: float | None = None) -> ParamBox:
    """Tight box containing the fiber over the classical channel (a, f)."""
    kind, _, _ = _check_fiber_args(kind, a, f)
    a = float(a)
    if kind.is_unital:
        r = math.sqrt(a * (1 - a))
        radii = {"b": r, "c": r, "d": a, "e": 1 - a}
        return _box(kind, radii, [], {"a": a})
    f = float(f)
    radii = {
        "b": math.sqrt(a * (1 - a)),
        "c": math.sqrt(min(a * f, (1 - a) * (1 - f))),
        "d": math.sqrt(a * (1 - f)),
        "e": math.sqrt(f * (1 - a)),
        "g": math.sqrt(f * (1 - f)),
    }
    return _box(kind, radii, [], {"a": a, "f": f})


@dataclass(frozen=True)
class VolumeEstimate:
    mean: float
    stderr: float
    n: int
    hits: int

    def zscore(self, target: float) -> float:
        if self.stderr == 0:
            return math.inf if self.mean != target else 0.0
        return (self.mean - target) / self.stderr


def _count_hits(box: ParamBox, n: int, seed, workers) -> int:
    stream = as_stream(seed)
    sizes = block_sizes(n, VOLUME_BLOCK)

    def run(j: int) -> int:
        gen = stream.substream(j).generator
        batch = box.to_batch(box.sample(gen, sizes[j]))
        return int(np.count_nonzero(is_psd(batch.a_form())))

    return sum(map_blocks(run, len(sizes), workers))


def _estimate(box: ParamBox, n: int, seed, workers) -> VolumeEstimate:
    if n < MIN_SAMPLES:
        raise UsageError(f"need at least {MIN_SAMPLES} samples, got {n}")
    hits = _count_hits(box, n, seed, workers)
    p = hits / n
    scale = box.measure * embedding_factor(box.kind)
    return VolumeEstimate(scale * p, scale * math.sqrt(p * (1 - p) / n), n, hits)


def estimate_total_volume(kind: SpaceKind, n: int, seed: int, workers: int | None = None) -> VolumeEstimate:
    """Hit-or-miss estimate of the volume of the whole space."""
    return _estimate(param_box(kind), int(n), seed, workers)


def estimate_fiber_volume(
    kind: SpaceKind, a: float, f: float | None = None, n: int = 10**6, seed: int = 0, workers: int | None = None
) -> VolumeEstimate:
    """Hit-or-miss estimate of the fiber volume over (a, f).

    The fiber box fixes a (and f); the scale factor is the full embedding
    factor because integrating the fiber volume over (a, f) must give the
    total volume.
    """
    return _estimate(fiber_box(kind, a, f), int(n), seed, workers)


def oracle_sample_fiber(
    kind: SpaceKind, a: float, f: float | None = None, rng=0, size: int | None = None, workers: int | None = None
):
    """Exactly uniform draws from the fiber by rejection from its box.

    Returns a ChannelParams when ``size`` is None, else a ChannelBatch.
    """
    kind = SpaceKind(kind)
    box = fiber_box(kind, a, f)
    if not fiber_positive(kind, a, f):
        raise DomainError(f"the fiber over a={a!r}, f={f!r} has zero volume")
    stream = as_stream(rng)
    sizes = block_sizes(1 if size is None else int(size), ORACLE_BLOCK)

    def run(j: int) -> ChannelBatch:
        gen = stream.substream(j).generator
        need, tries, parts = sizes[j], 0, []
        while need > 0:
            batch = box.to_batch(box.sample(gen, ORACLE_CHUNK))
            ok = np.flatnonzero(is_psd(batch.a_form()))[:need]
            tries += ORACLE_CHUNK
            if ok.size:
                parts.append(batch[ok])
                need -= ok.size
            if tries >= ORACLE_CAP * sizes[j]:
                raise IterationCapError(
                    f"oracle drew {tries} candidates for {sizes[j]} samples on the fiber "
                    f"a={a!r}, f={f!r} (box measure {box.measure:.3g}); the fiber looks degenerate"
                )
        return ChannelBatch.concat(parts)

    out = ChannelBatch.concat(map_blocks(run, len(sizes), workers))
    return out[0] if size is None else out
