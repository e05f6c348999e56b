"""Uniform sampling of qubit channels with respect to the Lebesgue measure.

The reordered matrix ``A = U* Q U`` is built one column at a time. Adding
column ``x`` with diagonal entry ``delta`` to a positive definite ``A_k`` keeps
it positive definite iff ``x* A_k^{-1} x < delta``; once the last column's
free entries are the only unknowns, that set is an ellipsoid and a uniform
point in it is a uniform channel given the rest. Earlier columns are drawn with
density proportional to the volume of everything that remains, which for the
general kinds is

    c        ~ ((1-a)(1-f) - |c|^2)^k (af - |c|^2)^k    (k = 1 real, 2 complex)
    (b, e)   ~ det(A_3)^(k/2)

and for the unital kinds

    e        ~ det(A_2)^(k/2)
    (b, c)   ~ (a - q)^(k/2) (a - q')^(k/2)

where ``q`` and ``q'`` are the two quadratic forms cutting off the last column.

The seven-step scheme for real general channels is kept as a separate
mode for comparison; it draws c and (b, e) uniformly and uses a sqrt(f) disk
in its third step, so it is not uniform on the fiber.
"""

from __future__ import annotations

import functools
import logging
from enum import Enum

import numpy as np

from .channel import ChannelBatch, SpaceKind
from .errors import DomainError, IterationCapError, UsageError
from .rng import as_stream, block_sizes, map_blocks, powered_ball, to_field, unit_ball
from .volume import _check_fiber_args, choi_fiber_volume, fiber_positive

log = logging.getLogger(__name__)

BLOCK = 1024
LAYER_CAP = 10**6
ENVELOPE_GRID = 2048
ENVELOPE_SAFETY = 1.01


class SamplerMode(str, Enum):
    PAPER_LITERAL = "paper-literal"
    LAYERED_EXACT = "layered-exact"

    @classmethod
    def parse(cls, value) -> "SamplerMode":
        aliases = {"paper": cls.PAPER_LITERAL, "layered": cls.LAYERED_EXACT}
        return aliases.get(value) or cls(value)


class GlobalMode(str, Enum):
    UNIFORM_AF = "uniform-af"
    DENSITY_AF = "density-af"


def uniform_in_ball(dim: int, radius: float, rng, size: int | None = None) -> np.ndarray:
    """Uniform point(s) in the closed ball of R^dim, by rejection from the cube."""
    if not 1 <= dim <= 4:
        raise UsageError(f"dim must be in 1..4, got {dim}")
    if radius < 0:
        raise DomainError(f"radius must be nonnegative, got {radius}")
    gen = as_stream(rng).generator
    pts = unit_ball(gen, 1 if size is None else size, dim, radius)
    return pts[0] if size is None else pts


def _rejection(n: int, draw, what: str, stats: dict | None = None):
    """Run ``draw(idx) -> (values, accepted)`` on pending indices until all accept.

    ``stats[what]`` (if given) accumulates the number of candidates drawn.
    """
    todo = np.arange(n)
    out = None
    rounds = 0
    while todo.size:
        if stats is not None:
            stats[what] = stats.get(what, 0) + int(todo.size)
        vals, ok = draw(todo)
        if out is None:
            out = tuple(np.empty((n,) + v.shape[1:], dtype=v.dtype) for v in vals)
        for o, v in zip(out, vals):
            o[todo[ok]] = v[ok]
        todo = todo[~ok]
        rounds += 1
        if rounds > LAYER_CAP and todo.size:
            raise IterationCapError(f"{what}: {todo.size} draws still pending after {LAYER_CAP} rounds")
    return out


def _mv(M, v):
    return np.einsum("nij,nj->ni", M, v)


def _hermitian(blocks) -> np.ndarray:
    """Assemble a stack of self-adjoint matrices from upper-triangle columns."""
    k = len(blocks)
    n = blocks[0][0].shape[0]
    dtype = np.result_type(*[np.asarray(x) for row in blocks for x in row if x is not None])
    M = np.zeros((n, k, k), dtype=dtype)
    for i in range(k):
        for j in range(i, k):
            M[:, i, j] = blocks[i][j]
            M[:, j, i] = np.conj(blocks[i][j])
    return M


def last_column_slice(A_prev, delta, free, fixed, x_fixed):
    """Ellipsoid of admissible free entries of the next column.

    The next column ``x`` (free entries ``x[free]``, the rest equal to
    ``x_fixed``) keeps the enlarged matrix positive definite iff
    ``x* A_prev^{-1} x < delta``. Returns ``(center, L, rho2)`` such that the set
    is ``{center + sqrt(rho2) * solve(L^H, u) : |u| < 1}``.
    """
    K = np.linalg.inv(A_prev)
    Kff = K[:, free][:, :, free]
    Kfx = K[:, free][:, :, fixed]
    Kxx = K[:, fixed][:, :, fixed]
    kx = _mv(Kfx, x_fixed)
    center = -np.linalg.solve(Kff, kx[..., None])[..., 0]
    floor = np.real(np.einsum("ni,ni->n", np.conj(x_fixed), _mv(Kxx, x_fixed)))
    floor += np.real(np.einsum("ni,ni->n", np.conj(kx), center))
    rho2 = np.maximum(delta - floor, 0.0)
    return center, np.linalg.cholesky(Kff), rho2


def _point_in_slice(gen, center, L, rho2, cplx):
    n, m = center.shape
    u = to_field(unit_ball(gen, n, 2 * m if cplx else m), cplx)
    w = np.linalg.solve(np.conj(np.swapaxes(L, -1, -2)), u[..., None])[..., 0]
    return center + np.sqrt(rho2)[:, None] * w


# -- layered-exact ---------------------------------------------------------


def _general_block(kind: SpaceKind, gen, a, f, stats=None) -> ChannelBatch:
    n = a.size
    cplx = kind.is_complex
    k = 2 if cplx else 1
    p, q = (1 - a) * (1 - f), a * f
    m = np.sqrt(np.minimum(p, q))
    env = (p * q) ** k

    def draw_c(idx):
        if cplx:
            c = to_field(unit_ball(gen, idx.size, 2, m[idx]), True)[:, 0]
        else:
            c = m[idx] * gen.uniform(-1.0, 1.0, idx.size)
        r2 = np.abs(c) ** 2
        w = ((p[idx] - r2) * (q[idx] - r2)) ** k
        return (c,), gen.uniform(0.0, 1.0, idx.size) * env[idx] < w

    (c,) = _rejection(n, draw_c, "c layer", stats)

    A2 = _hermitian([[a, c], [None, f]])
    # (b, conj e) = L2 y with y in the ball of radius sqrt(1-a), weight (1-a-|y|^2)^(k/2)
    y = to_field(powered_ball(gen, n, 2 * k, np.sqrt(1 - a), k / 2), cplx)
    x2 = _mv(np.linalg.cholesky(A2), y)
    A3 = _hermitian([[a, c, x2[:, 0]], [None, f, x2[:, 1]], [None, None, 1 - a]])
    center, L, rho2 = last_column_slice(A3, 1 - f, [0, 1], [2], (-c)[:, None])
    x3 = _point_in_slice(gen, center, L, rho2, cplx)
    return ChannelBatch.from_arrays(kind, a, f, b=x2[:, 0], c=c, d=x3[:, 0], e=np.conj(x2[:, 1]), g=x3[:, 1])


def _unital_block(kind: SpaceKind, gen, a, stats=None) -> ChannelBatch:
    n = a.size
    cplx = kind.is_complex
    k = 2 if cplx else 1
    ones = np.ones(n, dtype=kind.dtype)

    def draw(idx):
        ai = a[idx]
        e = to_field(powered_ball(gen, idx.size, k, 1 - ai, k / 2), cplx)[:, 0]
        A2 = _hermitian([[(1 - ai) * ones[idx], e], [None, (1 - ai) * ones[idx]]])
        # column (conj b, conj c) = L2 z, z weighted by (a - |z|^2)^(k/2)
        z = to_field(powered_ball(gen, idx.size, 2 * k, np.sqrt(ai), k / 2), cplx)
        x2 = _mv(np.linalg.cholesky(A2), z)
        w = -np.conj(x2[:, ::-1])  # (-c, -b)
        qp = np.real(np.einsum("ni,ni->n", np.conj(w), _mv(np.linalg.inv(A2), w)))
        ratio = np.clip((ai - qp) / ai, 0.0, None) ** (k / 2)
        return (e, x2), gen.uniform(0.0, 1.0, idx.size) < ratio

    e, x2 = _rejection(n, draw, "unital layer", stats)
    A3 = _hermitian([[(1 - a) * ones, e, x2[:, 0]], [None, (1 - a) * ones, x2[:, 1]], [None, None, a * ones]])
    b, c = np.conj(x2[:, 0]), np.conj(x2[:, 1])
    center, L, rho2 = last_column_slice(A3, a, [2], [0, 1], np.stack([-c, -b], axis=1))
    d = _point_in_slice(gen, center, L, rho2, cplx)[:, 0]
    return ChannelBatch.from_arrays(kind, a, b=b, c=c, d=d, e=e)


def _layered_block(kind: SpaceKind, gen, a, f, stats=None) -> ChannelBatch:
    if kind.is_unital:
        return _unital_block(kind, gen, a, stats)
    return _general_block(kind, gen, a, f, stats)


# -- seven-step scheme (general-real) -------------------------------


def _sqrtm_psd(M):
    w, V = np.linalg.eigh(M)
    return np.einsum("nij,nj,nkj->nik", V, np.sqrt(np.clip(w, 0.0, None)), V)


def literal_step_z(a, f, c, A3):
    """Step-4 vector z = -c (1-f)^{-1/2} P sqrt(A3^{-1}) e3, P projecting on span(sqrt(A3) e3)."""
    S3 = _sqrtm_psd(A3)
    S3inv = np.linalg.inv(S3)
    v = S3[:, :, 2]
    proj = np.einsum("ni,nj->nij", v, v) / np.einsum("ni,ni->n", v, v)[:, None, None]
    z = -(c / np.sqrt(1 - f))[:, None] * _mv(proj, S3inv[:, :, 2])
    return z, S3, S3inv


def _literal_block(gen, a, f, stats: dict | None = None, radius: str = "nominal") -> ChannelBatch:
    n = a.size
    r3 = np.sqrt(f) if radius == "nominal" else np.sqrt(1 - a)

    def draw(idx):
        ai, fi = a[idx], f[idx]
        c = np.sqrt(ai * fi) * gen.uniform(-1.0, 1.0, idx.size)  # step 2
        A2 = _hermitian([[ai, c], [None, fi]])
        y2 = unit_ball(gen, idx.size, 2, r3[idx])  # step 3
        x2 = _mv(_sqrtm_psd(A2), y2)
        A3 = _hermitian([[ai, c, x2[:, 0]], [None, fi, x2[:, 1]], [None, None, 1 - ai]])
        # sqrt(A3) in step 4 needs A3 > 0; a sqrt(f) disk can overshoot when f > 1-a
        ok3 = np.linalg.det(A3) > 0
        z = np.full((idx.size, 3), np.inf)
        if np.any(ok3):
            z[ok3] = literal_step_z(ai[ok3], fi[ok3], c[ok3], A3[ok3])[0]
        ok5 = np.einsum("ni,ni->n", z, z) <= 1.0  # step 5
        if stats is not None:
            stats["step3_rejections"] = stats.get("step3_rejections", 0) + int(np.count_nonzero(~ok3))
            stats["step5_rejections"] = stats.get("step5_rejections", 0) + int(np.count_nonzero(ok3 & ~ok5))
        return (c, x2, A3, z), ok3 & ok5

    c, x2, A3, z = _rejection(n, draw, "literal steps 2-5")
    _, S3, S3inv = literal_step_z(a, f, c, A3)
    # step 6: [e1, e2] is read as an orthonormal basis of M = sqrt(A3^{-1}) span{e1, e2}
    E, _ = np.linalg.qr(S3inv[:, :, :2])
    r = np.sqrt(np.clip(1 - np.einsum("ni,ni->n", z, z), 0.0, None))
    y3 = unit_ball(gen, n, 2, r)
    x3 = np.sqrt(1 - f)[:, None] * _mv(S3, _mv(E, y3) + z)
    drift = np.max(np.abs(x3[:, 2] + c)) if n else 0.0
    if drift > 1e-9:
        log.warning("literal step 6 moved the fixed entry by %.3g", drift)
    return ChannelBatch.from_arrays(SpaceKind.GENERAL_REAL, a, f, b=x2[:, 0], c=c, d=x3[:, 0], e=x2[:, 1], g=x3[:, 1])


# -- public entry points ------------------------------------------------------


def _collect(size, run, workers):
    sizes = block_sizes(1 if size is None else int(size), BLOCK)
    out = ChannelBatch.concat(map_blocks(lambda j: run(j, sizes[j]), len(sizes), workers))
    return out[0] if size is None else out


def _fiber_arrays(kind, a, f, count):
    a_arr = np.full(count, float(a))
    f_arr = 1 - a_arr if kind.is_unital else np.full(count, float(f))
    return a_arr, f_arr


def sample_fiber(
    kind: SpaceKind, a: float, f: float | None = None, rng=0, size: int | None = None, workers=None, stats: dict | None = None
):
    """Exactly uniform channels over the classical channel (a, f).

    Returns a ChannelParams when ``size`` is None, else a ChannelBatch.
    ``stats`` collects candidate counts of the rejection layer (keys
    ``"c layer"`` or ``"unital layer"``); use it with a single worker.
    """
    kind, _, _ = _check_fiber_args(kind, a, f)
    if not fiber_positive(kind, a, f):
        raise DomainError(f"the fiber over a={a!r}, f={f!r} has zero volume")
    stream = as_stream(rng)

    def run(j, count):
        return _layered_block(kind, stream.substream(j).generator, *_fiber_arrays(kind, a, f, count), stats=stats)

    return _collect(size, run, workers)


def sample_fiber_literal(
    a: float, f: float, rng=0, size: int | None = None, workers=None, stats: dict | None = None, radius: str = "nominal"
):
    """The seven-step scheme for real general channels, steps 2-7, at fixed (a, f).

    ``radius="nominal"`` uses the sqrt(f) disk of step 3; ``"determinant"``
    uses sqrt(1-a), the radius that matches det A3 > 0. ``stats`` (if given)
    accumulates the counts of step-3 and step-5 rejections; it is only filled
    deterministically when ``workers`` is 1.
    """
    if radius not in ("nominal", "determinant"):
        raise UsageError(f"radius must be 'nominal' or 'determinant', got {radius!r}")
    kind, _, _ = _check_fiber_args(SpaceKind.GENERAL_REAL, a, f)
    if not fiber_positive(kind, a, f):
        raise DomainError(f"the fiber over a={a!r}, f={f!r} has zero volume")
    stream = as_stream(rng)

    def run(j, count):
        return _literal_block(stream.substream(j).generator, *_fiber_arrays(kind, a, f, count), stats=stats, radius=radius)

    return _collect(size, run, workers)


@functools.lru_cache(maxsize=None)
def density_envelope(kind: SpaceKind) -> float:
    """Grid maximum of the fiber volume, padded by 1%, for rejection on (a, f)."""
    kind = SpaceKind(kind)
    t = (np.arange(ENVELOPE_GRID) + 0.5) / ENVELOPE_GRID
    if kind.is_unital:
        vals = choi_fiber_volume(kind, t)
    else:
        A, F = np.meshgrid(t, t, indexing="ij")
        vals = choi_fiber_volume(kind, A, F)
    return float(np.max(vals)) * ENVELOPE_SAFETY


def _draw_af(kind: SpaceKind, gen, count: int, gmode: GlobalMode):
    dim = 1 if kind.is_unital else 2

    def open_unit(m):
        u = gen.uniform(0.0, 1.0, size=(m, dim))
        bad = (u == 0.0)
        while np.any(bad):
            u[bad] = gen.uniform(0.0, 1.0, size=int(np.count_nonzero(bad)))
            bad = u == 0.0
        return u

    if gmode is GlobalMode.UNIFORM_AF:
        u = open_unit(count)
    else:
        env = density_envelope(kind)

        def draw(idx):
            cand = open_unit(idx.size)
            fv = choi_fiber_volume(kind, cand[:, 0], None if kind.is_unital else cand[:, 1])
            return (cand,), gen.uniform(0.0, env, idx.size) < fv

        (u,) = _rejection(count, draw, "(a, f) layer")
    a = u[:, 0]
    f = 1 - a if kind.is_unital else u[:, 1]
    return a, f


def sample_global(
    kind: SpaceKind,
    gmode: GlobalMode = GlobalMode.DENSITY_AF,
    smode: SamplerMode = SamplerMode.LAYERED_EXACT,
    rng=0,
    size: int | None = None,
    workers=None,
):
    """Channels over the whole space.

    ``uniform-af`` draws (a, f) uniformly and then samples the fiber, which
    over-weights thin fibers. ``density-af`` draws (a, f) with density
    proportional to the fiber volume; combined with the layered sampler the
    result is uniform on the whole body.
    """
    kind = SpaceKind(kind)
    gmode = GlobalMode(gmode)
    smode = SamplerMode.parse(smode)
    if smode is SamplerMode.PAPER_LITERAL and kind is not SpaceKind.GENERAL_REAL:
        raise UsageError("the seven-step scheme is only defined for general-real channels")
    stream = as_stream(rng)

    def run(j, count):
        gen = stream.substream(j).generator
        a, f = _draw_af(kind, gen, count, gmode)
        if smode is SamplerMode.PAPER_LITERAL:
            return _literal_block(gen, a, f)
        return _layered_block(kind, gen, a, f)

    return _collect(size, run, workers)
