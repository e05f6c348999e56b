"""Trace-distance contraction coefficient of qubit channels.

For a qubit channel acting on Bloch vectors as x -> v + T x, the coefficient
is the largest singular value of T.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import ChannelBatch, ChannelParams, SpaceKind, params_to_choi, pauli_rep
from .errors import DomainError


def eta_from_T(T: np.ndarray):
    s = np.linalg.svd(np.asarray(T, dtype=float), compute_uv=False)[..., 0]
    return float(s) if np.ndim(s) == 0 else s


def eta_tr(Q) -> float:
    """Contraction coefficient of a single channel (Choi matrix or ChannelParams)."""
    if isinstance(Q, ChannelParams):
        Q = params_to_choi(Q)
    return eta_from_T(pauli_rep(Q).T)


def eta_batch(batch: ChannelBatch) -> np.ndarray:
    return eta_from_T(batch.transfer_matrix())


def classical_dobrushin(a: float, f: float) -> float:
    """Dobrushin coefficient of the chain with rows (a, 1-a) and (f, 1-f)."""
    for name, x in (("a", a), ("f", f)):
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return abs(a - f)


def eta_bounds(a: float, f: float) -> tuple[float, float]:
    """Range of the coefficient over channels with classical part (a, f).

    The upper end is attained in the closure of the fiber; the lower end is
    the classical coefficient, which every channel dominates.
    """
    lower = classical_dobrushin(a, f)
    upper = math.sqrt((1 - a) * f) + math.sqrt(a * (1 - f))
    return lower, upper


def extremal_params(a: float, f: float, x: float) -> ChannelParams:
    """Real channel over (a, f) with b = c = g = 0 and coefficient exactly x.

    Uses e = min(sqrt((1-a) f), x) and d = x - e, so that d + e = x with both
    entries inside their 2x2-minor bounds; the coefficient is then
    max(|d+e|, |d-e|, |a-f|) = x.
    """
    lower, upper = eta_bounds(a, f)
    if not lower < x < upper:
        raise DomainError(f"x must lie in the open interval ({lower}, {upper}), got {x!r}")
    e = min(math.sqrt((1 - a) * f), x)
    d = x - e
    return ChannelParams(SpaceKind.GENERAL_REAL, a, f, d=d, e=e)


def construct_channel_with_eta(a: float, f: float, x: float) -> np.ndarray:
    return params_to_choi(extremal_params(a, f, x))
