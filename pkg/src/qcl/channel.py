"""Qubit channels in Choi form.

A qubit channel is stored through its free parameters ``(a, f, b, c, d, e, g)``
laid out in the 4x4 Choi matrix

    [[a,        b,   c,   d  ],
     [conj(b), 1-a,  e,  -c  ],
     [conj(c), conj(e), f, g ],
     [conj(d), -conj(c), conj(g), 1-f]]

Unital channels additionally have ``f = 1 - a`` and ``g = -b``. The 2x2 blocks
act on an input ``[[r00, r01], [r10, r11]]`` as
``r00*Q11 + r01*Q12 + r10*Q21 + r11*Q22``.

Real kinds keep float64 storage and complex kinds complex128, so a real channel
never picks up spurious imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DomainError, ShapeError

PSD_TOL = 1e-10


class SpaceKind(str, Enum):
    GENERAL_REAL = "general-real"
    GENERAL_COMPLEX = "general-complex"
    UNITAL_REAL = "unital-real"
    UNITAL_COMPLEX = "unital-complex"

    @property
    def is_complex(self) -> bool:
        return self in (SpaceKind.GENERAL_COMPLEX, SpaceKind.UNITAL_COMPLEX)

    @property
    def is_unital(self) -> bool:
        return self in (SpaceKind.UNITAL_REAL, SpaceKind.UNITAL_COMPLEX)

    @property
    def dtype(self) -> type:
        return np.complex128 if self.is_complex else np.float64

    def __str__(self) -> str:
        return self.value


PARAM_NAMES = ("a", "f", "b", "c", "d", "e", "g")
FREE_SCALARS = {
    # names of the free off-diagonal scalars per kind
    SpaceKind.GENERAL_REAL: ("b", "c", "d", "e", "g"),
    SpaceKind.GENERAL_COMPLEX: ("b", "c", "d", "e", "g"),
    SpaceKind.UNITAL_REAL: ("b", "c", "d", "e"),
    SpaceKind.UNITAL_COMPLEX: ("b", "c", "d", "e"),
}

# A = U* Q U is a symmetric permutation: A[i, j] = Q[perm[i], perm[j]].
_GENERAL_PERM = np.array([0, 2, 1, 3])
_UNITAL_PERM = np.array([1, 2, 0, 3])


def _check_unit_interval(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


def _as_scalar(kind: SpaceKind, name: str, value):
    if kind.is_complex:
        return complex(value)
    z = complex(value)
    if z.imag != 0.0:
        raise DomainError(f"{name} must be real for {kind}, got {value!r}")
    return float(z.real)


@dataclass(frozen=True)
class ChannelParams:
    """Free parameters of one qubit channel.

    For unital kinds ``f`` and ``g`` may be omitted; they are filled in as
    ``1 - a`` and ``-b``. Supplying inconsistent values raises ShapeError.
    """

    kind: SpaceKind
    a: float
    f: float | None = None
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 0.0
    e: complex = 0.0
    g: complex | None = None

    def __post_init__(self):
        kind = SpaceKind(self.kind)
        object.__setattr__(self, "kind", kind)
        a = float(self.a)
        _check_unit_interval("a", a)
        object.__setattr__(self, "a", a)
        for name in ("b", "c", "d", "e"):
            object.__setattr__(self, name, _as_scalar(kind, name, getattr(self, name)))
        if kind.is_unital:
            f, g = 1.0 - a, -self.b
            if self.f is not None and float(self.f) != f:
                raise ShapeError(f"unital channel needs f = 1 - a, got f={self.f!r}")
            if self.g is not None and _as_scalar(kind, "g", self.g) != g:
                raise ShapeError(f"unital channel needs g = -b, got g={self.g!r}")
        else:
            if self.f is None:
                raise ShapeError(f"{kind} channel needs f")
            f = float(self.f)
            _check_unit_interval("f", f)
            g = _as_scalar(kind, "g", 0.0 if self.g is None else self.g)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "g", g)

    def choi(self) -> np.ndarray:
        return params_to_choi(self)

    def is_valid(self, tol: float = PSD_TOL) -> bool:
        """True when the induced Choi matrix is positive semidefinite."""
        return bool(is_psd(reorder_to_A(self.choi(), self.kind), tol))

    def values(self) -> tuple:
        return tuple(getattr(self, n) for n in PARAM_NAMES)


@dataclass(frozen=True)
class ChannelBatch:
    """Column-wise storage of many channels of one kind (arrays of shape (n,))."""

    kind: SpaceKind
    a: np.ndarray
    f: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    g: np.ndarray

    @classmethod
    def from_arrays(cls, kind, a, f=None, b=0.0, c=0.0, d=0.0, e=0.0, g=None) -> "ChannelBatch":
        kind = SpaceKind(kind)
        a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        n = a.shape[0]
        _check_unit_interval("a", a)

        def scal(x):
            arr = np.broadcast_to(np.asarray(x), (n,))
            if not kind.is_complex:
                if np.iscomplexobj(arr):
                    if np.any(arr.imag != 0):
                        raise DomainError(f"{kind} parameters must be real")
                    arr = arr.real
                return np.array(arr, dtype=np.float64)
            return np.array(arr, dtype=np.complex128)

        b, c, d, e = scal(b), scal(c), scal(d), scal(e)
        if kind.is_unital:
            f_arr, g_arr = 1.0 - a, -b
        else:
            if f is None:
                raise ShapeError(f"{kind} channel needs f")
            f_arr = np.array(np.broadcast_to(np.asarray(f, dtype=np.float64), (n,)))
            _check_unit_interval("f", f_arr)
            g_arr = scal(0.0 if g is None else g)
        return cls(kind, a, f_arr, b, c, d, e, g_arr)

    @classmethod
    def concat(cls, batches) -> "ChannelBatch":
        batches = list(batches)
        kind = batches[0].kind
        cols = {n: np.concatenate([getattr(bt, n) for bt in batches]) for n in PARAM_NAMES}
        return cls(kind, **cols)

    def __len__(self) -> int:
        return self.a.shape[0]

    def __getitem__(self, i) -> "ChannelParams | ChannelBatch":
        if isinstance(i, (int, np.integer)):
            vals = {n: getattr(self, n)[i] for n in PARAM_NAMES}
            return ChannelParams(self.kind, **vals)
        return ChannelBatch(self.kind, *(getattr(self, n)[i] for n in PARAM_NAMES))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def choi(self) -> np.ndarray:
        return _choi_arrays(self.kind, *(getattr(self, n) for n in PARAM_NAMES))

    def a_form(self) -> np.ndarray:
        return reorder_to_A(self.choi(), self.kind)

    def transfer_matrix(self) -> np.ndarray:
        return transfer_matrix(self.a, self.f, self.b, self.c, self.d, self.e, self.g)


def _choi_arrays(kind, a, f, b, c, d, e, g) -> np.ndarray:
    a = np.asarray(a)
    Q = np.zeros(a.shape + (4, 4), dtype=kind.dtype)
    Q[..., 0, 0] = a
    Q[..., 1, 1] = 1.0 - a
    Q[..., 2, 2] = f
    Q[..., 3, 3] = a if kind.is_unital else 1.0 - f  # 1 - (1 - a) != a in floating point
    upper = {(0, 1): b, (0, 2): c, (0, 3): d, (1, 2): e, (1, 3): -c, (2, 3): g}
    for (i, j), v in upper.items():
        Q[..., i, j] = v
        Q[..., j, i] = np.conj(v)
    return Q


def params_to_choi(p: ChannelParams) -> np.ndarray:
    """Lay out the Choi matrix of ``p``. Positivity is not checked."""
    return _choi_arrays(p.kind, *p.values())


def choi_to_params(Q: np.ndarray, kind: SpaceKind, atol: float = 1e-12) -> ChannelParams:
    """Read the free parameters back out of a Choi matrix of the given kind.

    Raises ShapeError when ``Q`` is not self-adjoint or violates the trace
    structure of ``kind`` by more than ``atol``.
    """
    kind = SpaceKind(kind)
    Q = np.asarray(Q)
    if Q.shape != (4, 4):
        raise ShapeError(f"expected a 4x4 matrix, got shape {Q.shape}")
    if not kind.is_complex and np.iscomplexobj(Q) and np.any(np.abs(Q.imag) > atol):
        raise ShapeError(f"{kind} Choi matrix has imaginary entries")
    if np.max(np.abs(Q - Q.conj().T)) > atol:
        raise ShapeError("Choi matrix is not self-adjoint")
    diag = np.real(np.diag(Q))
    a, f = float(diag[0]), float(diag[2])
    if abs(diag[1] - (1.0 - a)) > atol or abs(diag[3] - (1.0 - f)) > atol:
        raise ShapeError("diagonal blocks must have unit trace")
    if abs(Q[1, 3] + Q[0, 2]) > atol:
        raise ShapeError("off-diagonal block must be traceless")
    b, c, d, e, g = Q[0, 1], Q[0, 2], Q[0, 3], Q[1, 2], Q[2, 3]
    if kind.is_unital:
        if abs(f - (1.0 - a)) > atol or abs(g + b) > atol:
            raise ShapeError("unital channel needs Q11 + Q22 = I")
        return ChannelParams(kind, a, b=b, c=c, d=d, e=e)
    if not kind.is_complex:
        b, c, d, e, g = (np.real(x) for x in (b, c, d, e, g))
    return ChannelParams(kind, a, f, b, c, d, e, g)


def _perm(kind: SpaceKind) -> np.ndarray:
    return _UNITAL_PERM if SpaceKind(kind).is_unital else _GENERAL_PERM


def reorder_to_A(Q: np.ndarray, kind: SpaceKind) -> np.ndarray:
    """Return ``U* Q U`` for the kind's permutation unitary (works on stacks)."""
    p = _perm(kind)
    return np.asarray(Q)[..., p, :][..., :, p]


def reorder_from_A(A: np.ndarray, kind: SpaceKind) -> np.ndarray:
    inv = np.argsort(_perm(kind))
    return np.asarray(A)[..., inv, :][..., :, inv]


def leading_minors(M: np.ndarray) -> np.ndarray:
    """Leading principal minors of a (stack of) self-adjoint matrices, shape (..., n)."""
    M = np.asarray(M)
    n = M.shape[-1]
    return np.stack([np.real(np.linalg.det(M[..., :k, :k])) for k in range(1, n + 1)], axis=-1)


def _scale(M: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.max(np.abs(M), axis=(-2, -1)))


def is_psd(M: np.ndarray, tol: float = PSD_TOL):
    """Positive semidefiniteness through leading principal minors.

    All minors above ``tol * scale`` certify definiteness and any minor below
    ``-tol * scale`` refutes it, with ``scale = max(1, max|entry|)**n``.
    Matrices with a minor inside the band are degenerate for this test (for
    example a zero pivot followed by a negative one) and are settled by their
    smallest eigenvalue instead. Accepts a single matrix or a stack.
    """
    M = np.asarray(M)
    n = M.shape[-1]
    minors = leading_minors(M)
    thr = tol * _scale(M) ** n
    definite = np.all(minors > thr[..., None], axis=-1)
    refuted = np.any(minors < -thr[..., None], axis=-1)
    result = np.array(definite)
    unsure = ~definite & ~refuted
    if np.any(unsure):
        sub = M[unsure] if M.ndim > 2 else M
        lam = np.linalg.eigvalsh(sub)[..., 0]
        ok = lam >= -tol * _scale(sub)
        if M.ndim > 2:
            result[unsure] = ok
        else:
            result = ok
    return bool(result) if M.ndim == 2 else result


def is_pd(M: np.ndarray, tol: float = PSD_TOL):
    """Strict variant: every leading principal minor exceeds ``tol * scale``."""
    M = np.asarray(M)
    thr = tol * _scale(M) ** M.shape[-1]
    out = np.all(leading_minors(M) > thr[..., None], axis=-1)
    return bool(out) if M.ndim == 2 else out


def is_channel(Q: np.ndarray, kind: SpaceKind, tol: float = PSD_TOL, atol: float = 1e-12) -> bool:
    """Structure check plus positivity of the reordered form."""
    try:
        choi_to_params(Q, kind, atol=atol)
    except ShapeError:
        return False
    return bool(is_psd(reorder_to_A(Q, kind), tol))


def apply_channel(Q: np.ndarray, rho: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q)
    rho = np.asarray(rho)
    return (
        rho[..., 0, 0, None, None] * Q[..., :2, :2]
        + rho[..., 0, 1, None, None] * Q[..., :2, 2:]
        + rho[..., 1, 0, None, None] * Q[..., 2:, :2]
        + rho[..., 1, 1, None, None] * Q[..., 2:, 2:]
    )


@dataclass(frozen=True)
class ClassicalChannel:
    a: float
    f: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, 1.0 - self.a], [self.f, 1.0 - self.f]])


def underlying_classical(Q: np.ndarray) -> ClassicalChannel:
    """Restriction of the channel to diagonal inputs."""
    Q = np.asarray(Q)
    return ClassicalChannel(float(np.real(Q[0, 0])), float(np.real(Q[2, 2])))


class PauliAffineMap(NamedTuple):
    """Bloch-ball action x -> v + T x."""

    v: np.ndarray
    T: np.ndarray


PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)


def bloch_coords(M: np.ndarray) -> np.ndarray:
    """Coefficients r with M = t*I + r.sigma for self-adjoint 2x2 M."""
    M = np.asarray(M)
    return np.stack(
        [np.real(M[..., 0, 1]), -np.imag(M[..., 0, 1]), np.real(M[..., 0, 0] - M[..., 1, 1]) / 2],
        axis=-1,
    )


def transfer_matrix(a, f, b, c, d, e, g) -> np.ndarray:
    """Closed-form Bloch matrix T from the channel parameters (vectorised)."""
    a, f, b, c, d, e, g = np.broadcast_arrays(*(np.asarray(x) for x in (a, f, b, c, d, e, g)))
    s, t, u = d + e, d - e, b - g
    T = np.empty(np.shape(a) + (3, 3))
    T[..., 0, 0] = np.real(s)
    T[..., 0, 1] = np.imag(s)
    T[..., 0, 2] = np.real(u)
    T[..., 1, 0] = -np.imag(t)
    T[..., 1, 1] = np.real(t)
    T[..., 1, 2] = -np.imag(u)
    T[..., 2, 0] = 2 * np.real(c)
    T[..., 2, 1] = 2 * np.imag(c)
    T[..., 2, 2] = np.real(a) - np.real(f)
    return T


def pauli_rep(Q: np.ndarray) -> PauliAffineMap:
    """Bloch representation; v is the Bloch vector of Q(I/2)."""
    Q = np.asarray(Q)
    a, f = np.real(Q[0, 0]), np.real(Q[2, 2])
    b, c, d, e, g = Q[0, 1], Q[0, 2], Q[0, 3], Q[1, 2], Q[2, 3]
    v = np.array([np.real(b + g), -np.imag(b + g), a + f - 1.0])
    return PauliAffineMap(v, transfer_matrix(a, f, b, c, d, e, g))


def pauli_rep_numeric(Q: np.ndarray) -> PauliAffineMap:
    """Same map, extracted from the channel's action on I and the Pauli matrices."""
    Q = np.asarray(Q, dtype=np.complex128)
    v = bloch_coords(apply_channel(Q, np.eye(2) / 2)) * 2
    T = np.stack([bloch_coords(apply_channel(Q, s)) for s in PAULI], axis=-1)
    return PauliAffineMap(v, T)
