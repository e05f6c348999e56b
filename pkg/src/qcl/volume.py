"""Exact volumes of the qubit channel spaces and their fibers over classical channels.

Volumes are Lebesgue volumes in the Euclidean metric of the matrix-entry space,
i.e. the parameter-space measure times the kind's embedding factor.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .channel import SpaceKind
from .errors import DomainError, UsageError

PI = math.pi


def gamma(x: float) -> float:
    """Gamma function, exact-recursion for integer and half-integer arguments."""
    twice = 2 * x
    if twice == int(twice) and x > 0:
        k = int(twice)
        if k % 2 == 0:
            return float(math.factorial(k // 2 - 1))
        # Gamma(n + 1/2) = (2n-1)!! / 2^n * sqrt(pi)
        n = (k - 1) // 2
        dfact = math.prod(range(2 * n - 1, 0, -2)) if n > 0 else 1
        return dfact / 2**n * math.sqrt(PI)
    return math.gamma(x)


def sphere_surface(n: int) -> float:
    """Surface F_{n-1} of the unit sphere in R^n."""
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    return n * PI ** (n / 2) / gamma(n / 2 + 1)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return radius**n * PI ** (n / 2) / gamma(n / 2 + 1)


def g_integral(a: float, b: float) -> float:
    """G_{a,b} = int_0^1 x^a (1 - x^2)^b dx."""
    if not (a > -1 and b > -1):
        raise DomainError(f"G_(a,b) needs a, b > -1, got a={a!r}, b={b!r}")
    return 0.5 * gamma(b + 1) * gamma((a + 1) / 2) / gamma(a / 2 + b + 1.5)


_TOTALS = {
    SpaceKind.GENERAL_REAL: (4 * PI**3 / 105, "4*pi^3/105"),
    SpaceKind.GENERAL_COMPLEX: (2 * PI**5 / 4725, "2*pi^5/4725"),
    SpaceKind.UNITAL_REAL: (4 * PI**2 / 15, "4*pi^2/15"),
    SpaceKind.UNITAL_COMPLEX: (2 * PI**4 / 315, "2*pi^4/315"),
}

# The standard unital-complex closed form integrates over a reordered matrix whose
# third column carries b, c instead of conj(b), conj(c). That is not a unitary
# reordering of the unital Choi matrix, and the body it describes is 3/4 the
# size of the actual channel set. Multiply by this factor to get the volume of
# the Choi body itself. All other kinds are unaffected.
UNITAL_COMPLEX_CHOI_FACTOR = Fraction(4, 3)


def total_volume(kind: SpaceKind) -> float:
    """Published closed-form volume of the whole channel space."""
    return _TOTALS[SpaceKind(kind)][0]


def total_volume_formula(kind: SpaceKind) -> str:
    return _TOTALS[SpaceKind(kind)][1]


def _choi_factor(kind: SpaceKind) -> float:
    return float(UNITAL_COMPLEX_CHOI_FACTOR) if SpaceKind(kind) is SpaceKind.UNITAL_COMPLEX else 1.0


def choi_total_volume(kind: SpaceKind) -> float:
    """Volume of the set of Choi matrices of the given kind (8*pi^4/945 for unital-complex)."""
    return total_volume(kind) * _choi_factor(kind)


def _check_fiber_args(kind: SpaceKind, a, f):
    kind = SpaceKind(kind)
    if kind.is_unital and f is not None:
        raise UsageError(f"f is fixed to 1 - a for {kind}; do not pass it")
    if not kind.is_unital and f is None:
        raise UsageError(f"{kind} fibers need both a and f")
    a = np.asarray(a, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise DomainError(f"a must lie in [0, 1], got {a!r}")
    if f is not None:
        f = np.asarray(f, dtype=float)
        if np.any((f < 0) | (f > 1)):
            raise DomainError(f"f must lie in [0, 1], got {f!r}")
    return kind, a, f


def _general_real(a, f):
    lo = a + f < 1
    af, bg = a * f, (1 - a) * (1 - f)
    val = np.where(lo, af**1.5 * (5 * bg - af), bg**1.5 * (5 * af - bg))
    return 128 / 45 * PI**2 * val


def _general_complex(a, f):
    lo = a + f < 1
    af, bg = a * f, (1 - a) * (1 - f)
    common = 10 * (bg - af) ** 2 + 15 * af * bg
    val = np.where(lo, af**3 * (common - 9 * af**2), bg**3 * (common - 9 * bg**2))
    return 16 / 45 * PI**5 * val


def fiber_volume(kind: SpaceKind, a, f=None):
    """Published volume density over the classical channel (a, f).

    For unital kinds the classical channel is determined by ``a`` alone and
    ``f`` must not be given. Works elementwise on arrays.
    """
    kind, a, f = _check_fiber_args(kind, a, f)
    if kind is SpaceKind.GENERAL_REAL:
        out = _general_real(a, f)
    elif kind is SpaceKind.GENERAL_COMPLEX:
        out = _general_complex(a, f)
    elif kind is SpaceKind.UNITAL_REAL:
        out = 8 * PI**2 * a**2 * (1 - a) ** 2
    else:
        out = 4 * PI**4 * a**4 * (1 - a) ** 4
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def choi_fiber_volume(kind: SpaceKind, a, f=None):
    """Fiber volume of the Choi body (differs from fiber_volume only for unital-complex)."""
    return fiber_volume(kind, a, f) * _choi_factor(kind)


def fiber_positive(kind: SpaceKind, a, f=None) -> bool:
    """Whether the fiber over (a, f) has positive volume."""
    kind, a, f = _check_fiber_args(kind, a, f)
    ok = (a > 0) & (a < 1)
    if f is not None:
        ok = ok & (f > 0) & (f < 1)
    return bool(np.all(ok))
