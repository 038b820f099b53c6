"""Laguerre-Gaussian modes in transverse momentum space.

Momentum-space convention used throughout the package::

    LG_p^l(q, w) = sqrt(w^2 p! / (2 pi (p+|l|)!)) * exp(i pi (p + l/2))
                   * (|q| w / sqrt(2))^|l| * exp(-|q|^2 w^2 / 4)
                   * L_p^|l|(|q|^2 w^2 / 2) * exp(i l Arg(q))

The same modes expand as a finite power series in ``|q|`` whose coefficients
are returned by :func:`t_coeff`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LGModeSpec",
    "TransverseMomentum",
    "eval_lg",
    "lg_polar",
    "laguerre",
    "t_coeff",
    "phase_unit",
]

# exp(i pi k / 2) for k mod 4; keeps odd-l phases exact.
_QUARTER_TURNS = (1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j)


@dataclass(frozen=True)
class LGModeSpec:
    p: int
    ell: int
    waist: float  # micrometers

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"radial index must be a non-negative integer, got {self.p!r}")
        if int(self.ell) != self.ell:
            raise ValueError(f"spiral index must be an integer, got {self.ell!r}")
        if not (self.waist > 0 and math.isfinite(self.waist)):
            raise ValueError(f"waist must be positive and finite, got {self.waist!r}")


@dataclass(frozen=True)
class TransverseMomentum:
    qx: float  # 1/um
    qy: float

    def __post_init__(self):
        if not (math.isfinite(self.qx) and math.isfinite(self.qy)):
            raise ValueError("transverse momentum components must be finite")

    @classmethod
    def from_polar(cls, magnitude: float, azimuth: float) -> "TransverseMomentum":
        return cls(magnitude * math.cos(azimuth), magnitude * math.sin(azimuth))

    @property
    def magnitude(self) -> float:
        return math.hypot(self.qx, self.qy)

    @property
    def azimuth(self) -> float:
        return math.atan2(self.qy, self.qx)


def phase_unit(quarter_turns: int) -> complex:
    """Return exp(i pi k / 2) exactly for integer ``k``."""
    return _QUARTER_TURNS[quarter_turns % 4]


def laguerre(p: int, alpha: float, x):
    """Generalized Laguerre polynomial L_p^alpha(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def _log_factorial(n: int) -> float:
    return math.lgamma(n + 1)


def lg_polar(r, phi, p: int, ell: int, waist: float):
    """Vectorized LG amplitude at polar momentum coordinates ``(|q|, Arg q)``."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    a = abs(ell)
    log_norm = 0.5 * (2 * math.log(waist) + _log_factorial(p) - math.log(2 * math.pi)
                      - _log_factorial(p + a))
    x = (r * waist) ** 2 / 2
    radial = (r * waist / math.sqrt(2)) ** a * np.exp(-x / 2) * laguerre(p, a, x)
    return (math.exp(log_norm) * phase_unit(2 * p + ell)) * radial * np.exp(1j * ell * phi)


def eval_lg(q: TransverseMomentum, mode: LGModeSpec) -> complex:
    """Complex LG amplitude of ``mode`` at transverse momentum ``q``."""
    return complex(lg_polar(q.magnitude, q.azimuth, mode.p, mode.ell, mode.waist))


def t_coeff(u: int, p: int, ell: int, waist: float) -> complex:
    """Coefficient of ``|q|^(2u+|l|)`` in the power-series form of LG_p^l.

    ``LG_p^l(q, w) = exp(-|q|^2 w^2/4) exp(i l Arg q) sum_u t_coeff(u, p, l, w) |q|^(2u+|l|)``
    """
    if int(u) != u or int(p) != p or p < 0:
        raise ValueError("u and p must be non-negative integers")
    if u < 0 or u > p:
        raise ValueError(f"expansion index must satisfy 0 <= u <= p, got u={u}, p={p}")
    if not waist > 0:
        raise ValueError(f"waist must be positive, got {waist!r}")
    a = abs(ell)
    log_mag = (0.5 * (_log_factorial(p) + _log_factorial(p + a) - math.log(math.pi))
               + (2 * u + a + 1) * math.log(waist / math.sqrt(2))
               - _log_factorial(p - u) - _log_factorial(a + u) - _log_factorial(u))
    sign = -1.0 if (p + u) % 2 else 1.0
    return sign * math.exp(log_mag) * phase_unit(ell)


def log_t0(ell: int, waist: float) -> float:
    """log |t_coeff(0, 0, ell, waist)|; used where the plain value would overflow."""
    a = abs(ell)
    return (a + 1) * math.log(waist / math.sqrt(2)) - 0.5 * (math.log(math.pi) + _log_factorial(a))
