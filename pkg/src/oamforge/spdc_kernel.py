"""SPDC expansion amplitudes in the p = 0 Laguerre-Gaussian basis.

All lengths are micrometers and all wave numbers inverse micrometers.

The amplitude of the biphoton mode ``|l_s> (x) |l_i>`` generated by an
``LG_0^{l_p}`` pump factorizes into a waist-only prefactor and a z-integral of
a rational kernel,

    C = pi^2 * T0(l_p, w_p) * conj(T0(l_s, w_s)) * conj(T0(l_i, w_i))
        * integral_{-L/2}^{L/2} G(z) dz,

with ``T0 = t_coeff(0, 0, ., .)`` and ``G`` from :func:`kernel_g`. The factor
``pi^2`` makes ``C`` equal to the raw overlap integral evaluated by
:func:`oracle_amplitude`, so the two routes agree in absolute terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from .lg_basis import lg_polar, log_t0, phase_unit
from .oam_state import OamAmplitudeTable

__all__ = [
    "AmplitudeRequest",
    "CrystalConfig",
    "DiagonalReport",
    "KernelPoint",
    "OracleGrid",
    "QuadratureError",
    "QuadratureSettings",
    "TruncationError",
    "WaistConfig",
    "amplitude",
    "anti_diagonal",
    "diagonal_report",
    "kernel_g",
    "kernel_point",
    "ktp_index",
    "oracle_amplitude",
    "prefactor_t",
    "wave_number",
]

DEFAULT_HALF_WIDTH = 12
TAIL_TOLERANCE = 1e-4
WIDEN_STEP = 4
MAX_HALF_WIDTH = 400


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its requested tolerance."""


class TruncationError(QuadratureError):
    """Raised when an OAM window cannot be widened enough to bound the tail."""


# KTP Sellmeier coefficients (lambda in um): A, B, C, D in n^2 = A + B/(l^2 - C) - D l^2.
_KTP_SELLMEIER = {
    "y": (3.0065, 0.03901, 0.04251, 0.01327),
    "z": (3.3134, 0.05694, 0.05658, 0.01682),
}


def ktp_index(wavelength_um: float, axis: str = "y") -> float:
    """Refractive index of KTP along ``axis`` ('y' or 'z')."""
    a, b, c, d = _KTP_SELLMEIER[axis]
    l2 = wavelength_um ** 2
    return math.sqrt(a + b / (l2 - c) - d * l2)


def wave_number(wavelength_um: float, index: float) -> float:
    return 2 * math.pi * index / wavelength_um


@dataclass(frozen=True)
class CrystalConfig:
    """Nonlinear crystal with quasi-phase-matched (periodic) poling.

    The poled nonlinearity reduces to a constant that only affects the global
    normalization, so no poling period is modeled.
    """

    length_um: float
    k_pump: float
    k_signal: float
    k_idler: float
    poling: bool = True

    def __post_init__(self):
        for name in ("length_um", "k_pump", "k_signal", "k_idler"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not self.poling:
            raise ValueError("only periodically poled (quasi-phase-matched) crystals are supported")
        if not math.isclose(self.k_signal, self.k_idler, rel_tol=1e-12):
            raise ValueError("the closed-form kernel requires degenerate photons (k_signal == k_idler)")

    @classmethod
    def from_wavelengths(cls, length_um: float, pump_wavelength_um: float,
                         signal_wavelength_um: float, axis: str = "y") -> "CrystalConfig":
        kp = wave_number(pump_wavelength_um, ktp_index(pump_wavelength_um, axis))
        ks = wave_number(signal_wavelength_um, ktp_index(signal_wavelength_um, axis))
        return cls(length_um, kp, ks, ks)

    @classmethod
    def default(cls) -> "CrystalConfig":
        """10 mm ppKTP, 405 nm pump, degenerate 810 nm pairs."""
        return cls.from_wavelengths(10_000.0, 0.405, 0.810)


@dataclass(frozen=True)
class WaistConfig:
    w_pump: float
    w_signal: float
    w_idler: float

    def __post_init__(self):
        for name in ("w_pump", "w_signal", "w_idler"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.w_signal != self.w_idler:
            raise ValueError("the closed-form kernel requires w_signal == w_idler")

    @classmethod
    def symmetric(cls, w_pump: float, w_collection: float) -> "WaistConfig":
        return cls(float(w_pump), float(w_collection), float(w_collection))


@dataclass(frozen=True)
class QuadratureSettings:
    """Gauss-Legendre z-quadrature, doubled from ``initial_nodes`` until converged."""

    initial_nodes: int = 64
    rtol: float = 1e-8
    max_nodes: int = 1 << 16

    def __post_init__(self):
        if self.initial_nodes < 2 or self.max_nodes < self.initial_nodes:
            raise ValueError("invalid node counts")
        if not 0 < self.rtol < 1:
            raise ValueError("rtol must lie in (0, 1)")


@dataclass(frozen=True)
class KernelPoint:
    B: complex
    D: complex

    def __post_init__(self):
        if not self.B.real > 0 or not (self.B - self.D).real > 0:
            raise ValueError("kernel point outside the convergent region (Re B > 0, Re(B-D) > 0)")


@dataclass(frozen=True)
class AmplitudeRequest:
    ell_pump: int
    ell_signal: int
    ell_idler: int

    @property
    def conserving(self) -> bool:
        return self.ell_pump == self.ell_signal + self.ell_idler


def _b_d(z, crystal: CrystalConfig, waists: WaistConfig):
    z = np.asarray(z, dtype=float)
    kp, ks = crystal.k_pump, crystal.k_signal
    d = -waists.w_pump ** 2 / 4 - 1j * z / (2 * kp)
    b = waists.w_pump ** 2 / 4 + waists.w_signal ** 2 / 4 - 1j * z * (kp - ks) / (2 * kp * ks)
    return b, d


def kernel_point(z: float, crystal: CrystalConfig, waists: WaistConfig) -> KernelPoint:
    b, d = _b_d(z, crystal, waists)
    return KernelPoint(complex(b), complex(d))


def _log_kernel(ell_signal: int, ell_idler: int, b, d):
    """Complex log of G; exponentiating reproduces the closed form without overflow."""
    if ell_signal >= 0 and ell_idler >= 0:
        big, small = ell_signal + ell_idler, 0
    else:
        big, small = max(abs(ell_signal), abs(ell_idler)), min(abs(ell_signal), abs(ell_idler))
    out = math.lgamma(big + 1) - (big + 1) * np.log(b - d) - (small + 1) * np.log(b + d)
    if small:
        out = out + small * np.log(d)
    return out


def kernel_g(ell_signal: int, ell_idler: int, z: float, crystal: CrystalConfig,
             waists: WaistConfig) -> complex:
    """z-kernel G of the expansion amplitude.

    Both indices non-negative::

        (l_s + l_i)! / ((B - D)^(l_s + l_i + 1) (B + D))

    Mixed signs, with M = max(|l_s|, |l_i|) and m = min(|l_s|, |l_i|)::

        M! D^m / ((B - D)^(M + 1) (B + D)^(m + 1))

    Both negative is the caller's job (use the conjugation mirror).
    """
    if ell_signal < 0 and ell_idler < 0:
        raise ValueError("both indices negative: evaluate the mirrored pair and conjugate")
    point = kernel_point(z, crystal, waists)
    b, d = point.B, point.D
    if ell_signal >= 0 and ell_idler >= 0:
        n = ell_signal + ell_idler
        return math.factorial(n) / ((b - d) ** (n + 1) * (b + d))
    big, small = max(abs(ell_signal), abs(ell_idler)), min(abs(ell_signal), abs(ell_idler))
    return math.factorial(big) * d ** small / ((b - d) ** (big + 1) * (b + d) ** (small + 1))


def prefactor_t(ell_pump: int, ell_signal: int, ell_idler: int, waists: WaistConfig) -> complex:
    """Waist-only prefactor T0(l_p, w_p) conj(T0(l_s, w_s)) conj(T0(l_i, w_i))."""
    log_mag = (log_t0(ell_pump, waists.w_pump) + log_t0(ell_signal, waists.w_signal)
               + log_t0(ell_idler, waists.w_idler))
    return math.exp(log_mag) * phase_unit(ell_pump - ell_signal - ell_idler)


PANEL_NODES = 64


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    """n-point rule on [-1, 1]: plain Gauss-Legendre up to 64 nodes, beyond that
    composite 64-node panels (computing very high-order nodes directly is O(n^2))."""
    if n <= PANEL_NODES:
        return roots_legendre(n)
    panels = -(-n // PANEL_NODES)
    x, w = roots_legendre(PANEL_NODES)
    edges = np.linspace(-1.0, 1.0, panels + 1)
    mid, half = (edges[1:] + edges[:-1]) / 2, (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _integrate_rows(pairs, crystal: CrystalConfig, waists: WaistConfig, n: int) -> np.ndarray:
    """z-integral of pi^2 T G for each (l_p, l_s, l_i) in ``pairs`` on n nodes.

    Entries with both photon indices <= 0 (and l_p < 0) come from the mirrored
    triple, conjugated.
    """
    x, w = _gauss_legendre(n)
    half = crystal.length_um / 2
    z = half * x
    b, d = _b_d(z, crystal, waists)
    weights = half * w
    out = np.empty(len(pairs), dtype=complex)
    for row, (lp, ls, li) in enumerate(pairs):
        mirror = ls <= 0 and li <= 0 and (ls < 0 or li < 0)
        if mirror:
            lp, ls, li = -lp, -ls, -li
        log_t = (2 * math.log(math.pi) + log_t0(lp, waists.w_pump)
                 + log_t0(ls, waists.w_signal) + log_t0(li, waists.w_idler))
        integrand = np.exp(log_t + _log_kernel(ls, li, b, d))
        # numpy reduces contiguous rows pairwise, keeping the sum order-stable
        value = np.sum(weights * integrand) * phase_unit(lp - ls - li)
        out[row] = np.conj(value) if mirror else value
    return out


def _converged_rows(pairs, crystal, waists, quad: QuadratureSettings):
    n = quad.initial_nodes
    old = _integrate_rows(pairs, crystal, waists, n)
    while True:
        n *= 2
        if n > quad.max_nodes:
            raise QuadratureError(
                f"z-quadrature did not converge to rtol={quad.rtol} within {quad.max_nodes} nodes")
        new = _integrate_rows(pairs, crystal, waists, n)
        scale = np.max(np.abs(new)) if len(new) else 0.0
        if np.max(np.abs(new - old), initial=0.0) <= quad.rtol * scale or scale == 0.0:
            return new, n
        old = new


def amplitude(req: AmplitudeRequest, crystal: CrystalConfig, waists: WaistConfig,
              quad: Optional[QuadratureSettings] = None) -> complex:
    """Un-normalized expansion amplitude C for one (l_p, l_s, l_i) triple.

    Returns exactly 0 for triples violating OAM conservation.
    """
    if not req.conserving:
        return 0j
    quad = quad or QuadratureSettings()
    values, _ = _converged_rows([(req.ell_pump, req.ell_signal, req.ell_idler)],
                                crystal, waists, quad)
    return complex(values[0])


Window = Union[int, Tuple[int, int], None]


@dataclass(frozen=True)
class DiagonalReport:
    ell_pump: int
    window: Tuple[int, int]
    tail_fraction: float
    nodes: int
    total_probability: float  # un-normalized sum of |C|^2 inside the window


def _window_bounds(ell_pump: int, half_width: int) -> Tuple[int, int]:
    return min(0, ell_pump) - half_width, max(0, ell_pump) + half_width


@lru_cache(maxsize=4096)
def _diagonal(ell_pump: int, crystal: CrystalConfig, waists: WaistConfig, lo: int, hi: int,
              adaptive: bool, quad: QuadratureSettings):
    while True:
        ells = list(range(lo, hi + 1))
        values, nodes = _converged_rows([(ell_pump, l, ell_pump - l) for l in ells],
                                        crystal, waists, quad)
        probs = np.abs(values) ** 2
        total = float(np.sum(probs))
        tail = float((probs[0] + probs[-1]) / total) if total > 0 and len(ells) > 1 else 0.0
        if not adaptive or tail < TAIL_TOLERANCE:
            break
        if hi - lo > 2 * MAX_HALF_WIDTH:
            raise TruncationError(
                f"OAM tail {tail:.3g} still above {TAIL_TOLERANCE} at window [{lo}, {hi}]")
        lo, hi = lo - WIDEN_STEP, hi + WIDEN_STEP
    entries = {(l, ell_pump - l): complex(v) for l, v in zip(ells, values)}
    report = DiagonalReport(ell_pump, (lo, hi), tail, nodes, total)
    return OamAmplitudeTable(entries), report


def _resolve(ell_pump, window: Window):
    if window is None:
        window = DEFAULT_HALF_WIDTH
    if isinstance(window, tuple):
        lo, hi = int(window[0]), int(window[1])
        if lo > hi:
            raise ValueError(f"empty window {window!r}")
        return lo, hi, False
    if int(window) < 0:
        raise ValueError("window half-width must be non-negative")
    lo, hi = _window_bounds(ell_pump, int(window))
    return lo, hi, True


def anti_diagonal(ell_pump: int, crystal: CrystalConfig, waists: WaistConfig,
                  window: Window = None, quad: Optional[QuadratureSettings] = None
                  ) -> OamAmplitudeTable:
    """All amplitudes ``(l, l_p - l)`` on the conservation line of ``ell_pump``.

    ``window`` is either a half-width ``h`` (signal index spans
    ``[min(0, l_p) - h, max(0, l_p) + h]``, widened until the two outermost
    modes carry less than 1e-4 of the window total) or an explicit
    ``(lo, hi)`` range that is used as given. The table is un-normalized.
    """
    lo, hi, adaptive = _resolve(ell_pump, window)
    return _diagonal(int(ell_pump), crystal, waists, lo, hi, adaptive, quad or QuadratureSettings())[0]


def diagonal_report(ell_pump: int, crystal: CrystalConfig, waists: WaistConfig,
                    window: Window = None, quad: Optional[QuadratureSettings] = None
                    ) -> DiagonalReport:
    lo, hi, adaptive = _resolve(ell_pump, window)
    return _diagonal(int(ell_pump), crystal, waists, lo, hi, adaptive, quad or QuadratureSettings())[1]


@dataclass(frozen=True)
class OracleGrid:
    """Brute-force grid: Gauss-Legendre radial nodes on ``[0, q_max_factor / min(w_s, w_i)]``,
    uniform azimuthal nodes for both photons, Gauss-Legendre in z."""

    n_radial: int = 36
    n_azimuthal: int = 16
    n_z: int = 48
    q_max_factor: float = 10.0
    rtol: float = 0.02
    exact_z: bool = False  # integrate z in closed form (sinc) instead of Gauss-Legendre

    def coarser(self) -> "OracleGrid":
        shrink = lambda n: max(4, (3 * n) // 4)  # noqa: E731
        return OracleGrid(shrink(self.n_radial), shrink(self.n_azimuthal), shrink(self.n_z),
                          self.q_max_factor, self.rtol, self.exact_z)


def _oracle_sum(req: AmplitudeRequest, crystal, waists, grid: OracleGrid):
    q_max = grid.q_max_factor / min(waists.w_signal, waists.w_idler)
    xr, wr = roots_legendre(grid.n_radial)
    r = (xr + 1) * q_max / 2
    wr = wr * q_max / 2
    phi = np.arange(grid.n_azimuthal) * (2 * math.pi / grid.n_azimuthal)
    rr, pp = np.meshgrid(r, phi, indexing="ij")
    rr, pp = rr.ravel(), pp.ravel()
    area = np.outer(wr * r, np.full(grid.n_azimuthal, 2 * math.pi / grid.n_azimuthal)).ravel()
    qx, qy = rr * np.cos(pp), rr * np.sin(pp)

    # signal along axis 0, idler along axis 1
    sx, sy = qx[:, None] + qx[None, :], qy[:, None] + qy[None, :]
    r_pump = np.hypot(sx, sy)
    pump = lg_polar(r_pump, np.arctan2(sy, sx), 0, req.ell_pump, waists.w_pump)
    sig = np.conj(lg_polar(rr, pp, 0, req.ell_signal, waists.w_signal)) * area
    idl = np.conj(lg_polar(rr, pp, 0, req.ell_idler, waists.w_idler)) * area
    transverse = pump * sig[:, None] * idl[None, :]
    mismatch = (rr[:, None] ** 2 / (2 * crystal.k_signal) + rr[None, :] ** 2 / (2 * crystal.k_idler)
                - r_pump ** 2 / (2 * crystal.k_pump))

    half = crystal.length_um / 2
    if grid.exact_z:
        # for thick crystals, where the z-phase oscillates too fast for the nodes
        total = np.sum(transverse * (crystal.length_um * np.sinc(mismatch * half / math.pi)))
    else:
        xz, wz = roots_legendre(grid.n_z)
        total = 0j
        for zk, wk in zip(half * xz, half * wz):
            total += wk * np.sum(transverse * np.exp(1j * zk * mismatch))
    scale = float(np.sum(np.abs(transverse))) * crystal.length_um
    return complex(total), scale


def oracle_amplitude(req: AmplitudeRequest, crystal: CrystalConfig, waists: WaistConfig,
                     grid: Optional[OracleGrid] = None, return_error: bool = False):
    """Direct quadrature of the raw pump/signal/idler overlap integral.

    Independent of the closed-form kernel: it integrates the LG modes and the
    paraxial longitudinal mismatch ``|q_s|^2/2k_s + |q_i|^2/2k_i - |q_s+q_i|^2/2k_p``
    numerically. The discretization error is estimated against a coarser grid;
    a :class:`QuadratureError` is raised when it exceeds ``grid.rtol`` relative to
    the result (absolute errors below 1e-9 of the integrand's L1 scale are accepted).
    """
    grid = grid or OracleGrid()
    fine, scale = _oracle_sum(req, crystal, waists, grid)
    coarse, _ = _oracle_sum(req, crystal, waists, grid.coarser())
    err = abs(fine - coarse)
    if err > grid.rtol * abs(fine) and err > 1e-9 * scale:
        raise QuadratureError(f"oracle error estimate {err:.3g} exceeds tolerance for {req}")
    return (fine, err) if return_error else fine
