"""Fourier conventions, lattice/line transfers and spectral projections.

Lattice data lives on the periodic window of ``M`` sites ``n = -M/2, ..., M/2 - 1``
with positions ``x_n = n h``; continuum data lives on a uniform grid covering the
same window ``[-L, L)`` with ``M h = 2L``.  Discrete transforms follow

    alpha_hat(theta) = sum_n alpha_n exp(-i n theta),

evaluated at ``theta_k = 2 pi k / M``, and continuum transforms on the window are
the Fourier-series coefficients ``f_hat(xi_k) ~ int f exp(-i x xi_k) dx`` at
``xi_k = pi k / L``.  With ``xi = theta / h`` both families share the integer ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import AliasingError, BandlimitError, ParameterError, SmallMeshError
from .profiles import as_profile, profile_mass

#: Largest admissible exponent in N = h**(-gamma).
GAMMA_MAX = 13.0 / 18.0

#: Relative spectral amplitude tolerated outside a declared band.
BAND_RTOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _alternating(M: int) -> np.ndarray:
    return np.where(np.arange(M) % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class LatticeField:
    """Complex field on the periodic lattice, stamped with its lattice time."""

    h: float
    values: np.ndarray
    t_lat: float = 0.0

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.ndim != 1 or vals.size == 0 or vals.size % 2:
            raise ParameterError(f"lattice needs an even positive site count, got {vals.shape}")
        if not self.h > 0:
            raise ParameterError(f"mesh size must be positive, got {self.h}")
        object.__setattr__(self, "values", vals)

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def L(self) -> float:
        return 0.5 * self.M * self.h

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.M) - self.M // 2

    @property
    def x(self) -> np.ndarray:
        return self.h * self.sites

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def replace(self, values=None, t_lat=None) -> "LatticeField":
        return LatticeField(
            self.h,
            self.values if values is None else values,
            self.t_lat if t_lat is None else t_lat,
        )


@dataclass(frozen=True)
class SpectralCoefficients:
    """``alpha_hat(theta_k)`` stored in FFT order ``k = 0..M-1``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def theta(self) -> np.ndarray:
        return fundamental_arc(self.M)


@dataclass(frozen=True)
class ContinuumField:
    """Samples ``values[j] = f(-L + j dx)`` of a function on the window ``[-L, L)``."""

    dx: float
    values: np.ndarray
    bandlimit: Optional[float] = field(default=None)

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.ndim != 1 or vals.size % 2:
            raise ParameterError("continuum grid needs an even number of samples")
        object.__setattr__(self, "values", vals)
        if self.bandlimit is not None:
            check_bandlimit(self, self.bandlimit)

    @property
    def J(self) -> int:
        return self.values.size

    @property
    def L(self) -> float:
        return 0.5 * self.J * self.dx

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.J)

    def norm(self) -> float:
        return l2_norm(self)


# ---------------------------------------------------------------------------
# lattice transforms


def arc_index(M: int) -> np.ndarray:
    """Signed integers ``k`` with ``2 pi k / M`` in ``[-pi/2, 3pi/2)``, FFT order."""
    j = np.arange(M)
    return np.where(4 * j >= 3 * M, j - M, j)


def slow_arc(M: int) -> np.ndarray:
    """Mask of the half-open arc ``[-pi/2, pi/2)``, decided in integer arithmetic."""
    return 4 * arc_index(M) < M


def fundamental_arc(M: int) -> np.ndarray:
    """Grid angles ``2 pi k / M`` folded into ``[-pi/2, 3pi/2)``, FFT order."""
    return 2.0 * np.pi * arc_index(M) / M


def forward_transform(f: LatticeField) -> SpectralCoefficients:
    # site n = j - M/2 contributes exp(i pi k) relative to numpy's j-indexed FFT
    return SpectralCoefficients(_alternating(f.M) * np.fft.fft(f.values))


def inverse_transform(c: SpectralCoefficients, h: float, t_lat: float = 0.0) -> LatticeField:
    return LatticeField(h, np.fft.ifft(_alternating(c.M) * c.values), t_lat)


def apply_symbol(f: LatticeField, symbol: np.ndarray) -> LatticeField:
    """Fourier multiplier on the lattice; ``symbol`` is indexed like :func:`fundamental_arc`."""
    return f.replace(values=np.fft.ifft(symbol * np.fft.fft(f.values)))


# ---------------------------------------------------------------------------
# continuum window transforms


def window_frequencies(J: int, L: float) -> np.ndarray:
    return np.pi * np.fft.fftfreq(J, d=1.0 / J) / L


def continuum_spectrum(f: ContinuumField) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(xi_k, f_hat(xi_k))`` in FFT order."""
    coeffs = f.dx * _alternating(f.J) * np.fft.fft(f.values)
    return window_frequencies(f.J, f.L), coeffs


def field_from_spectrum(coeffs: np.ndarray, dx: float, bandlimit: Optional[float] = None) -> ContinuumField:
    values = np.fft.ifft(_alternating(coeffs.size) * coeffs) / dx
    return ContinuumField(dx, values, bandlimit)


def _place(coeffs: np.ndarray, k: np.ndarray, J: int) -> np.ndarray:
    """Scatter coefficients indexed by signed wavenumbers ``k`` into a length-``J`` FFT array."""
    if k.size and (k.max() >= J // 2 or k.min() < -(J // 2)):
        raise BandlimitError("target grid cannot hold the requested wavenumbers")
    out = np.zeros(J, dtype=complex)
    out[np.mod(k, J)] = coeffs
    return out


def resample(f: ContinuumField, J: int) -> ContinuumField:
    """Spectral zero-padding (or truncation) onto ``J`` points of the same window."""
    if J == f.J:
        return f
    _, c = continuum_spectrum(f)
    k = np.fft.fftfreq(f.J, d=1.0 / f.J).astype(int)
    keep = (k < J // 2) & (k >= -(J // 2))
    dx = 2.0 * f.L / J
    bl = f.bandlimit if (f.bandlimit is not None and f.bandlimit < np.pi / dx) else None
    return field_from_spectrum(_place(c[keep], k[keep], J), dx, bl)


def l2_norm(f: ContinuumField) -> float:
    return float(np.sqrt(f.dx) * np.linalg.norm(f.values))


def check_bandlimit(f: ContinuumField, radius: float, rtol: float = BAND_RTOL) -> None:
    xi, c = continuum_spectrum(f)
    scale = np.max(np.abs(c)) if c.size else 0.0
    outside = np.abs(xi) > radius * (1 + 1e-12)
    if scale > 0 and np.any(outside) and np.max(np.abs(c[outside])) > rtol * scale:
        excess = np.max(np.abs(c[outside])) / scale
        raise BandlimitError(f"spectral content {excess:.3e} (relative) beyond |xi| = {radius:g}")


def sharp_cutoff(f: ContinuumField, radius: float) -> ContinuumField:
    """Sharp projection onto ``|xi| <= radius``."""
    xi, c = continuum_spectrum(f)
    c = np.where(np.abs(xi) <= radius, c, 0.0)
    return field_from_spectrum(c, f.dx, radius)


# ---------------------------------------------------------------------------
# sampling of continuum data


def site_count(L: float, h: float) -> int:
    M = int(round(2.0 * L / h))
    if M <= 0 or M % 2 or abs(M * h - 2.0 * L) > 1e-9 * max(L, 1.0):
        raise ParameterError(f"window 2L = {2 * L:g} is not an even multiple of h = {h:g}")
    return M


def cutoff_frequency(h: float, gamma: float) -> float:
    """N = h**(-gamma)."""
    return h ** (-gamma)


def small_h_threshold(total_mass: float) -> float:
    """h_0 = min(1, 1 / (100 (||psi_0||^2 + ||phi_0||^2)))."""
    if total_mass <= 0:
        return 1.0
    return min(1.0, 1.0 / (100.0 * total_mass))


def _window_coefficients(profile, xi: np.ndarray, L: float, h: float, oversample: int) -> np.ndarray:
    """Transform of a profile at the window frequencies ``xi``."""
    if hasattr(profile, "transform"):
        return profile.transform(xi)
    # generic profile: oversampled window grid before any cutoff
    J = oversample * site_count(L, h)
    dx = 2.0 * L / J
    grid = ContinuumField(dx, profile(-L + dx * np.arange(J)))
    gxi, gc = continuum_spectrum(grid)
    k = np.rint(xi * L / np.pi).astype(int)
    return gc[np.mod(k, J)]


def sample_initial_data(
    psi0,
    phi0,
    h: float,
    gamma: float,
    L: float,
    *,
    gamma_max: float = GAMMA_MAX,
    enforce_small_h: bool = True,
    oversample: int = 4,
) -> LatticeField:
    """Band-limit two continuum profiles and sample them as slow + alternating lattice data.

    Returns ``alpha_n = h [P_{<=N} psi0](nh) + (-1)^n h [P_{<=N} phi0](nh)`` with
    ``N = h**(-gamma)``.  The cutoff is applied to the exact transform when the profile
    provides one, otherwise on an ``oversample``-times finer window grid.
    """
    if not 0 < gamma <= gamma_max:
        raise ParameterError(f"gamma = {gamma} outside (0, {gamma_max:.6g}]")
    if oversample < 4:
        raise ParameterError("oversampling factor must be at least 4")
    psi0, phi0 = as_profile(psi0), as_profile(phi0)
    N = cutoff_frequency(h, gamma)
    if 2.0 * N * h >= np.pi:
        raise AliasingError(f"aliasing: 2Nh = {2 * N * h:.6g} >= pi (h = {h:g}, N = {N:.6g})")
    if enforce_small_h:
        mass = profile_mass(psi0, L) + profile_mass(phi0, L)
        h0 = small_h_threshold(mass)
        if h > h0:
            raise SmallMeshError(
                f"h = {h:g} exceeds h_0 = {h0:.6g} set by ||psi0||^2 + ||phi0||^2 = {mass:.6g}"
            )

    M = site_count(L, h)
    k = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    xi = np.pi * k / L
    inside = np.abs(xi) <= N
    c_psi = np.where(inside, _window_coefficients(psi0, xi, L, h, oversample), 0.0)
    c_phi = np.where(inside, _window_coefficients(phi0, xi, L, h, oversample), 0.0)

    alpha_hat = np.zeros(M, dtype=complex)
    alpha_hat[np.mod(k, M)] += c_psi
    alpha_hat[np.mod(k + M // 2, M)] += c_phi
    return inverse_transform(SpectralCoefficients(alpha_hat), h)


# ---------------------------------------------------------------------------
# lattice -> line


def reconstruct(c: LatticeField, oversample: int = 4) -> ContinuumField:
    """Band-limited interpolant ``[R c](x)`` of the slow semicircle of ``c``.

    The semicircle is the half-open arc ``[-pi/2, pi/2)``; the returned field has
    grid spacing ``h / oversample`` and band limit ``pi / 2h``.
    """
    a_hat = forward_transform(c).values
    slow = slow_arc(c.M)
    k = arc_index(c.M)[slow]
    J = oversample * c.M
    return field_from_spectrum(_place(a_hat[slow], k, J), c.h / oversample, np.pi / (2.0 * c.h))


def split_fields(
    f: LatticeField, t_macro: Optional[float] = None, oversample: int = 4
) -> Tuple[ContinuumField, ContinuumField]:
    """Slow and modulated continuum components ``(psi^h, phi^h)`` of a lattice field.

    ``t_macro`` defaults to ``h**2 * f.t_lat``; it only enters through the
    demodulating phase ``exp(4 i t_macro / h**2)`` of the second component.
    """
    if t_macro is None:
        t_macro = f.h**2 * f.t_lat
    psi = reconstruct(f, oversample)
    shifted = f.replace(values=_alternating(f.M) * (-1) ** (f.M // 2) * f.values)
    phi = reconstruct(shifted, oversample)
    phase = np.exp(4j * t_macro / f.h**2)
    return psi, ContinuumField(phi.dx, phase * phi.values, phi.bandlimit)


# ---------------------------------------------------------------------------
# projections


def project_arc(f: LatticeField, delta: float) -> LatticeField:
    """Sharp projection onto ``{theta : sin(theta)**2 < delta**2}``."""
    if not 0 < delta < 1:
        raise ParameterError(f"arc parameter must lie in (0, 1), got {delta}")
    theta = fundamental_arc(f.M)
    return apply_symbol(f, (np.sin(theta) ** 2 < delta**2).astype(float))


def _smooth_step(u):
    """C-infinity transition from 1 (u <= 0) to 0 (u >= 1)."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
        b = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
    return a / (a + b)


def smooth_bump(x):
    """chi: equal to 1 on ``|x| <= 1``, 0 on ``|x| >= 2``, smooth in between."""
    return _smooth_step(np.abs(np.asarray(x, dtype=float)) - 1.0)


def smooth_symbol(M: int, kappa: float, h: float) -> np.ndarray:
    theta = fundamental_arc(M)
    w = kappa * h
    return smooth_bump(theta / w) + smooth_bump((theta - np.pi) / w)


def project_smooth(f: LatticeField, kappa: float, h: Optional[float] = None) -> LatticeField:
    """Smooth two-bump frequency localisation around ``theta = 0`` and ``theta = pi``."""
    h = f.h if h is None else h
    if not kappa * h < np.pi / 4:
        raise ParameterError(f"need kappa h < pi/4, got {kappa * h:.6g}")
    return apply_symbol(f, smooth_symbol(f.M, kappa, h))
