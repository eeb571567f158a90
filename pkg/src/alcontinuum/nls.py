"""Reference solver for the decoupled cubic NLS pair.

Forward orientation solves ``i u_t = -u_xx + 2 s |u|^2 u``; the reversed
orientation solves ``-i u_t = -u_xx + 2 s |u|^2 u`` by conjugation, since the
conjugate of a reversed solution solves the forward equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from .dynamics import sign_value
from .errors import ParameterError, StepSizeRejected, UnderResolvedError
from .grid import ContinuumField, continuum_spectrum, window_frequencies

ORIENTATIONS = {"forward": 1.0, "reversed": -1.0}


def _orientation(o) -> float:
    try:
        return ORIENTATIONS[o]
    except KeyError:
        raise ParameterError(f"orientation must be 'forward' or 'reversed', got {o!r}") from None


@dataclass(frozen=True)
class NlsState:
    field: ContinuumField
    t: float
    sign: str
    orientation: str


def _freqs(f: ContinuumField) -> np.ndarray:
    return window_frequencies(f.J, f.L)


def schrodinger_group(f: ContinuumField, t: float, orientation: str = "forward") -> ContinuumField:
    """``exp(+-i t Delta) f``: multiplier ``exp(-+i t xi^2)``."""
    sigma = _orientation(orientation)
    mult = np.exp(-1j * sigma * t * _freqs(f) ** 2)
    return ContinuumField(f.dx, np.fft.ifft(mult * np.fft.fft(f.values)), f.bandlimit)


def default_step(init: ContinuumField) -> float:
    peak = float(np.max(np.abs(init.values)) ** 2) if init.J else 0.0
    return 1e-3 if peak == 0 else min(1e-3, 0.1 / peak)


def _strang_forward(u0: np.ndarray, xi2: np.ndarray, targets: Sequence[float], dt: float,
                    s: float, coupling: float, drift_tol: Optional[float]):
    u = u0.copy()
    m0 = float(np.sum(np.abs(u0) ** 2))
    t = 0.0
    out = []
    for target in targets:
        span = target - t
        n = max(1, math.ceil(abs(span) / dt - 1e-9)) if span != 0 else 0
        if n:
            tau = span / n
            half = np.exp(-0.5j * tau * xi2)
            full = half * half
            g = 2.0 * s * coupling * tau
            u_hat = half * np.fft.fft(u)
            for i in range(n):
                u = np.fft.ifft(u_hat)
                u = u * np.exp(-1j * g * (u.real**2 + u.imag**2))
                u_hat = np.fft.fft(u) * (full if i < n - 1 else half)
            u = np.fft.ifft(u_hat)
        t = target
        if drift_tol is not None and m0 > 0:
            drift = abs(float(np.sum(np.abs(u) ** 2)) - m0) / m0
            if drift > drift_tol * max(abs(t), 1.0):
                raise StepSizeRejected(f"L2 drift {drift:.3e} at t={t:g} exceeds {drift_tol:g} per unit time")
        out.append(u.copy())
    return out


def nls_solve(
    init: ContinuumField,
    T: float,
    sign,
    orientation: str = "forward",
    dt: Optional[float] = None,
    n_snapshots: int = 65,
    coupling: float = 1.0,
    drift_tol: Optional[float] = 1e-9,
) -> List[NlsState]:
    """Strang split-step solution sampled at ``n_snapshots`` equally spaced times in ``[0, T]``.

    ``T`` may be negative.  ``coupling`` scales the nonlinearity (0 gives the free flow).
    """
    s = sign_value(sign)
    sigma = _orientation(orientation)
    if n_snapshots < 2:
        raise ParameterError("need at least two snapshots")
    dt = default_step(init) if dt is None else dt
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if init.bandlimit is None:
        xi, c = continuum_spectrum(init)
        nyq = np.abs(xi) >= 0.9 * np.pi / init.dx
        if np.any(np.abs(c[nyq]) > 1e-10 * max(np.max(np.abs(c)), 1e-300)):
            raise UnderResolvedError("initial data is not resolved below the grid Nyquist frequency")
    times = np.linspace(0.0, T, n_snapshots)
    u0 = init.values if sigma > 0 else np.conj(init.values)
    xi2 = _freqs(init) ** 2
    us = _strang_forward(np.asarray(u0), xi2, times[1:], dt, s, coupling, drift_tol)
    us = [np.asarray(init.values)] + [u if sigma > 0 else np.conj(u) for u in us]
    name = "defocusing" if s > 0 else "focusing"
    return [
        NlsState(ContinuumField(init.dx, u), float(t), name, orientation)
        for t, u in zip(times, us)
    ]


def max_l2_deviation(a: Sequence[NlsState], b: Sequence[NlsState]) -> float:
    return max(float(np.sqrt(x.field.dx) * np.linalg.norm(x.field.values - y.field.values))
               for x, y in zip(a, b))


def nls_reference(
    init: ContinuumField,
    T: float,
    sign,
    orientation: str = "forward",
    n_snapshots: int = 65,
    tol: float = 1e-9,
    max_halvings: int = 8,
    dt: Optional[float] = None,
):
    """Self-converged solve: halve ``dt`` until successive solutions agree to ``tol``.

    Returns ``(snapshots, dt_used, last_deviation)``.
    """
    if max_halvings < 1:
        raise ParameterError("max_halvings must be at least 1")
    dt = default_step(init) if dt is None else dt
    coarse = nls_solve(init, T, sign, orientation, dt, n_snapshots)
    for _ in range(max_halvings):
        fine = nls_solve(init, T, sign, orientation, dt / 2, n_snapshots)
        dev = max_l2_deviation(coarse, fine)
        dt /= 2
        if dev <= tol:
            return fine, dt, dev
        coarse = fine
    raise StepSizeRejected(f"reference solve did not self-converge below {tol:g} (last {dev:.3e})")


def duhamel_residual(
    snapshots: Sequence[NlsState], sign, orientation: str = "forward", coupling: float = 1.0
) -> float:
    """Max over snapshots of the L2 defect in the Duhamel formula.

    With ``G(t) = exp(i sigma t Delta)`` the checked identity is
    ``u(t) = G(t) u(0) - 2 i s sigma coupling int_0^t G(t - s) |u|^2 u(s) ds``,
    the time integral taken by cumulative Simpson quadrature over the snapshots.
    """
    if len(snapshots) < 5:
        raise UnderResolvedError("Duhamel residual needs at least five snapshots")
    s = sign_value(sign)
    sigma = _orientation(orientation)
    t = np.array([st.t for st in snapshots]) - snapshots[0].t
    if not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=1e-14):
        raise UnderResolvedError("snapshots must be equally spaced")
    f0 = snapshots[0].field
    xi2 = _freqs(f0) ** 2
    U = np.array([np.fft.fft(st.field.values) for st in snapshots])
    Nl = np.array([np.fft.fft(np.abs(st.field.values) ** 2 * st.field.values) for st in snapshots])
    # pull back to the interaction picture: exp(-i sigma s Delta) -> multiplier exp(+i sigma s xi^2)
    profile = np.exp(1j * sigma * np.outer(t, xi2)) * Nl
    # cumulative_simpson casts complex input to real
    integral = (cumulative_simpson(profile.real, x=t, axis=0, initial=0)
                + 1j * cumulative_simpson(profile.imag, x=t, axis=0, initial=0))
    G = np.exp(-1j * sigma * np.outer(t, xi2))
    R = U - G * (U[0] - 2j * s * sigma * coupling * integral)
    # Parseval on the window: ||r||^2 = dx * sum|r_j|^2 = dx / J * sum|R_k|^2
    norms = np.sqrt(f0.dx / f0.J) * np.linalg.norm(R, axis=1)
    return float(norms.max())
