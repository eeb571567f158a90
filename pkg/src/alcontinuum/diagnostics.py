"""Measurements along AL trajectories: mixed space-time norms, Fourier and
spatial tightness, the effective on-site nonlinearity, nonresonant cross terms
and the distance to the limiting NLS pair.

Snapshot sequences are lists of ``(t, ContinuumField)`` pairs in macroscopic
time; :class:`~alcontinuum.nls.NlsState` lists are accepted wherever a
reference is expected.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .dynamics import Trajectory, sign_value
from .errors import BandlimitError, ParameterError, TimeGridMismatch, UnderResolvedError
from .grid import (
    ContinuumField,
    LatticeField,
    _place,
    check_bandlimit,
    continuum_spectrum,
    fundamental_arc,
    resample,
    sharp_cutoff,
    slow_arc,
    smooth_bump,
    split_fields,
)

Snapshots = Sequence[Tuple[float, ContinuumField]]

STRICHARTZ_PAIRS = {(6, 6), (4, np.inf)}


@dataclass(frozen=True)
class NormProfile:
    label: str
    parameter: float
    times: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> float:
        return float(np.max(self.values)) if self.values.size else 0.0


def macro_times(traj: Trajectory) -> np.ndarray:
    return traj.h**2 * traj.times


def split_trajectory(traj: Trajectory, oversample: int = 4):
    """``(psi_snaps, phi_snaps)`` at every stored snapshot."""
    psi, phi = [], []
    for t, f in zip(macro_times(traj), traj.fields):
        a, b = split_fields(f, t, oversample)
        psi.append((float(t), a))
        phi.append((float(t), b))
    return psi, phi


def _as_pairs(snaps) -> List[Tuple[float, ContinuumField]]:
    out = []
    for s in snaps:
        if hasattr(s, "field"):
            out.append((float(s.t), s.field))
        else:
            t, f = s
            out.append((float(t), f))
    return out


# ---------------------------------------------------------------------------
# Strichartz-type norms


def _lebesgue(a: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.sum(np.abs(a) ** r) ** (1.0 / r))


def _mixed_norm(t: np.ndarray, inner: np.ndarray, q: float) -> float:
    return float(max(simpson(inner**q, x=t), 0.0) ** (1.0 / q))


def strichartz_norm(traj: Trajectory, q: float, r: float, density_tol: float = 0.01) -> float:
    """``L^q_t l^r_n`` norm over the stored lattice-time grid (composite Simpson in t).

    The value is recomputed on every other snapshot; a relative change above
    ``density_tol`` means the time grid is too coarse.
    """
    if (q, r) not in STRICHARTZ_PAIRS:
        raise ParameterError(f"unsupported exponent pair ({q}, {r})")
    t = traj.times
    if t.size < 5:
        raise UnderResolvedError("need at least five snapshots")
    inner = np.array([_lebesgue(f.values, r) for f in traj.fields])
    full = _mixed_norm(t, inner, q)
    if full == 0.0:
        return 0.0
    i0 = int(np.argmin(np.abs(t)))
    half = slice(i0 % 2, None, 2)
    coarse = _mixed_norm(t[half], inner[half], q)
    if abs(coarse - full) > density_tol * full:
        raise UnderResolvedError(
            f"L^{q}_t l^{r} norm changes by {abs(coarse - full) / full:.3e} when halving snapshot density"
        )
    return full


# ---------------------------------------------------------------------------
# tightness in frequency and space


def _high_mass(f: LatticeField, kappa: float) -> float:
    """``||P_{|xi|>=kappa} psi^h||^2 + ||P_{|xi|>=kappa} phi^h||^2`` from the half-open arcs."""
    theta = fundamental_arc(f.M)
    w = kappa * f.h
    slow = slow_arc(f.M)
    dist = np.where(slow, np.abs(theta), np.abs(theta - np.pi))
    a2 = np.abs(np.fft.fft(f.values)) ** 2
    return float(np.sum(a2[dist >= w]) / f.M / f.h)


def equicontinuity_series(traj: Trajectory, h: float, kappa: float) -> NormProfile:
    if not kappa * h < 0.5 * np.pi:
        raise ParameterError(f"need kappa h < pi/2, got {kappa * h:.6g}")
    vals = [np.sqrt(_high_mass(f, kappa)) for f in traj.fields]
    return NormProfile("equicontinuity", float(kappa), macro_times(traj), np.array(vals))


def equicontinuity_profile(traj: Trajectory, h: float, kappa: float) -> float:
    """Sup over snapshots of the high-frequency L2 mass of both channels (square-rooted)."""
    return equicontinuity_series(traj, h, kappa).sup


def tightness_series(traj: Trajectory, h: float, R: float) -> NormProfile:
    L = traj.fields[0].L
    if R < 1:
        raise ParameterError(f"R must be at least 1, got {R}")
    if R >= L:
        raise ParameterError(f"R = {R:g} must be smaller than the window half-width {L:g}")
    cut = 1.0 - smooth_bump(traj.fields[0].x / R)
    vals = [float(np.sum((cut * np.abs(f.values)) ** 2) / h) for f in traj.fields]
    return NormProfile("tightness", float(R), macro_times(traj), np.array(vals))


def tightness_profile(traj: Trajectory, h: float, R: float) -> float:
    """Sup over snapshots of ``h^-1 sum_n phi_R(n)^2 |alpha_n|^2`` with ``phi_R = 1 - chi(nh/R)``."""
    return tightness_series(traj, h, R).sup


# ---------------------------------------------------------------------------
# effective nonlinearity


def _on_lattice(f: ContinuumField, h: float) -> np.ndarray:
    """Values at ``x = n h`` of a field band-limited below ``pi / h``."""
    M = int(round(2.0 * f.L / h))
    if M % 2 or abs(M * h - 2.0 * f.L) > 1e-9 * f.L:
        raise ParameterError("window is not a whole even number of lattice sites")
    return np.asarray(resample(f, M).values)


def sign_flip_check(psi: ContinuumField, phi: ContinuumField, h: float, t: float,
                    sign="defocusing", project: bool = False) -> float:
    """``||F(alpha~) - F~||_{l2} / h^{5/2}`` for the two-channel lattice field alpha~.

    ``alpha~_n = h [psi(nh) + (-1)^n e^{-4 i t / h^2} phi(nh)]``; ``F`` is the exact
    AL nonlinearity and ``F~_n = +-2 h |alpha~_n|^2 [psi(nh) - (-1)^n e phi(nh)]``.
    Inputs must be band-limited below ``h^{-1/2}``; ``project=True`` applies that cutoff first.
    """
    s = sign_value(sign)
    band = h**-0.5
    if project:
        psi, phi = sharp_cutoff(psi, band * (1 - 1e-12)), sharp_cutoff(phi, band * (1 - 1e-12))
    else:
        for f in (psi, phi):
            try:
                check_bandlimit(f, band)
            except BandlimitError as exc:
                raise BandlimitError(f"sign-flip inputs must be band-limited below h^-1/2: {exc}") from None
    u, v = _on_lattice(psi, h), _on_lattice(phi, h)
    M = u.size
    alt = np.where((np.arange(M) - M // 2) % 2 == 0, 1.0, -1.0)
    e = np.exp(-4j * t / h**2)
    a = h * (u + alt * e * v)
    a2 = a.real**2 + a.imag**2
    exact = s * a2 * (np.roll(a, 1) + np.roll(a, -1))
    effective = 2.0 * h * s * a2 * (u - alt * e * v)
    return float(np.linalg.norm(exact - effective) / h**2.5)


# ---------------------------------------------------------------------------
# nonresonant cross terms


def _filon_weights(omega: np.ndarray, dt: float):
    """``int_0^dt e^{i omega u} du`` and ``int_0^dt (u/dt) e^{i omega u} du``."""
    z = 1j * omega * dt
    small = np.abs(z) < 1e-2
    zs = np.where(small, 1.0, z)
    ez = np.exp(z)
    w0 = np.where(small, 1 + z / 2 + z**2 / 6 + z**3 / 24 + z**4 / 120, (ez - 1) / zs)
    w1 = np.where(small, 0.5 + z / 3 + z**2 / 8 + z**3 / 30 + z**4 / 144, (ez * (zs - 1) + 1) / zs**2)
    return dt * w0, dt * w1


def _envelope_band(fields: Sequence[ContinuumField], tail: float) -> float:
    """Radius holding all but ``tail`` of the combined spectral mass."""
    xi, c = continuum_spectrum(fields[0])
    p = sum(np.abs(continuum_spectrum(f)[1]) ** 2 for f in fields)
    total = p.sum()
    if total == 0:
        return 0.0
    order = np.argsort(np.abs(xi))
    cum = np.cumsum(p[order])
    idx = int(np.searchsorted(cum, (1.0 - tail) * total))
    return float(np.abs(xi[order][min(idx, xi.size - 1)]))


def cross_term_series(psi_snaps: Snapshots, phi_snaps: Snapshots, h: float, channel: str = "psi",
                      check: bool = True, tail: float = 1e-6) -> NormProfile:
    """``t -> ||int_0^t e^{+-i(t-s)Delta} e^{-+8 i s/h^2} E(s) ds||_{L2}``.

    ``channel="psi"`` uses ``E = phi^2 conj(psi)`` with the forward group and phase
    ``e^{-8is/h^2}``; ``"phi"`` uses ``E = psi^2 conj(phi)`` with the backward group
    and ``e^{+8is/h^2}``.  Within each snapshot interval the envelope is linear and
    the oscillation is integrated exactly.
    """
    psi_snaps, phi_snaps = _as_pairs(psi_snaps), _as_pairs(phi_snaps)
    t = np.array([p[0] for p in psi_snaps])
    if len(t) != len(phi_snaps) or not np.allclose(t, [p[0] for p in phi_snaps], rtol=0, atol=1e-12):
        raise TimeGridMismatch("psi and phi snapshots are not aligned in time")
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise ParameterError("snapshots must be strictly increasing in time")
    if 0.0 not in t:
        raise TimeGridMismatch("snapshot times must include t = 0")
    psis = [p[1] for p in psi_snaps]
    phis = [p[1] for p in phi_snaps]
    if check:
        # the fast phase is exact; the Nyquist condition bites on what remains
        band = max(_envelope_band([psis[j], phis[j]], tail) for j in {0, t.size // 2, t.size - 1})
        step = float(np.max(np.diff(t)))
        if 3.0 * band**2 * step > np.pi:
            raise UnderResolvedError(
                f"snapshot spacing {step:g} leaves the cubic envelope (band {band:.3g}) under-sampled; "
                f"need 3 band^2 dt <= pi"
            )
    if channel == "psi":
        env = [phi.values**2 * np.conj(psi.values) for psi, phi in zip(psis, phis)]
        xi = continuum_spectrum(psis[0])[0]
        omega = xi**2 - 8.0 / h**2
    elif channel == "phi":
        env = [psi.values**2 * np.conj(phi.values) for psi, phi in zip(psis, phis)]
        xi = continuum_spectrum(psis[0])[0]
        omega = 8.0 / h**2 - xi**2
    else:
        raise ParameterError(f"channel must be 'psi' or 'phi', got {channel!r}")
    dx, L = psis[0].dx, psis[0].L
    E = [continuum_spectrum(ContinuumField(dx, e))[1] for e in env]

    def piece(j):  # integral over [t_j, t_{j+1}]
        w0, w1 = _filon_weights(omega, t[j + 1] - t[j])
        return np.exp(1j * omega * t[j]) * (E[j] * w0 + (E[j + 1] - E[j]) * w1)

    i0 = int(np.flatnonzero(t == 0.0)[0])
    acc = [None] * t.size
    acc[i0] = np.zeros_like(E[0])
    for j in range(i0, t.size - 1):
        acc[j + 1] = acc[j] + piece(j)
    for j in range(i0 - 1, -1, -1):
        acc[j] = acc[j + 1] - piece(j)
    norms = np.array([np.sqrt(np.sum(np.abs(a) ** 2) / (2.0 * L)) for a in acc])
    return NormProfile(f"cross_{channel}", float(h), t, norms)


def cross_term_magnitude(psi_snaps: Snapshots, phi_snaps: Snapshots, h: float, channel: str = "psi",
                         check: bool = True) -> float:
    """Max over snapshot times of the nonresonant cross-channel Duhamel integral."""
    return cross_term_series(psi_snaps, phi_snaps, h, channel, check).sup


def frozen_cross_term(psi: ContinuumField, phi: ContinuumField, h: float, t: float,
                      channel: str = "psi") -> float:
    """Closed form of the cross-term integral for time-independent envelopes."""
    if channel == "psi":
        env, sgn = phi.values**2 * np.conj(psi.values), 1.0
    else:
        env, sgn = psi.values**2 * np.conj(phi.values), -1.0
    xi, c = continuum_spectrum(ContinuumField(psi.dx, env))
    omega = sgn * (xi**2 - 8.0 / h**2)
    integral = c * np.expm1(1j * omega * t) / (1j * omega)
    return float(np.sqrt(np.sum(np.abs(integral) ** 2) / (2.0 * psi.L)))


# ---------------------------------------------------------------------------
# distance to the limiting system


def _spectral_distance(a: ContinuumField, b: ContinuumField) -> float:
    """L2 distance on a shared window after zero-padding both spectra to a common grid."""
    if abs(a.L - b.L) > 1e-9 * max(a.L, 1.0):
        raise ParameterError(f"windows differ: L = {a.L:g} vs {b.L:g}")
    J = max(a.J, b.J)
    out = []
    for f in (a, b):
        _, c = continuum_spectrum(f)
        k = np.fft.fftfreq(f.J, d=1.0 / f.J).astype(int)
        out.append(_place(c, k, J))
    return float(np.sqrt(np.sum(np.abs(out[0] - out[1]) ** 2) / (2.0 * a.L)))


def _match(times: np.ndarray, ref: List[Tuple[float, ContinuumField]], what: str):
    rt = np.array([p[0] for p in ref])
    idx = []
    for t in times:
        j = int(np.argmin(np.abs(rt - t))) if rt.size else -1
        if j < 0 or abs(rt[j] - t) > 1e-9 * max(1.0, abs(t)):
            raise TimeGridMismatch(f"{what} reference has no snapshot at t = {t:.17g}")
        idx.append(j)
    return [ref[j][1] for j in idx]


def convergence_series(traj: Trajectory, h: float, psi_ref, phi_ref):
    """Per-snapshot ``(||psi^h - psi||, ||phi^h - phi||)`` as two NormProfiles."""
    psi_ref, phi_ref = _as_pairs(psi_ref), _as_pairs(phi_ref)
    times = macro_times(traj)
    rp = _match(times, psi_ref, "psi")
    rf = _match(times, phi_ref, "phi")
    ep, ef = [], []
    for t, f, a, b in zip(times, traj.fields, rp, rf):
        psi, phi = split_fields(f, t)
        ep.append(_spectral_distance(psi, a))
        ef.append(_spectral_distance(phi, b))
    return (NormProfile("err_psi", float(h), times, np.array(ep)),
            NormProfile("err_phi", float(h), times, np.array(ef)))


def convergence_error(traj: Trajectory, h: float, psi_ref, phi_ref) -> Tuple[float, float]:
    """``(max_t ||psi^h - psi||_{L2}, max_t ||phi^h - phi||_{L2})``."""
    a, b = convergence_series(traj, h, psi_ref, phi_ref)
    return a.sup, b.sup
