"""Conserved functionals of the AL flow and drift monitoring.

All functionals take a :class:`~alcontinuum.grid.LatticeField` and the sign
convention; ``beta_n = s * conj(alpha_n)`` with ``s = +1`` (defocusing) or ``-1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from .dynamics import Trajectory, sign_value
from .errors import DomainError, EigenSolverError, ParameterError, SizeLimitError
from .grid import LatticeField, fundamental_arc, project_arc

#: Dense eigen-decompositions above this many sites are refused.
MAX_DENSE_SITES = 2048


def _beta(a: np.ndarray, s: float) -> np.ndarray:
    return s * np.conj(a)


def _log_weight(a: np.ndarray, s: float) -> np.ndarray:
    """ln(1 - alpha_n beta_n), with the disk check for the defocusing case."""
    q = 1.0 - s * (a.real**2 + a.imag**2)
    if np.any(q <= 0):
        raise DomainError(f"1 - alpha beta <= 0 at {int(np.sum(q <= 0))} site(s)")
    return np.log(q)


def mass(f: LatticeField, sign) -> float:
    s = sign_value(sign)
    return float(-np.sum(_log_weight(f.values, s)))


def hamiltonian(f: LatticeField, sign) -> float:
    s = sign_value(sign)
    a = f.values
    b = _beta(a, s)
    ap, bp = np.roll(a, -1), np.roll(b, -1)
    total = -np.sum(a * bp + ap * b + 2.0 * _log_weight(a, s))
    return float(total.real)


def h2(f: LatticeField, sign) -> float:
    s = sign_value(sign)
    a = f.values
    b = _beta(a, s)
    a1, a2 = np.roll(a, -1), np.roll(a, -2)
    bm = np.roll(b, 1)
    poly = a2 * b - 0.5 * a**2 * bm**2 - a1 * a * b * bm
    return float(-np.sum(2.0 * _log_weight(a, s) + 2.0 * poly.real))


def quadratic_h2(f: LatticeField, sign) -> float:
    """Quadratic part ``+- int 4 sin^2(theta) |alpha_hat|^2 dtheta/2pi`` (discrete sum)."""
    s = sign_value(sign)
    a_hat = np.fft.fft(f.values)
    return float(s * np.mean(4.0 * np.sin(fundamental_arc(f.M)) ** 2 * np.abs(a_hat) ** 2))


# ---------------------------------------------------------------------------
# generating function


def _circulant(symbol: np.ndarray) -> np.ndarray:
    """Dense matrix of the lattice Fourier multiplier with the given symbol."""
    M = symbol.size
    col = np.fft.ifft(symbol)
    idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    return col[idx]


@dataclass(frozen=True)
class GeneratingFunctionContext:
    """Dense factors ``Lambda = alpha (S - 1/z)^{-1}`` and ``Gamma = beta (z - S)^{-1}``."""

    z: complex
    Lam: np.ndarray
    Gam: np.ndarray

    @classmethod
    def build(cls, f: LatticeField, z: complex, sign) -> "GeneratingFunctionContext":
        s = sign_value(sign)
        if not abs(z) > 1:
            raise ParameterError(f"|z| must exceed 1, got {abs(z):.6g}")
        if f.M > MAX_DENSE_SITES:
            raise SizeLimitError(f"{f.M} sites exceeds the dense gate of {MAX_DENSE_SITES}")
        shift = np.exp(1j * fundamental_arc(f.M))  # symbol of (S g)_n = g_{n+1}
        R1 = _circulant(1.0 / (shift - 1.0 / z))
        R2 = _circulant(1.0 / (z - shift))
        a = f.values
        return cls(complex(z), a[:, None] * R1, _beta(a, s)[:, None] * R2)

    def hs_norms_sq(self):
        return float(np.sum(np.abs(self.Lam) ** 2)), float(np.sum(np.abs(self.Gam) ** 2))

    def product(self) -> np.ndarray:
        return self.Lam @ self.Gam

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.product()))))


def convergence_margin(f: LatticeField, z: complex) -> float:
    """``|z| / (|z|^2 - 1) * ||alpha||^2``; the trace series converges when this is < 1."""
    r = abs(z)
    return r / (r * r - 1.0) * f.norm() ** 2


def generating_function(
    f: LatticeField, z: complex, sign, method: str = "eig"
) -> complex:
    """``A(z) = sum_l (-1)^{l+1}/l tr (Lambda Gamma)^l = log det(1 + Lambda Gamma)``.

    ``method="eig"`` sums principal logarithms of ``1 + lambda_j``; ``"logdet"``
    uses an LU factorisation (real part exact, imaginary part modulo 2 pi).
    """
    if convergence_margin(f, z) >= 1:
        raise ParameterError(
            f"series does not converge: |z|/(|z|^2-1) ||alpha||^2 = {convergence_margin(f, z):.6g} >= 1"
        )
    if not np.any(f.values):
        return 0j
    ctx = GeneratingFunctionContext.build(f, z, sign)
    K = ctx.product()
    if method == "eig":
        try:
            lam = np.linalg.eigvals(K)
        except np.linalg.LinAlgError as exc:
            raise EigenSolverError(str(exc)) from exc
        if not np.all(np.isfinite(lam)):
            raise EigenSolverError("non-finite eigenvalues")
        return complex(np.sum(np.log1p(lam)))
    if method == "logdet":
        sgn, logabs = np.linalg.slogdet(np.eye(f.M) + K)
        return complex(logabs + 1j * np.angle(sgn))
    raise ParameterError(f"unknown method {method!r}")


def trace_series(f: LatticeField, z: complex, sign, lmax: int) -> complex:
    """Truncated power series for ``A(z)``; independent of the eigen route."""
    K = GeneratingFunctionContext.build(f, z, sign).product()
    P = np.eye(f.M, dtype=complex)
    total = 0j
    for l in range(1, lmax + 1):
        P = P @ K
        total += (-1) ** (l + 1) / l * np.trace(P)
    return total


def g_functional(f: LatticeField, kappa: float, h: Optional[float] = None, sign="defocusing",
                 method: str = "logdet") -> float:
    """Coercive combination ``G(kappa h; alpha)`` of the mass and ``Re A``."""
    s = sign_value(sign)
    h = f.h if h is None else h
    w = kappa * h
    if not w > 0:
        raise ParameterError("kappa h must be positive")
    A = generating_function(f, np.exp(w), s, method) + generating_function(f, 1j * np.exp(w), s, method)
    return float(s * 2.0 / (np.exp(4 * w) + 1.0) * mass(f, s) - s * np.tanh(2 * w) * A.real)


def quadratic_g(f: LatticeField, kappa: float, h: Optional[float] = None) -> float:
    """``int sin^2 theta |alpha_hat|^2 / (sinh^2(2 kappa h) + sin^2 theta) dtheta / 2pi``."""
    h = f.h if h is None else h
    sn2 = np.sin(fundamental_arc(f.M)) ** 2
    weight = sn2 / (np.sinh(2 * kappa * h) ** 2 + sn2)
    return float(np.mean(weight * np.abs(np.fft.fft(f.values)) ** 2))


def scan_kappa0(norm_sq: float, h: float, margin: float = 2.0, step: float = 0.25,
                kappa_max: Optional[float] = None) -> float:
    """Smallest ``kappa`` on a descending grid whose generating-function series
    converges with the given safety margin at both ``z = e^{kappa h}`` and ``i e^{kappa h}``."""
    kappa_max = np.pi / (2 * h) if kappa_max is None else kappa_max
    best = None
    for kappa in np.arange(np.floor(kappa_max / step) * step, 0, -step):
        r = np.exp(kappa * h)
        if r / (r * r - 1) * norm_sq * margin < 1:
            best = float(kappa)
        else:
            break
    if best is None:
        raise ParameterError("no admissible kappa below kappa_max")
    return best


# ---------------------------------------------------------------------------
# monitoring


@dataclass(frozen=True)
class DriftReport:
    name: str
    times: np.ndarray
    values: np.ndarray
    max_abs: float
    max_rel: float

    @classmethod
    def from_values(cls, name: str, times, values) -> "DriftReport":
        values = np.asarray(values, dtype=float)
        times = np.asarray(times, dtype=float)
        i0 = int(np.argmin(np.abs(times)))
        ref = values[i0]
        d = np.abs(values - ref)
        max_abs = float(d.max()) if d.size else 0.0
        max_rel = max_abs / (abs(ref) + 1e-30) if d.size else 0.0
        return cls(name, times, values, max_abs, float(max_rel))


FUNCTIONALS: Dict[str, Callable] = {"M": mass, "H": hamiltonian, "H2": h2}


def drift_report(traj: Trajectory, name: str, fn: Optional[Callable] = None,
                 stride: int = 1, **kwargs) -> DriftReport:
    """Evaluate a functional along every ``stride``-th snapshot (time 0 always included)."""
    fn = FUNCTIONALS[name] if fn is None else fn
    sign = traj.params.sign
    times = traj.times
    i0 = int(np.argmin(np.abs(times)))
    idx = sorted(set(range(i0 % stride, len(times), stride)) | {i0})
    vals = [fn(traj.snapshots[i][1], sign=sign, **kwargs) for i in idx]
    return DriftReport.from_values(name, times[idx], vals)


def suppression_ratio(traj: Trajectory, delta: float) -> np.ndarray:
    """``||(1 - P_delta) alpha(t)|| / ||alpha(0)||`` at each snapshot."""
    n0 = traj.initial().norm()
    out = []
    for f in traj.fields:
        rest = f.values - project_arc(f, delta).values
        out.append(np.linalg.norm(rest) / n0 if n0 > 0 else 0.0)
    return np.array(out)
