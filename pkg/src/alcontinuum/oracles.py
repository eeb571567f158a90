"""Closed-form checks that run in seconds, before any long simulation."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .dynamics import EvolutionParams, evolve, free_propagator
from .grid import ContinuumField, LatticeField, sample_initial_data, split_fields
from .nls import duhamel_residual, nls_solve, schrodinger_group
from .profiles import GaussianProfile


@dataclass(frozen=True)
class OracleResult:
    name: str
    measured: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and self.measured <= self.tolerance)


def plane_wave_error(M: int = 128, a: float = 0.1, mode: int = 5, t: float = 50.0, dt: float = 0.05) -> float:
    """Max-site error of the evolved AL plane wave against its exact solution (defocusing)."""
    theta = 2 * np.pi * mode / M
    n = np.arange(M) - M // 2
    f0 = LatticeField(1.0, a * np.exp(1j * n * theta))
    tr = evolve(f0, EvolutionParams("defocusing", dt, t, mass_tol=None))
    omega = 4 * np.sin(theta / 2) ** 2 + 2 * a**2 * np.cos(theta)
    exact = a * np.exp(1j * n * theta - 1j * omega * t)
    return float(np.max(np.abs(tr.fields[-1].values - exact)))


def free_group_error(M: int = 256, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    f = LatticeField(0.1, rng.standard_normal(M) + 1j * rng.standard_normal(M))
    a = free_propagator(free_propagator(f, 3.7), 6.3)
    b = free_propagator(f, 10.0)
    return float(np.linalg.norm(a.values - b.values) / np.linalg.norm(f.values))


def _soliton_snapshots(L: float = 24.0, dx: float = 1.0 / 16, T: float = 1.0, n: int = 65, dt: float = 5e-4):
    x = -L + dx * np.arange(int(round(2 * L / dx)))
    init = ContinuumField(dx, 1 / np.cosh(x))
    return x, nls_solve(init, T, "focusing", dt=dt, n_snapshots=n)


def soliton_error() -> float:
    x, snaps = _soliton_snapshots()
    dx = snaps[0].field.dx
    return max(float(np.sqrt(dx) * np.linalg.norm(s.field.values - np.exp(1j * s.t) / np.cosh(x)))
               for s in snaps)


def soliton_duhamel() -> float:
    _, snaps = _soliton_snapshots()
    return duhamel_residual(snaps, "focusing")


def gaussian_free_error(t: float = 0.7) -> float:
    L, dx = 20.0, 1.0 / 16
    x = -L + dx * np.arange(int(round(2 * L / dx)))
    u = schrodinger_group(ContinuumField(dx, np.exp(-x**2)), t)
    exact = np.exp(-x**2 / (1 + 4j * t)) / np.sqrt(1 + 4j * t)
    return float(np.sqrt(dx) * np.linalg.norm(u.values - exact))


def split_plancherel_error(h: float = 0.05, seed: int = 1) -> float:
    rng = np.random.default_rng(seed)
    M = int(round(16 / h))
    f = LatticeField(h, rng.standard_normal(M) + 1j * rng.standard_normal(M), 3.0)
    psi, phi = split_fields(f)
    lhs = psi.norm() ** 2 + phi.norm() ** 2
    rhs = f.norm() ** 2 / h
    return abs(lhs - rhs) / rhs


def sampling_mass_error() -> float:
    """``h^-1 ||alpha(0)||^2`` against the exact mass of the band-limited Gaussian."""
    from scipy.special import erf

    h, gamma = 0.05, 0.5
    N = h**-gamma
    a = sample_initial_data(GaussianProfile(), None, h, gamma, 16.0, enforce_small_h=False)
    # |psi_hat|^2 = pi exp(-xi^2 / 2): mass of the cut = (1/2pi) int_{-N}^{N} |psi_hat|^2
    exact = np.sqrt(np.pi / 2) * erf(N / np.sqrt(2))
    return abs(a.norm() ** 2 / h - exact)


ORACLES: List[tuple] = [
    ("plane_wave_al", plane_wave_error, 1e-8),
    ("free_propagator_group_law", free_group_error, 1e-12),
    ("nls_soliton", soliton_error, 1e-6),
    ("nls_soliton_duhamel", soliton_duhamel, 1e-5),
    ("free_schrodinger_gaussian", gaussian_free_error, 1e-10),
    ("split_plancherel", split_plancherel_error, 1e-10),
    ("sampling_mass", sampling_mass_error, 1e-3),
]


def run_oracles() -> List[OracleResult]:
    out = []
    for name, fn, tol in ORACLES:
        start = time.perf_counter()
        val: float = fn()
        out.append(OracleResult(name, val, tol, time.perf_counter() - start))
    return out
