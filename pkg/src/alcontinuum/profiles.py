"""Continuum initial profiles with (where available) closed-form transforms.

The transform convention throughout the package is

    f_hat(xi) = int f(x) exp(-i x xi) dx,    f(x) = int f_hat(xi) exp(i x xi) dxi / 2pi.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class GaussianProfile:
    """``amplitude * exp(-((x - center) / width)**2) * exp(i wavenumber x)``."""

    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    wavenumber: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        g = self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))
        return g * np.exp(1j * self.wavenumber * x)

    def transform(self, xi):
        xi = np.asarray(xi, dtype=float)
        q = xi - self.wavenumber
        w = self.width
        return (
            self.amplitude * w * np.sqrt(np.pi)
            * np.exp(-(w * q) ** 2 / 4.0)
            * np.exp(-1j * self.center * q)
        )

    def mass(self) -> float:
        """Squared L2 norm."""
        return self.amplitude**2 * self.width * np.sqrt(np.pi / 2.0)


@dataclass(frozen=True)
class ZeroProfile:
    def __call__(self, x):
        return np.zeros(np.shape(x), dtype=complex)

    def transform(self, xi):
        return np.zeros(np.shape(xi), dtype=complex)

    def mass(self) -> float:
        return 0.0


@dataclass(frozen=True)
class SampledProfile:
    """A profile known only through samples on a uniform periodic window.

    ``values[j]`` is the value at ``x_j = -L + j * dx`` with ``L = len(values) * dx / 2``.
    """

    dx: float
    values: np.ndarray

    def __call__(self, x):
        # spectral (trigonometric) interpolation of the stored samples
        from .grid import ContinuumField, continuum_spectrum

        field = ContinuumField(self.dx, self.values)
        xi, c = continuum_spectrum(field)
        x = np.asarray(x, dtype=float)
        return (np.exp(1j * np.multiply.outer(x, xi)) @ c) / (2.0 * field.L)

    def mass(self) -> float:
        return float(self.dx * np.sum(np.abs(self.values) ** 2))


def as_profile(obj) -> Optional[object]:
    """Normalise ``None`` / callables / profiles into something with ``__call__``."""
    if obj is None:
        return ZeroProfile()
    if isinstance(obj, (GaussianProfile, ZeroProfile, SampledProfile)):
        return obj
    if callable(obj):
        return obj
    raise TypeError(f"cannot interpret {obj!r} as an initial profile")


def profile_mass(profile, L: float, dx: float = 1.0 / 64) -> float:
    """Squared L2 norm of a profile over the window [-L, L)."""
    if hasattr(profile, "mass"):
        return float(profile.mass())
    x = -L + dx * np.arange(int(round(2 * L / dx)))
    f: Callable = profile
    return float(dx * np.sum(np.abs(f(x)) ** 2))
