"""Exception hierarchy shared by the library and the command line."""


class ALError(Exception):
    """Base class for every error raised by :mod:`alcontinuum`."""


class AliasingError(ALError, ValueError):
    """The two spectral bumps of the sampled data would overlap (2Nh >= pi)."""


class SmallMeshError(ALError, ValueError):
    """The mesh exceeds the mass threshold that keeps the flow in the unit disk."""


class ParameterError(ALError, ValueError):
    """A numerical parameter lies outside its admissible range."""


class BandlimitError(ALError, ValueError):
    """Input carries spectral content beyond the required band."""


class DomainError(ALError, ValueError):
    """A defocusing field left the unit disk, so the logarithms are undefined."""


class OverflowGuardError(ALError, RuntimeError):
    """The defocusing evolution reached sup |alpha_n| >= 1."""


class StepSizeRejected(ALError, RuntimeError):
    """Conserved-quantity drift exceeded the tolerance after all refinements."""


class SizeLimitError(ALError, ValueError):
    """Dense linear algebra requested on a lattice above the size gate."""


class EigenSolverError(ALError, RuntimeError):
    """The dense eigensolver failed to return a usable spectrum."""


class UnderResolvedError(ALError, ValueError):
    """The snapshot grid is too coarse for the requested quadrature."""


class TimeGridMismatch(ALError, ValueError):
    """Two snapshot sequences do not share their time stamps."""


class ConfigError(ALError, ValueError):
    """The configuration document is malformed or violates an invariant."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
