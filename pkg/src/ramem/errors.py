"""Exception hierarchy for the memory simulator.

Validation-type errors (bad parameters, inconsistent grids, degenerate
inputs) map to CLI exit code 2; numerical failures map to exit code 3.
"""


class RamemError(Exception):
    """Base class for all simulator errors."""


# -- validation-type errors ------------------------------------------------

class CouplingDegenerate(RamemError):
    """Signal coupling does not dominate the anti-Stokes coupling."""


class BadWaveformParams(RamemError):
    """Control waveform parameters outside their allowed ranges."""


class ZeroEnergyWaveform(RamemError):
    """Control waveform has no pulse energy on its window."""


class OutOfRange(RamemError):
    """Scaled-time value outside [0, 1]."""


class GridMismatch(RamemError):
    """Sampled arrays inconsistent with the stated grids."""


class GridTooCoarse(RamemError):
    """Grid below the minimum resolution for the solver."""


class DivisionNearZeroControl(RamemError):
    """Frame transform requested where the control amplitude vanishes."""


class DegenerateInput(RamemError):
    """Zero-energy optical input or empty spinwave where one is required."""


class ModeMismatch(RamemError):
    """Requested solver mode inconsistent with the supplied fields."""


class BadConfig(RamemError):
    """Optimizer configuration violates its invariants."""


# -- numerical failures ----------------------------------------------------

class NonFiniteField(RamemError):
    """A field exceeded the blow-up threshold during integration."""

    def __init__(self, message, p_index=None):
        super().__init__(message)
        self.p_index = p_index


class NoConvergence(RamemError):
    """Iteration budget exhausted before reaching the requested tolerance."""

    def __init__(self, message, last_result=None):
        super().__init__(message)
        self.last_result = last_result


# -- CLI / configuration ---------------------------------------------------

class ParseError(RamemError):
    """Configuration document is not well-formed JSON."""


class ValidationError(RamemError):
    """Configuration document is well-formed but invalid."""
