"""Physical parameters, derived couplings, and control/signal waveforms.

All quantities are dimensionless: time is in units of the excited-state
lifetime, position in units of the ensemble length, detunings in linewidths.
A single optical-depth number and two detunings then fix every coupling.

The effective couplings carry the control-pulse energy explicitly,
g_s = sqrt(d W) / delta_s, so that the write/read dynamics in the
scaled-time frame depend on the control only through g.  The energy-free
form sqrt(d)/delta_s corresponds to the W = 1 convention.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.special import erf

from .errors import BadWaveformParams, CouplingDegenerate

WAVEFORM_KINDS = ("square", "gaussian", "spline")


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensionless atomic/optical constants of the memory.

    d        : optical depth of the ensemble, > 0
    delta_s  : signal detuning (linewidths), far off resonance
    delta_hf : hyperfine splitting (linewidths), > 0
    w_write  : write control pulse energy, integral of |Omega|^2, > 0
    w_read   : read control pulse energy, > 0
    """

    d: float
    delta_s: float
    delta_hf: float
    w_write: float = 1.0
    w_read: float = 1.0

    def __post_init__(self):
        if not (self.d > 0):
            raise ValueError(f"optical depth must be positive, got {self.d}")
        if not (self.delta_hf > 0):
            raise ValueError(f"delta_hf must be positive, got {self.delta_hf}")
        if self.delta_s == 0:
            raise ValueError("delta_s must be nonzero (far-detuned model)")
        if not (self.w_write > 0) or not (self.w_read > 0):
            raise ValueError("control pulse energies must be positive")
        if self.delta_a == 0:
            raise CouplingDegenerate("delta_s + delta_hf must be nonzero")
        if self.delta_s ** 2 >= self.delta_a ** 2:
            raise CouplingDegenerate(
                "signal coupling must dominate: need delta_a^2 > delta_s^2, "
                f"got delta_s={self.delta_s}, delta_a={self.delta_a}"
            )

    @property
    def delta_a(self) -> float:
        """Anti-Stokes detuning delta_s + delta_hf."""
        return self.delta_s + self.delta_hf


@dataclass(frozen=True)
class DerivedCouplings:
    """Couplings and phase rates of the scaled-time equations.

    g_s, g_a : signal / anti-Stokes couplings to the spinwave
    g        : bright-mode coupling sqrt(g_s^2 - g_a^2)
    delta_k  : wavevector mismatch d/delta_s + d/(delta_a + delta_hf)
    xi       : coupling ratio g_a / g_s
    stark    : AC-Stark phase rate (1/delta_s - 1/delta_a) * W per unit p
    phase_s  : z-phase rate d/delta_s of the signal field
    phase_a  : z-phase rate d/(delta_a + delta_hf) of the anti-Stokes field
    """

    g_s: float
    g_a: float
    g: float
    delta_k: float
    xi: float
    stark: float
    phase_s: float
    phase_a: float


def derive_couplings(params: PhysicalParams, stage_energy: float) -> DerivedCouplings:
    """Derive the scaled-frame coupling constants for one control stage.

    `stage_energy` is the control pulse energy W of the stage; couplings
    scale as sqrt(W) while xi, delta_k and the phase rates are independent
    of it.
    """
    if not (stage_energy > 0):
        raise ValueError(f"stage energy must be positive, got {stage_energy}")
    root = math.sqrt(params.d * stage_energy)
    g_s = root / params.delta_s
    g_a = root / params.delta_a
    if g_s ** 2 <= g_a ** 2:
        raise CouplingDegenerate(
            f"g_s={g_s} does not dominate g_a={g_a}; bright-mode coupling undefined"
        )
    g = math.sqrt(g_s ** 2 - g_a ** 2)
    phase_s = params.d / params.delta_s
    phase_a = params.d / (params.delta_a + params.delta_hf)
    return DerivedCouplings(
        g_s=g_s,
        g_a=g_a,
        g=g,
        delta_k=phase_s + phase_a,
        xi=g_a / g_s,
        stark=(1.0 / params.delta_s - 1.0 / params.delta_a) * stage_energy,
        phase_s=phase_s,
        phase_a=phase_a,
    )


@dataclass(frozen=True, eq=False)
class ControlWaveform:
    """Non-negative Rabi-frequency envelope Omega(t) on a time window.

    The phase of the control is fixed to zero; only the amplitude envelope
    is modelled.  `energy` is the window integral of |Omega|^2.
    """

    kind: str
    t_window: tuple[float, float]
    energy: float
    params: dict
    notes: tuple[str, ...] = ()
    _eval: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)

    def omega(self, t) -> np.ndarray:
        """Evaluate Omega(t); zero outside the window."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        inside = (tt >= self.t_window[0]) & (tt <= self.t_window[1])
        out = np.zeros(tt.shape, dtype=float)
        if np.any(inside):
            out[inside] = self._eval(tt[inside])
        return float(out[0]) if scalar else out

    def scaled(self, energy: float) -> "ControlWaveform":
        """Same shape rescaled so the window pulse energy equals `energy`."""
        if not (energy > 0):
            raise BadWaveformParams(f"target energy must be positive, got {energy}")
        factor = math.sqrt(energy / self.energy)
        base = self._eval
        return ControlWaveform(
            kind=self.kind,
            t_window=self.t_window,
            energy=energy,
            params={**self.params, "rescaled_to": energy},
            notes=self.notes,
            _eval=lambda t, _b=base, _f=factor: _f * _b(t),
        )


def make_waveform(kind: str, params: dict, t_window: tuple[float, float]) -> ControlWaveform:
    """Build a control waveform of the given kind.

    square   : start, duration, amplitude
    gaussian : center, duration (width tau of |Omega|^2 ~ exp(-(t-c)^2/tau^2)),
               amplitude
    spline   : times (knot positions), amplitudes (clamped to >= 0), joined by
               a shape-preserving cubic
    """
    t0, t1 = float(t_window[0]), float(t_window[1])
    if not (t1 > t0):
        raise BadWaveformParams(f"empty time window {t_window}")
    notes: tuple[str, ...] = ()

    if kind == "square":
        start = float(params["start"])
        duration = float(params["duration"])
        amplitude = float(params["amplitude"])
        if duration <= 0:
            raise BadWaveformParams(f"square duration must be positive, got {duration}")
        if amplitude <= 0:
            raise BadWaveformParams(f"amplitude must be positive, got {amplitude}")
        if start < t0 or start + duration > t1:
            raise BadWaveformParams("square pulse support extends outside the window")
        stop = start + duration
        energy = amplitude ** 2 * duration

        def evaluate(t, _a=amplitude, _s=start, _e=stop):
            return np.where((t >= _s) & (t <= _e), _a, 0.0)

    elif kind == "gaussian":
        center = float(params["center"])
        tau = float(params["duration"])
        amplitude = float(params["amplitude"])
        if tau <= 0:
            raise BadWaveformParams(f"gaussian duration must be positive, got {tau}")
        if amplitude <= 0:
            raise BadWaveformParams(f"amplitude must be positive, got {amplitude}")
        if not (t0 <= center <= t1):
            raise BadWaveformParams("gaussian center outside the window")
        # window integral of |Omega|^2 = a^2 exp(-(t-c)^2/tau^2), closed form
        energy = (
            amplitude ** 2 * tau * math.sqrt(math.pi) / 2.0
            * (erf((t1 - center) / tau) - erf((t0 - center) / tau))
        )

        def evaluate(t, _a=amplitude, _c=center, _tau=tau):
            return _a * np.exp(-((t - _c) ** 2) / (2.0 * _tau ** 2))

    elif kind == "spline":
        times = np.asarray(params["times"], dtype=float)
        amplitudes = np.asarray(params["amplitudes"], dtype=float)
        if times.ndim != 1 or times.size < 2 or amplitudes.shape != times.shape:
            raise BadWaveformParams("spline needs >= 2 knots with matching amplitudes")
        if np.any(np.diff(times) <= 0):
            raise BadWaveformParams("spline knot times must be strictly increasing")
        if times[0] < t0 or times[-1] > t1:
            raise BadWaveformParams("spline knots outside the window")
        if np.any(amplitudes < 0):
            notes = ("negative knot amplitudes clamped to zero",)
            warnings.warn("negative spline amplitudes clamped to zero", RuntimeWarning)
            amplitudes = np.maximum(amplitudes, 0.0)
        interp = PchipInterpolator(times, amplitudes, extrapolate=False)

        def evaluate(t, _i=interp):
            return np.maximum(np.nan_to_num(_i(t), nan=0.0), 0.0)

        ts = np.linspace(t0, t1, 8193)
        energy = float(trapezoid(evaluate(ts) ** 2, ts))

    else:
        raise BadWaveformParams(f"unknown waveform kind {kind!r}")

    if not (energy > 0):
        raise BadWaveformParams("waveform has zero pulse energy on the window")
    return ControlWaveform(
        kind=kind,
        t_window=(t0, t1),
        energy=float(energy),
        params=dict(params),
        notes=notes,
        _eval=evaluate,
    )


@dataclass(frozen=True, eq=False)
class SignalPulse:
    """Complex signal envelope sampled on a uniform time grid.

    `duration` is the nominal intensity FWHM.  Constructors normalize the
    samples so the trapezoid quadrature energy equals the requested value
    exactly.
    """

    t_grid: np.ndarray
    envelope: np.ndarray
    duration: float

    def __post_init__(self):
        if self.t_grid.shape != self.envelope.shape or self.t_grid.ndim != 1:
            raise ValueError("signal grid and envelope shapes disagree")
        if not np.all(np.isfinite(self.envelope)):
            raise ValueError("signal envelope must be finite")
        if self.energy <= 0:
            raise ValueError("signal must carry positive energy")

    @property
    def energy(self) -> float:
        return float(trapezoid(np.abs(self.envelope) ** 2, self.t_grid))

    def scaled(self, energy: float) -> "SignalPulse":
        """Same shape rescaled to the given quadrature energy."""
        if not (energy > 0):
            raise ValueError(f"target energy must be positive, got {energy}")
        factor = math.sqrt(energy / self.energy)
        return SignalPulse(self.t_grid, factor * self.envelope, self.duration)


def gaussian_signal(center: float, fwhm: float, energy: float, t_grid: np.ndarray) -> SignalPulse:
    """Gaussian signal pulse with the given intensity FWHM."""
    if fwhm <= 0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    t_grid = np.asarray(t_grid, dtype=float)
    tau = fwhm / (2.0 * math.sqrt(math.log(2.0)))
    env = np.exp(-((t_grid - center) ** 2) / (2.0 * tau ** 2)).astype(complex)
    pulse = SignalPulse(t_grid, env, fwhm)
    return pulse.scaled(energy)


def square_signal(start: float, duration: float, energy: float, t_grid: np.ndarray) -> SignalPulse:
    """Flat-top signal pulse on [start, start + duration]."""
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    t_grid = np.asarray(t_grid, dtype=float)
    env = np.where((t_grid >= start) & (t_grid <= start + duration), 1.0, 0.0).astype(complex)
    pulse = SignalPulse(t_grid, env, duration)
    return pulse.scaled(energy)
