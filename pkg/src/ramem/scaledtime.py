"""Scaled-time coordinate and raw <-> normalized frame transforms.

The scaled time p(t) is the cumulative control-pulse energy normalized to
[0, 1].  In the (z, p) frame the propagation equations lose their explicit
time dependence; the field transforms below carry an extra 1/sqrt(W)
relative to the bare Jacobian form so that photon-number integrals are
identical in both frames:

    a_s(p)  = Omega * E_s(t) * (dt/dp) * W^(-1/2) * exp(i phi_s)
    phi_s   = stark * p + phase_s * z

and analogously for the anti-Stokes conjugate field with phase
stark * p - phase_a * z.  The spinwave transform is a pure phase.

The forward transform is evaluated pointwise on the image of the time grid
(no resampling), so composing it with the inverse is exact wherever the
control amplitude is above the numerical floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    DivisionNearZeroControl,
    GridMismatch,
    OutOfRange,
    ZeroEnergyWaveform,
)
from .model import ControlWaveform, DerivedCouplings

# control amplitudes below FLOOR_RATIO * max|Omega| are treated as zero
FLOOR_RATIO = 1e-8
# |a| above SUPPORT_RATIO * max|a| counts as supported when inverting
SUPPORT_RATIO = 1e-12


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    """Sampled scaled-time map p(t) with its Jacobian dt/dp.

    p is non-decreasing with exact endpoints p(t0) = 0, p(t1) = 1; it is
    strictly increasing wherever |Omega|^2 is above the floor and flat
    elsewhere.  The Jacobian is +inf on plateaus.
    """

    t_grid: np.ndarray
    p_grid: np.ndarray
    jacobian: np.ndarray
    omega: np.ndarray
    energy: float

    @property
    def floor(self) -> float:
        return FLOOR_RATIO * float(np.max(self.omega))


def scaled_time_map(waveform: ControlWaveform, n_samples: int) -> MonotoneMap:
    """Cumulative-energy map p(t) on a uniform time grid over the window."""
    if n_samples < 2:
        raise ValueError(f"need at least 2 samples, got {n_samples}")
    t = np.linspace(waveform.t_window[0], waveform.t_window[1], n_samples)
    om = waveform.omega(t)
    intensity = om ** 2
    cum = np.empty(n_samples)
    cum[0] = 0.0
    np.cumsum(0.5 * (intensity[1:] + intensity[:-1]) * np.diff(t), out=cum[1:])
    total = cum[-1]
    if not (total > 0):
        raise ZeroEnergyWaveform("control waveform carries no energy on the window")
    p = cum / total
    p[-1] = 1.0
    floor2 = (FLOOR_RATIO * np.max(om)) ** 2
    jac = np.full(n_samples, np.inf)
    live = intensity > floor2
    np.divide(total, intensity, out=jac, where=live)
    return MonotoneMap(t_grid=t, p_grid=p, jacobian=jac, omega=om, energy=float(total))


def invert_scaled_time(map: MonotoneMap, p) -> np.ndarray:
    """Smallest t with p(t) = p (left edge of any plateau)."""
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    pv = np.atleast_1d(p)
    if np.any(pv < 0) or np.any(pv > 1):
        raise OutOfRange(f"scaled time must lie in [0, 1], got range "
                         f"[{pv.min()}, {pv.max()}]")
    idx = np.searchsorted(map.p_grid, pv, side="left")
    idx = np.minimum(idx, map.p_grid.size - 1)
    t = np.empty_like(pv)
    exact = map.p_grid[idx] == pv
    t[exact] = map.t_grid[idx[exact]]
    interp = ~exact
    if np.any(interp):
        hi = idx[interp]
        lo = hi - 1
        dpseg = map.p_grid[hi] - map.p_grid[lo]
        frac = (pv[interp] - map.p_grid[lo]) / dpseg
        t[interp] = map.t_grid[lo] + frac * (map.t_grid[hi] - map.t_grid[lo])
    return float(t[0]) if scalar else t


@dataclass(frozen=True, eq=False)
class NormalizedFields:
    """Frame-transform output: fields on the image p-samples of the t-grid."""

    p_samples: np.ndarray
    a_s: np.ndarray
    a_a_dag: np.ndarray
    s: np.ndarray | None


@dataclass(frozen=True, eq=False)
class RawFields:
    """Inverse-transform output: fields on the time samples t(p)."""

    t_samples: np.ndarray
    e_s: np.ndarray
    e_a_dag: np.ndarray
    s: np.ndarray | None


def _check_rows(name, arr, n_t):
    if arr is not None and arr.shape[-1] != n_t:
        raise GridMismatch(f"{name} has {arr.shape[-1]} samples, map has {n_t}")


def _phases(couplings: DerivedCouplings, p, z):
    phi_s = couplings.stark * p + couplings.phase_s * z
    phi_a = couplings.stark * p - couplings.phase_a * z
    return np.exp(1j * phi_s), np.exp(1j * phi_a)


def to_normalized_frame(
    e_s,
    e_a_dag,
    s,
    waveform: ControlWaveform,
    couplings: DerivedCouplings,
    map: MonotoneMap | None = None,
    z=0.0,
    p_ref: float = 1.0,
) -> NormalizedFields:
    """Transform raw-frame fields to the flux-preserving scaled-time frame.

    `e_s` and `e_a_dag` are time profiles on the map's time grid, either 1-D
    or stacked rows (one per z value, with `z` an array of matching length).
    `s` is a spinwave profile at the time slice p = p_ref (any shape, phased
    by `z` broadcast), or a raster with time along the last axis.  Output
    light fields live on the p-samples p(t_i); points where the control is
    below the floor are zeroed.
    """
    e_s = None if e_s is None else np.asarray(e_s, dtype=complex)
    e_a_dag = None if e_a_dag is None else np.asarray(e_a_dag, dtype=complex)
    ref = e_s if e_s is not None else e_a_dag
    if ref is None:
        raise GridMismatch("at least one light field is required")
    if map is None:
        map = scaled_time_map(waveform, ref.shape[-1])
    n_t = map.t_grid.size
    _check_rows("e_s", e_s, n_t)
    _check_rows("e_a_dag", e_a_dag, n_t)
    if e_s is None:
        e_s = np.zeros_like(e_a_dag)
    if e_a_dag is None:
        e_a_dag = np.zeros_like(e_s)

    z = np.asarray(z, dtype=float)
    p = map.p_grid
    om = map.omega
    live = om > map.floor
    # a = sqrt(W) * E / Omega on live points (Omega real, dt/dp = W/Omega^2)
    scale = np.zeros(n_t)
    scale[live] = np.sqrt(map.energy) / om[live]
    ph_s, ph_a = _phases(couplings, p, z[..., None] if z.ndim else z)
    a_s = e_s * scale * ph_s
    a_a = e_a_dag * scale * ph_a

    s_norm = None
    if s is not None:
        s = np.asarray(s, dtype=complex)
        if s.ndim >= 1 and s.shape[-1] == n_t and s.ndim > z.ndim:
            ph = _phases(couplings, p, z[..., None] if z.ndim else z)[0]
            s_norm = s * ph
        else:
            ph = _phases(couplings, p_ref, z)[0]
            s_norm = s * ph
    return NormalizedFields(p_samples=p, a_s=a_s, a_a_dag=a_a, s=s_norm)


def from_normalized_frame(
    a_s,
    a_a_dag,
    s,
    waveform: ControlWaveform,
    couplings: DerivedCouplings,
    map: MonotoneMap | None = None,
    z=0.0,
    p_ref: float = 1.0,
) -> RawFields:
    """Invert `to_normalized_frame` back to raw-frame fields.

    Inputs live on the map's p-samples.  Raises DivisionNearZeroControl if a
    light field is supported where the control is below the floor, since
    those samples are not invertible.
    """
    a_s = None if a_s is None else np.asarray(a_s, dtype=complex)
    a_a_dag = None if a_a_dag is None else np.asarray(a_a_dag, dtype=complex)
    ref = a_s if a_s is not None else a_a_dag
    if ref is None:
        raise GridMismatch("at least one light field is required")
    if map is None:
        map = scaled_time_map(waveform, ref.shape[-1])
    n_t = map.t_grid.size
    _check_rows("a_s", a_s, n_t)
    _check_rows("a_a_dag", a_a_dag, n_t)
    if a_s is None:
        a_s = np.zeros_like(a_a_dag)
    if a_a_dag is None:
        a_a_dag = np.zeros_like(a_s)

    om = map.omega
    live = om > map.floor
    for name, arr in (("a_s", a_s), ("a_a_dag", a_a_dag)):
        mags = np.abs(arr)
        tol = SUPPORT_RATIO * max(float(mags.max()), 1.0)
        if np.any(mags[..., ~live] > tol):
            raise DivisionNearZeroControl(
                f"{name} is supported where the control amplitude is below "
                "the floor; those samples cannot be represented in the raw frame"
            )

    z = np.asarray(z, dtype=float)
    p = map.p_grid
    ph_s, ph_a = _phases(couplings, p, z[..., None] if z.ndim else z)
    scale = np.where(live, om / np.sqrt(map.energy), 0.0)
    e_s = a_s * scale * np.conj(ph_s)
    e_a = a_a_dag * scale * np.conj(ph_a)

    s_raw = None
    if s is not None:
        s = np.asarray(s, dtype=complex)
        if s.ndim >= 1 and s.shape[-1] == n_t and s.ndim > z.ndim:
            ph = _phases(couplings, p, z[..., None] if z.ndim else z)[0]
            s_raw = s * np.conj(ph)
        else:
            ph = _phases(couplings, p_ref, z)[0]
            s_raw = s * np.conj(ph)
    return RawFields(t_samples=map.t_grid, e_s=e_s, e_a_dag=e_a, s=s_raw)


def resample_to_uniform(p_samples: np.ndarray, values: np.ndarray, n_p: int) -> np.ndarray:
    """Linearly resample values from monotone p-samples onto linspace(0, 1, n_p).

    Plateau duplicates keep their first occurrence (left-edge convention).
    """
    p_samples = np.asarray(p_samples, dtype=float)
    values = np.asarray(values)
    keep = np.empty(p_samples.size, dtype=bool)
    keep[0] = True
    np.greater(p_samples[1:], p_samples[:-1], out=keep[1:])
    ps = p_samples[keep]
    vs = values[..., keep]
    target = np.linspace(0.0, 1.0, n_p)
    if np.iscomplexobj(vs):
        re = np.interp(target, ps, vs.real) if vs.ndim == 1 else None
        if vs.ndim == 1:
            return re + 1j * np.interp(target, ps, vs.imag)
        out = np.empty(vs.shape[:-1] + (n_p,), dtype=complex)
        for idx in np.ndindex(vs.shape[:-1]):
            out[idx] = np.interp(target, ps, vs[idx].real) + 1j * np.interp(
                target, ps, vs[idx].imag
            )
        return out
    if vs.ndim == 1:
        return np.interp(target, ps, vs)
    out = np.empty(vs.shape[:-1] + (n_p,), dtype=float)
    for idx in np.ndindex(vs.shape[:-1]):
        out[idx] = np.interp(target, ps, vs[idx])
    return out


def flux(values: np.ndarray, axis_samples: np.ndarray) -> float:
    """Quadrature energy integral of |values|^2 over its sample axis."""
    return float(trapezoid(np.abs(values) ** 2, axis_samples))
