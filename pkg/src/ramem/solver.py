"""Coupled light-spinwave propagation in the scaled-time frame.

The equations are hyperbolic in characteristic coordinates: the light
fields obey z-ODEs sourced by the spinwave, and the spinwave obeys a
p-ODE sourced by the light, so there is no CFL coupling between the two
grid directions.  Marching uses an explicit midpoint (predictor-corrector)
step in p with the z-ODEs integrated by cumulative trapezoid at each
level; both directions are second-order accurate.

Two dynamical modes are supported:

  full_fwm     - signal and anti-Stokes conjugate evolve separately with
                 the wavevector-mismatch phases (four-wave mixing active),
                     dz a_s  = -g_s s
                     dz a_a+ = -g_a s exp(-i dk z)
                     dp s    =  g_s a_s - g_a a_a+ exp(+i dk z)
  ideal_bright - the bright combination b couples to s with strength g and
                 the anti-Stokes correction is dropped,
                     dz b = -g s,   dp s = g b

A raw-frame (z, t) solver for the same physics, including the detuning
phase terms and the AC-Stark shift, backs the frame-equivalence tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import (
    DegenerateInput,
    GridMismatch,
    GridTooCoarse,
    ModeMismatch,
    NonFiniteField,
)
from .model import ControlWaveform, PhysicalParams, SignalPulse, derive_couplings
from .scaledtime import (
    from_normalized_frame,
    resample_to_uniform,
    scaled_time_map,
    to_normalized_frame,
)

MODE_FULL = "full_fwm"
MODE_IDEAL = "ideal_bright"
MODES = (MODE_FULL, MODE_IDEAL)

FORWARD = "forward"
BACKWARD = "backward"
DIRECTIONS = (FORWARD, BACKWARD)

MIN_GRID = 32
BLOWUP_THRESHOLD = 1e12


def _cumtrapz(f: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative trapezoid of f from the first sample, same length as f."""
    out = np.empty_like(f)
    out[0] = 0.0
    np.cumsum(0.5 * (f[1:] + f[:-1]), out=out[1:])
    out[1:] *= dx
    return out


def _check_grid(n_z: int, n_p: int):
    if n_z < MIN_GRID or n_p < MIN_GRID:
        raise GridTooCoarse(f"grid {n_z}x{n_p} below minimum {MIN_GRID}x{MIN_GRID}")


def _check_finite(s: np.ndarray, k: int):
    m = float(np.max(np.abs(s)))
    if not math.isfinite(m) or m > BLOWUP_THRESHOLD:
        raise NonFiniteField(
            f"field magnitude {m:.3e} exceeded {BLOWUP_THRESHOLD:.0e} "
            f"at p index {k}", p_index=k,
        )


@dataclass(frozen=True, eq=False)
class FieldEvolution:
    """Fields on the (z, p) unit-square grid, indexed [iz, ip].

    In ideal mode `a_s` aliases the bright mode and `a_a_dag` is zero.
    Boundary rows are stored exactly as supplied: a_s[0, :] is the input,
    s[:, 0] the initial spinwave.
    """

    z_grid: np.ndarray
    p_grid: np.ndarray
    a_s: np.ndarray
    a_a_dag: np.ndarray
    s: np.ndarray
    b: np.ndarray
    mode: str

    @property
    def a_s_out(self) -> np.ndarray:
        return self.a_s[-1, :]

    @property
    def a_a_out(self) -> np.ndarray:
        return self.a_a_dag[-1, :]

    @property
    def b_out(self) -> np.ndarray:
        return self.b[-1, :]


def solve_normalized(couplings, a_s_in, a_a_in, s_in, grid, mode=MODE_FULL) -> FieldEvolution:
    """Integrate the scaled-frame equations with boundary data a(0, p), s(z, 0)."""
    if mode not in MODES:
        raise ModeMismatch(f"unknown mode {mode!r}")
    n_z, n_p = grid
    _check_grid(n_z, n_p)
    a_in = np.zeros(n_p, dtype=complex) if a_s_in is None else np.asarray(a_s_in, dtype=complex)
    aa_in = np.zeros(n_p, dtype=complex) if a_a_in is None else np.asarray(a_a_in, dtype=complex)
    s0 = np.zeros(n_z, dtype=complex) if s_in is None else np.asarray(s_in, dtype=complex)
    if a_in.shape != (n_p,) or aa_in.shape != (n_p,):
        raise GridMismatch("optical inputs must be sampled on the p grid")
    if s0.shape != (n_z,):
        raise GridMismatch("initial spinwave must be sampled on the z grid")

    z = np.linspace(0.0, 1.0, n_z)
    p = np.linspace(0.0, 1.0, n_p)
    dz = z[1] - z[0]
    dp = p[1] - p[0]

    s_grid = np.empty((n_z, n_p), dtype=complex)
    as_grid = np.empty((n_z, n_p), dtype=complex)

    if mode == MODE_IDEAL:
        if np.any(np.abs(aa_in) > 0):
            raise ModeMismatch(
                "ideal_bright mode cannot carry a separate anti-Stokes input"
            )
        g = couplings.g
        s_cur = s0.copy()
        for k in range(n_p):
            b_k = a_in[k] - g * _cumtrapz(s_cur, dz)
            s_grid[:, k] = s_cur
            as_grid[:, k] = b_k
            if k == n_p - 1:
                break
            s_half = s_cur + (0.5 * dp * g) * b_k
            b_half = 0.5 * (a_in[k] + a_in[k + 1]) - g * _cumtrapz(s_half, dz)
            s_cur = s_cur + (dp * g) * b_half
            _check_finite(s_cur, k + 1)
        aa_grid = np.zeros((n_z, n_p), dtype=complex)
        return FieldEvolution(z, p, as_grid, aa_grid, s_grid, as_grid, MODE_IDEAL)

    g_s, g_a, dk = couplings.g_s, couplings.g_a, couplings.delta_k
    ph_m = np.exp(-1j * dk * z)   # exp(-i dk z), multiplies the a_a+ source
    ph_p = np.conj(ph_m)
    aa_grid = np.empty((n_z, n_p), dtype=complex)
    s_cur = s0.copy()
    for k in range(n_p):
        as_k = a_in[k] - g_s * _cumtrapz(s_cur, dz)
        aa_k = aa_in[k] - g_a * _cumtrapz(s_cur * ph_m, dz)
        s_grid[:, k] = s_cur
        as_grid[:, k] = as_k
        aa_grid[:, k] = aa_k
        if k == n_p - 1:
            break
        rhs = g_s * as_k - g_a * aa_k * ph_p
        s_half = s_cur + 0.5 * dp * rhs
        as_h = 0.5 * (a_in[k] + a_in[k + 1]) - g_s * _cumtrapz(s_half, dz)
        aa_h = 0.5 * (aa_in[k] + aa_in[k + 1]) - g_a * _cumtrapz(s_half * ph_m, dz)
        s_cur = s_cur + dp * (g_s * as_h - g_a * aa_h * ph_p)
        _check_finite(s_cur, k + 1)
    b_grid = (g_s * as_grid - g_a * aa_grid * ph_p[:, None]) / couplings.g
    return FieldEvolution(z, p, as_grid, aa_grid, s_grid, b_grid, MODE_FULL)


@dataclass(frozen=True, eq=False)
class WriteResult:
    """Write-stage observables; profile slices live on the stage grids."""

    s_w: np.ndarray
    leakage_field: np.ndarray
    anti_stokes_out: np.ndarray
    eta_w: float
    leak: float
    n_in: float
    evolution: FieldEvolution = field(repr=False, default=None)


@dataclass(frozen=True, eq=False)
class ReadResult:
    """Read-stage observables; `signal_out` is the signal channel at z = 1."""

    b_out: np.ndarray
    s_l: np.ndarray
    anti_stokes_out: np.ndarray
    signal_out: np.ndarray
    eta_r: float
    residual: float
    n_spin: float
    evolution: FieldEvolution = field(repr=False, default=None)


@dataclass(frozen=True, eq=False)
class MemoryResult:
    """Full write-store-read observables.

    Photon numbers are quadrature energies in the flux-preserving scaled
    frame.  `n_a` counts anti-Stokes output of both stages in full mode and
    is zero in ideal mode, where `n_a_estimate` still reports the
    spinwave-integral estimate.  eta_total = (n_r - n_a)/n_in,
    epsilon = n_a/n_r, mu1 = n_a/eta_total.
    """

    eta_w: float
    eta_r: float
    eta_total: float
    epsilon: float
    n_in: float
    n_r: float
    n_a: float
    n_a_estimate: float
    mu1: float
    write: WriteResult
    read: ReadResult
    retrieved_t: np.ndarray = field(repr=False, default=None)
    retrieved_envelope: np.ndarray = field(repr=False, default=None)


def write_stage(couplings, a_s_in, grid, mode=MODE_FULL) -> WriteResult:
    """Store an optical input (vacuum anti-Stokes, empty spinwave)."""
    n_z, n_p = grid
    a_in = np.asarray(a_s_in, dtype=complex)
    if a_in.shape != (n_p,):
        raise GridMismatch("input must be sampled on the p grid")
    p = np.linspace(0.0, 1.0, n_p)
    z = np.linspace(0.0, 1.0, n_z)
    n_in = float(trapezoid(np.abs(a_in) ** 2, p))
    if n_in <= 0:
        raise DegenerateInput("write input carries no energy")
    ev = solve_normalized(couplings, a_in, None, None, grid, mode)
    s_w = ev.s[:, -1]
    leakage = ev.b_out if mode == MODE_IDEAL else ev.a_s_out
    return WriteResult(
        s_w=s_w,
        leakage_field=leakage,
        anti_stokes_out=ev.a_a_out,
        eta_w=float(trapezoid(np.abs(s_w) ** 2, z)) / n_in,
        leak=float(trapezoid(np.abs(leakage) ** 2, p)) / n_in,
        n_in=n_in,
        evolution=ev,
    )


def read_stage(couplings, s_init, grid, mode=MODE_FULL, direction=BACKWARD) -> ReadResult:
    """Retrieve a stored spinwave with no optical input.

    Backward retrieval spatially reflects the spinwave before a
    forward-form solve; the reflection is exact on the uniform grid.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    n_z, n_p = grid
    s0 = np.asarray(s_init, dtype=complex)
    if s0.shape != (n_z,):
        raise GridMismatch("spinwave must be sampled on the z grid")
    z = np.linspace(0.0, 1.0, n_z)
    p = np.linspace(0.0, 1.0, n_p)
    n_spin = float(trapezoid(np.abs(s0) ** 2, z))
    if n_spin <= 0:
        raise DegenerateInput("read stage needs a nonzero stored spinwave")
    if direction == BACKWARD:
        s0 = s0[::-1]
    ev = solve_normalized(couplings, None, None, s0, grid, mode)
    s_l = ev.s[:, -1]
    return ReadResult(
        b_out=ev.b_out,
        s_l=s_l,
        anti_stokes_out=ev.a_a_out,
        signal_out=ev.a_s_out,
        eta_r=float(trapezoid(np.abs(ev.b_out) ** 2, p)) / n_spin,
        residual=float(trapezoid(np.abs(s_l) ** 2, z)) / n_spin,
        n_spin=n_spin,
        evolution=ev,
    )


def full_memory(
    params: PhysicalParams,
    write_waveform: ControlWaveform,
    read_waveform: ControlWaveform,
    signal: SignalPulse,
    grid,
    mode=MODE_FULL,
    direction=BACKWARD,
    noise_floor: float = 0.0,
) -> MemoryResult:
    """Run transform -> write -> lossless storage -> read -> inverse transform.

    The waveforms provide the control pulse *shapes*; their energies are
    rescaled to params.w_write / params.w_read, which carry the stage
    energies.  The signal is given in the raw frame on the write window's
    time grid and is transformed internally.

    `noise_floor` is a phenomenological spontaneous anti-Stokes energy per
    run, added to the stimulated n_a in full mode only (the mean-field
    equations emit nothing spontaneously); it enters eta_total, epsilon
    and mu1 exactly like measured noise.
    """
    from .fwm import anti_stokes_output

    n_z, n_p = grid
    couplings_w = derive_couplings(params, params.w_write)
    couplings_r = derive_couplings(params, params.w_read)
    wave_w = write_waveform.scaled(params.w_write)
    wave_r = read_waveform.scaled(params.w_read)

    map_w = scaled_time_map(wave_w, signal.t_grid.size)
    if not np.allclose(signal.t_grid, map_w.t_grid, atol=1e-12, rtol=0.0):
        raise GridMismatch("signal must be sampled on the write window's time grid")
    norm = to_normalized_frame(
        signal.envelope, None, None, wave_w, couplings_w, map=map_w, z=0.0
    )
    a_in = resample_to_uniform(norm.p_samples, norm.a_s, n_p)

    wr = write_stage(couplings_w, a_in, grid, mode)
    rd = read_stage(couplings_r, wr.s_w, grid, mode, direction)

    p = np.linspace(0.0, 1.0, n_p)
    n_in = wr.n_in
    n_r = float(trapezoid(np.abs(rd.signal_out) ** 2, p))
    if mode == MODE_FULL:
        n_a = noise_floor + float(
            trapezoid(np.abs(wr.anti_stokes_out) ** 2, p)
        ) + float(trapezoid(np.abs(rd.anti_stokes_out) ** 2, p))
    else:
        n_a = 0.0
    s_read_init = wr.s_w[::-1] if direction == BACKWARD else wr.s_w
    n_a_estimate = (
        abs(anti_stokes_output(wr.s_w, couplings_w.delta_k, couplings_w.g_a)) ** 2
        + abs(anti_stokes_output(s_read_init, couplings_r.delta_k, couplings_r.g_a)) ** 2
    )
    eta_total = (n_r - n_a) / n_in
    epsilon = n_a / n_r if n_r > 0 else math.inf
    mu1 = n_a / eta_total if eta_total > 0 else math.inf

    map_r = scaled_time_map(wave_r, n_p)
    b_on_map = np.interp(map_r.p_grid, p, rd.b_out.real) + 1j * np.interp(
        map_r.p_grid, p, rd.b_out.imag
    )
    # samples where the read control is below the floor carry no real-time
    # flux and are not representable in the raw frame
    b_on_map[map_r.omega <= map_r.floor] = 0.0
    raw = from_normalized_frame(
        b_on_map, None, None, wave_r, couplings_r, map=map_r, z=1.0
    )

    return MemoryResult(
        eta_w=wr.eta_w,
        eta_r=rd.eta_r,
        eta_total=eta_total,
        epsilon=epsilon,
        n_in=n_in,
        n_r=n_r,
        n_a=n_a,
        n_a_estimate=n_a_estimate,
        mu1=mu1,
        write=wr,
        read=rd,
        retrieved_t=raw.t_samples,
        retrieved_envelope=raw.e_s,
    )


@dataclass(frozen=True, eq=False)
class RawEvolution:
    """Raw-frame fields on a (z, t) grid, indexed [iz, it]."""

    z_grid: np.ndarray
    t_grid: np.ndarray
    e_s: np.ndarray
    e_a_dag: np.ndarray
    s: np.ndarray


def solve_raw(
    params: PhysicalParams,
    waveform: ControlWaveform,
    e_s_in,
    grid_zt,
) -> RawEvolution:
    """Integrate the co-moving (z, t) equations with detuning phase terms.

    The z-ODEs are solved with integrating factors for the self-phase
    rotations, so the scheme stays second order independent of how fast
    the optical phases wind.  Used to cross-check the scaled-frame solver.
    """
    n_z, n_t = grid_zt
    _check_grid(n_z, n_t)
    t = np.linspace(waveform.t_window[0], waveform.t_window[1], n_t)
    e_in = np.asarray(e_s_in, dtype=complex)
    if e_in.shape != (n_t,):
        raise GridMismatch("signal input must be sampled on the window time grid")
    z = np.linspace(0.0, 1.0, n_z)
    dz = z[1] - z[0]
    dt = t[1] - t[0]

    d = params.d
    root_d = math.sqrt(d)
    q_s = d / params.delta_s
    q_a = d / (params.delta_a + params.delta_hf)
    stark_rate = 1.0 / params.delta_s - 1.0 / params.delta_a
    c_s = root_d / params.delta_s
    c_a = root_d / params.delta_a

    rot_s = np.exp(1j * q_s * z)       # integrating factor for E_s
    rot_a = np.exp(-1j * q_a * z)      # integrating factor for E_a+
    om_grid = waveform.omega(t)

    def fields(s_vec, om, e_bound):
        es = (e_bound - (c_s * om) * _cumtrapz(s_vec * rot_s, dz)) / rot_s
        ea = (0.0 - (c_a * om) * _cumtrapz(s_vec * rot_a, dz)) / rot_a
        return es, ea

    def rhs(s_vec, om, es, ea):
        return root_d * om * (es / params.delta_s - ea / params.delta_a) \
            - 1j * stark_rate * om ** 2 * s_vec

    e_s_grid = np.empty((n_z, n_t), dtype=complex)
    e_a_grid = np.empty((n_z, n_t), dtype=complex)
    s_grid = np.empty((n_z, n_t), dtype=complex)
    s_cur = np.zeros(n_z, dtype=complex)
    for k in range(n_t):
        es_k, ea_k = fields(s_cur, om_grid[k], e_in[k])
        s_grid[:, k] = s_cur
        e_s_grid[:, k] = es_k
        e_a_grid[:, k] = ea_k
        if k == n_t - 1:
            break
        om_half = waveform.omega(t[k] + 0.5 * dt)
        e_half = 0.5 * (e_in[k] + e_in[k + 1])
        s_half = s_cur + 0.5 * dt * rhs(s_cur, om_grid[k], es_k, ea_k)
        es_h, ea_h = fields(s_half, om_half, e_half)
        s_cur = s_cur + dt * rhs(s_half, om_half, es_h, ea_h)
        _check_finite(s_cur, k + 1)
    return RawEvolution(z, t, e_s_grid, e_a_grid, s_grid)
