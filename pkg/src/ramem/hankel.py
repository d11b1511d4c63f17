"""Bessel-kernel transforms and closed-form field solutions.

The ideal write/read dynamics are solved in closed form by convolutions
against the entire kernel J0(2 g sqrt(x y)); with the lag-kernel transform

    H_m{f}(y) = g * int_0^X j_m(X - x', y) f(x') dx',
    j_m(x, y) = sqrt(y/x)^m J_m(2 g sqrt(x y)),

the full solution on the unit square is

    s(z, p) = +H0{b_in}(z) + s_in(z) - H1{s_in}(p)
    b(z, p) = -H0{s_in}(p) + b_in(p) - H1{b_in}(z)

The minus sign on the retrieved-field term follows from the equations of
motion (dz b = -g s forces b below zero next to the input face for a
positive spinwave); it is invisible in any intensity but required for
field-level agreement with the marching solver.

This module is the analytic oracle for the marching solver: everything is
evaluated by quadrature of the kernels, never by time stepping.  It also
provides the spinwave/light Hankel spectra, reversal utilities, and the
power-iteration construction of the maximum-efficiency input mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve
from scipy.special import j0 as _J0, j1 as _J1

from .errors import GridMismatch, NoConvergence

# below this value of u = 2 g sqrt(x y) the m = 1 kernel uses its power
# series; the removable x -> 0 singularity is then exact
SERIES_CUTOFF = 1e-4


def bessel_kernel(m: int, x, y, g: float):
    """Modified Bessel kernel j_m(x, y) for m in {0, 1}.

    j_0(x, y) = J0(2 g sqrt(x y)); j_1(x, y) = sqrt(y/x) J1(2 g sqrt(x y)),
    with the x -> 0 limit g * y taken by series.  Broadcasts over x, y.
    """
    if m not in (0, 1):
        raise ValueError(f"kernel order must be 0 or 1, got {m}")
    scalar = np.ndim(x) == 0 and np.ndim(y) == 0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise ValueError("kernel arguments must be non-negative")
    u = 2.0 * g * np.sqrt(x * y)
    if m == 0:
        out = _J0(u)
        return float(out) if scalar else out
    xb, yb = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    u = np.atleast_1d(u)
    small = u < SERIES_CUTOFF
    out = np.empty(u.shape, dtype=float)
    # sqrt(y/x) J1(u) = g y (1 - u^2/8 + u^4/192 - ...)
    us = u[small]
    out[small] = g * yb[small] * (1.0 - us ** 2 / 8.0 + us ** 4 / 192.0)
    big = ~small
    with np.errstate(divide="ignore", invalid="ignore"):
        out[big] = np.sqrt(yb[big] / xb[big]) * _J1(u[big])
    return float(out[0]) if scalar else out


def modified_hankel(m: int, f, x_grid, y_grid, g: float) -> np.ndarray:
    """Lag-kernel transform H_m{f}(y) = g * int_0^X j_m(X - x', y) f(x') dx'.

    `f` is sampled on x_grid covering [0, X]; the integral runs over the
    whole sampled domain and is evaluated by trapezoid for each y.
    """
    f = np.asarray(f)
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    if f.shape != x_grid.shape:
        raise GridMismatch("f must be sampled on x_grid")
    lag = x_grid[-1] - x_grid
    kern = bessel_kernel(m, lag[None, :], y_grid[:, None], g)
    w = _trapezoid_weights(x_grid)
    return g * (kern @ (w * f))


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty(x.size)
    dx = np.diff(x)
    w[0] = dx[0] / 2
    w[-1] = dx[-1] / 2
    w[1:-1] = (dx[1:] + dx[:-1]) / 2
    return w


def _uniform_spacing(grid: np.ndarray, name: str) -> float:
    d = np.diff(grid)
    if grid.size < 2 or not np.allclose(d, d[0], rtol=1e-10, atol=1e-14):
        raise GridMismatch(f"{name} must be uniform")
    return float(d[0])


def _causal_conv(kern: np.ndarray, vec: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Trapezoid of int_0^{x_i} K(x_i - x') v(x') dx' along `axis`.

    `kern` holds K sampled on the lag grid along `axis`; `vec` is v on the
    same grid.  Uses an FFT convolution plus endpoint corrections.
    """
    n = vec.size
    shape = [1, 1]
    shape[axis] = n
    v = vec.reshape(shape)
    full = fftconvolve(kern, v, mode="full", axes=axis)
    sl = [slice(None), slice(None)]
    sl[axis] = slice(0, n)
    out = full[tuple(sl)] * h
    # trapezoid endpoint halves: subtract h/2 (K_i v_0 + K_0 v_i)
    k0 = [slice(None), slice(None)]
    k0[axis] = slice(0, 1)
    out -= 0.5 * h * (kern * vec[0] + kern[tuple(k0)] * v)
    return out


def analytic_fields(b_in, s_in, g: float, grid) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ideal-mode solution (b, s) on the unit-square grid.

    `b_in` is the bright-mode input over p, `s_in` the initial spinwave
    over z; grid = (n_z, n_p).  Returns rasters indexed [iz, ip].
    """
    n_z, n_p = grid
    z = np.linspace(0.0, 1.0, n_z)
    p = np.linspace(0.0, 1.0, n_p)
    b_vec = np.zeros(n_p, dtype=complex) if b_in is None else np.asarray(b_in, dtype=complex)
    s_vec = np.zeros(n_z, dtype=complex) if s_in is None else np.asarray(s_in, dtype=complex)
    if b_vec.shape != (n_p,) or s_vec.shape != (n_z,):
        raise GridMismatch("inputs must match the stated grids")
    if g == 0:
        return np.broadcast_to(b_vec, (n_z, n_p)).copy(), \
            np.broadcast_to(s_vec[:, None], (n_z, n_p)).copy()
    dz = _uniform_spacing(z, "z grid")
    dp = _uniform_spacing(p, "p grid")

    # s = g * conv_p[J0(2g sqrt(lag_p z)), b_in] + s_in - g * conv_z[j1(lag_z, p), s_in]
    k0_zp = _J0(2.0 * g * np.sqrt(np.outer(z, p)))        # [z, lag_p]
    s_raster = g * _causal_conv(k0_zp, b_vec, axis=1, h=dp)
    s_raster += s_vec[:, None]
    k1_zp = bessel_kernel(1, z[:, None], p[None, :], g)   # [lag_z, p]
    s_raster -= g * _causal_conv(k1_zp, s_vec, axis=0, h=dz)

    # b = -g * conv_z[J0(2g sqrt(lag_z p)), s_in] + b_in - g * conv_p[j1(lag_p, z), b_in]
    b_raster = -g * _causal_conv(k0_zp, s_vec, axis=0, h=dz)
    b_raster += b_vec[None, :]
    k1_pz = bessel_kernel(1, p[None, :], z[:, None], g)   # [z, lag_p]
    b_raster -= g * _causal_conv(k1_pz, b_vec, axis=1, h=dp)
    return b_raster, s_raster


def ideal_write_profile(b_in, g: float, z_grid, p_grid) -> np.ndarray:
    """Stored spinwave s(z, 1) for input b_in with an empty initial spinwave."""
    b_in = np.asarray(b_in, dtype=complex)
    kern = g * _J0(2.0 * g * np.sqrt(np.outer(z_grid, 1.0 - p_grid)))
    return kern @ (_trapezoid_weights(p_grid) * b_in)


def ideal_read_profile(s_init, g: float, z_grid, p_grid) -> np.ndarray:
    """Retrieved bright field b(1, p) for initial spinwave s_init, no input.

    Carries the retrieval sign of the equations of motion; intensities are
    unaffected by it.
    """
    s_init = np.asarray(s_init, dtype=complex)
    kern = -g * _J0(2.0 * g * np.sqrt(np.outer(p_grid, 1.0 - z_grid)))
    return kern @ (_trapezoid_weights(z_grid) * s_init)


AXIS_SPATIAL = "spatial_kz"
AXIS_TEMPORAL = "temporal_kp"


@dataclass(frozen=True, eq=False)
class HankelSpectrum:
    """Product-kernel Bessel spectrum of a field slice."""

    k_grid: np.ndarray
    values: np.ndarray
    axis: str
    g: float


def hankel_spectrum(slice_values, axis: str, g: float, k_grid, x_grid=None) -> HankelSpectrum:
    """Spectrum sigma(k) = int_0^1 J0(2 g sqrt(k x)) f(x) dx by quadrature.

    The domain is truncated to the unit interval where the fields live.
    With this normalization the ideal-storage shift relation reads
    sigma(k, p=1) = (1/g) b_in(1 - k) in the strong-coupling limit.
    """
    if axis not in (AXIS_SPATIAL, AXIS_TEMPORAL):
        raise ValueError(f"unknown spectrum axis {axis!r}")
    f = np.asarray(slice_values, dtype=complex)
    x = np.linspace(0.0, 1.0, f.size) if x_grid is None else np.asarray(x_grid, dtype=float)
    if x.shape != f.shape:
        raise GridMismatch("slice and x_grid shapes disagree")
    k = np.asarray(k_grid, dtype=float)
    if np.any(k < 0):
        raise ValueError("spectral coordinates must be non-negative")
    kern = _J0(2.0 * g * np.sqrt(np.outer(k, x)))
    vals = kern @ (_trapezoid_weights(x) * f)
    return HankelSpectrum(k_grid=k, values=vals, axis=axis, g=g)


def time_reversed_input(profile) -> np.ndarray:
    """Grid reflection f(1 - x) of a profile sampled on a uniform grid."""
    return np.asarray(profile)[::-1].copy()


@dataclass(frozen=True, eq=False)
class PowerIterationResult:
    """Fixed-point input mode of the write -> read -> reverse composition."""

    mode: np.ndarray
    eta: float
    etas: np.ndarray
    iterations: int


def optimal_mode_power_iteration(
    g: float,
    grid,
    n_iter: int = 200,
    direction: str = "backward",
    tol: float = 1e-6,
) -> PowerIterationResult:
    """Maximum-efficiency input mode by power iteration from a flat start.

    One backward cycle applies write, spatial reflection, read, and time
    reversal; the resulting map is self-adjoint positive in the trapezoid
    inner product, so the efficiency trace is non-decreasing.  The forward
    variant iterates the adjoint composition to keep the same guarantee.
    Raises NoConvergence (carrying the last iterate) if the efficiency
    still moves more than `tol` after n_iter cycles.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be at least 1")
    if g <= 0:
        raise ValueError("coupling must be positive")
    n_z, n_p = grid
    z = np.linspace(0.0, 1.0, n_z)
    p = np.linspace(0.0, 1.0, n_p)
    w_z = _trapezoid_weights(z)
    w_p = _trapezoid_weights(p)
    write_k = g * _J0(2.0 * g * np.sqrt(np.outer(z, 1.0 - p)))
    read_k = g * _J0(2.0 * g * np.sqrt(np.outer(p, 1.0 - z)))
    backward = direction == "backward"

    def cycle(b):
        s = write_k @ (w_p * b)
        s_r = s[::-1] if backward else s
        return read_k @ (w_z * s_r)

    def cycle_adjoint(v):
        u = read_k.T @ (w_p * v)
        u_r = u[::-1] if backward else u
        return write_k.T @ (w_z * u_r)

    b = np.ones(n_p)
    b = b / np.sqrt(np.sum(w_p * b ** 2))
    etas = []
    delta = np.inf
    for it in range(n_iter):
        out = cycle(b)
        eta = float(np.sum(w_p * np.abs(out) ** 2))
        etas.append(eta)
        if backward:
            nxt = out[::-1]
        else:
            nxt = cycle_adjoint(out)
        b = nxt / np.sqrt(np.sum(w_p * np.abs(nxt) ** 2))
        if it > 0:
            delta = abs(etas[-1] - etas[-2])
            if delta <= tol:
                break
    result = PowerIterationResult(
        mode=b, eta=etas[-1], etas=np.asarray(etas), iterations=len(etas)
    )
    if delta > tol:
        raise NoConvergence(
            f"power iteration moved {delta:.3e} > {tol:.1e} after {n_iter} cycles",
            last_result=result,
        )
    return result
