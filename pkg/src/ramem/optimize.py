"""Differential-evolution search over control-waveform parameters.

Classic DE/rand/1/bin with reflection at the bounds: per target, a mutant
x_r1 + F (x_r2 - x_r3) from three distinct partners, binomial crossover
with one forced coordinate, and greedy selection applied after a full
generation so the run is deterministic for a given seed.  The objective is
maximized; anything non-finite loses every comparison.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadConfig, RamemError
from .model import PhysicalParams, SignalPulse, ControlWaveform, make_waveform

log = logging.getLogger(__name__)

STALL = "stall"
MAX_GENERATIONS = "max_generations"


@dataclass(frozen=True)
class DEConfig:
    """Optimizer settings; bounds is a sequence of (lo, hi) per parameter."""

    bounds: tuple
    population: int = 24
    generations: int = 60
    f_weight: float = 0.7
    cr: float = 0.9
    seed: int = 0
    stall_tol: float = 1e-4
    stall_window: int = 8

    def __post_init__(self):
        if self.population < 4:
            raise BadConfig("population must be at least 4 (mutation needs "
                            "3 distinct partners plus the target)")
        if len(self.bounds) == 0:
            raise BadConfig("bounds must not be empty")
        for lo, hi in self.bounds:
            if not (lo < hi):
                raise BadConfig(f"bad bound ({lo}, {hi}): need lo < hi")
        if not (0 < self.f_weight <= 2):
            raise BadConfig(f"differential weight must lie in (0, 2], got {self.f_weight}")
        if not (0 <= self.cr <= 1):
            raise BadConfig(f"crossover rate must lie in [0, 1], got {self.cr}")
        if self.generations < 1:
            raise BadConfig("need at least one generation")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_eta: float
    best_epsilon: float
    mean_eta: float


@dataclass(frozen=True, eq=False)
class DEResult:
    """Best parameters plus the per-generation (eta, epsilon) trace."""

    best_params: np.ndarray
    best_eta: float
    best_epsilon: float
    trace: tuple
    evaluations: int
    terminated_by: str


def _reflect(v: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    out = v.copy()
    for _ in range(64):
        below = out < lo
        above = out > hi
        if not (below.any() or above.any()):
            return out
        out = np.where(below, 2 * lo - out, out)
        out = np.where(above, 2 * hi - out, out)
    return np.clip(out, lo, hi)


def _call_objective(objective, x):
    value = objective(x)
    if isinstance(value, tuple):
        fit, eps = value
    else:
        fit, eps = value, math.nan
    fit = float(fit)
    if math.isnan(fit):
        fit = -math.inf
    return fit, float(eps)


def de_optimize(objective, config: DEConfig) -> DEResult:
    """Maximize `objective` over the bounded box with DE/rand/1/bin.

    The objective may return a scalar fitness or an (eta, epsilon) pair;
    epsilon is carried along as an auxiliary for the trace.  All random
    draws happen on the coordinator in a fixed order, so the result is
    fully reproducible from the seed.
    """
    rng = np.random.default_rng(config.seed)
    lo = np.array([b[0] for b in config.bounds], dtype=float)
    hi = np.array([b[1] for b in config.bounds], dtype=float)
    dim = lo.size
    n_pop = config.population

    pop = lo + rng.random((n_pop, dim)) * (hi - lo)
    fit = np.empty(n_pop)
    aux = np.empty(n_pop)
    for i in range(n_pop):
        fit[i], aux[i] = _call_objective(objective, pop[i].copy())
    evaluations = n_pop

    def record(gen):
        best = int(np.argmax(fit))
        finite = fit[np.isfinite(fit)]
        mean_eta = float(finite.mean()) if finite.size else -math.inf
        return GenerationRecord(gen, float(fit[best]), float(aux[best]), mean_eta)

    trace = [record(0)]
    terminated_by = MAX_GENERATIONS
    generations_run = 0
    for gen in range(1, config.generations + 1):
        trials = np.empty_like(pop)
        for i in range(n_pop):
            pool = np.delete(np.arange(n_pop), i)
            r1, r2, r3 = rng.choice(pool, size=3, replace=False)
            mutant = pop[r1] + config.f_weight * (pop[r2] - pop[r3])
            mutant = _reflect(mutant, lo, hi)
            cross = rng.random(dim) < config.cr
            cross[rng.integers(dim)] = True
            trials[i] = np.where(cross, mutant, pop[i])
        # full-generation barrier, then greedy selection
        for i in range(n_pop):
            f_t, a_t = _call_objective(objective, trials[i].copy())
            if f_t >= fit[i]:
                pop[i] = trials[i]
                fit[i] = f_t
                aux[i] = a_t
        evaluations += n_pop
        generations_run = gen
        trace.append(record(gen))
        if gen >= config.stall_window:
            then = trace[gen - config.stall_window].best_eta
            now = trace[gen].best_eta
            if math.isfinite(then) and math.isfinite(now):
                if now - then < config.stall_tol * max(abs(then), 1e-30):
                    terminated_by = STALL
                    break

    best = int(np.argmax(fit))
    return DEResult(
        best_params=pop[best].copy(),
        best_eta=float(fit[best]),
        best_epsilon=float(aux[best]),
        trace=tuple(trace),
        evaluations=evaluations,
        terminated_by=terminated_by,
    )


GAUSSIAN_CT = "gaussian_ct"
SPLINE_N = "spline_n"


@dataclass(frozen=True, eq=False)
class MemoryObjectiveContext:
    """Fixed configuration of the memory objective.

    The write waveform is built from the searched parameters; everything
    else (physics, signal, read control, grid, mode, direction) is pinned.
    The write/read energies come from `physical`, so the search explores
    pulse shape at constant pulse energy.
    """

    physical: PhysicalParams
    signal: SignalPulse
    read_waveform: ControlWaveform
    t_window: tuple
    grid: tuple
    mode: str
    direction: str
    noise_floor: float = 0.0


def memory_objective(params_vec, parametrization: str, ctx: MemoryObjectiveContext):
    """Memory efficiency (and noise ratio) of a candidate write waveform.

    Returns (eta_total, epsilon); invalid configurations map to
    (-inf, nan) with the reason logged.
    """
    from .solver import full_memory

    params_vec = np.asarray(params_vec, dtype=float)
    try:
        if parametrization == GAUSSIAN_CT:
            center, duration = params_vec
            wave = make_waveform(
                "gaussian",
                dict(center=float(center), duration=float(duration), amplitude=1.0),
                ctx.t_window,
            )
        elif parametrization == SPLINE_N:
            if params_vec.size < 4:
                raise BadConfig("spline parametrization needs at least 4 knots")
            knots = np.linspace(ctx.t_window[0], ctx.t_window[1], params_vec.size)
            wave = make_waveform(
                "spline", dict(times=knots, amplitudes=params_vec), ctx.t_window
            )
        else:
            raise BadConfig(f"unknown parametrization {parametrization!r}")
        result = full_memory(
            ctx.physical,
            wave,
            ctx.read_waveform,
            ctx.signal,
            ctx.grid,
            mode=ctx.mode,
            direction=ctx.direction,
            noise_floor=ctx.noise_floor,
        )
    except RamemError as exc:
        log.debug("objective at %s invalid: %s", params_vec, exc)
        return (-math.inf, math.nan)
    return (result.eta_total, result.epsilon)


def make_memory_objective(parametrization: str, ctx: MemoryObjectiveContext):
    """Bind the parametrization and context into a DE-ready callable."""
    def objective(x):
        return memory_objective(x, parametrization, ctx)
    return objective
