"""Broadband Raman-memory simulator with four-wave-mixing noise.

Integrates the coupled light-spinwave equations in the scaled-time frame,
cross-validates them against closed-form Bessel-kernel solutions, and
searches control-pulse waveforms that compact the stored spinwave to
maximize efficiency while suppressing four-wave-mixing noise.
"""

from .errors import (
    BadConfig,
    BadWaveformParams,
    CouplingDegenerate,
    DegenerateInput,
    DivisionNearZeroControl,
    GridMismatch,
    GridTooCoarse,
    ModeMismatch,
    NoConvergence,
    NonFiniteField,
    OutOfRange,
    ParseError,
    RamemError,
    ValidationError,
    ZeroEnergyWaveform,
)
from .model import (
    ControlWaveform,
    DerivedCouplings,
    PhysicalParams,
    SignalPulse,
    derive_couplings,
    gaussian_signal,
    make_waveform,
    square_signal,
)
from .scaledtime import (
    MonotoneMap,
    from_normalized_frame,
    invert_scaled_time,
    resample_to_uniform,
    scaled_time_map,
    to_normalized_frame,
)
from .solver import (
    BACKWARD,
    FORWARD,
    MODE_FULL,
    MODE_IDEAL,
    FieldEvolution,
    MemoryResult,
    ReadResult,
    WriteResult,
    full_memory,
    read_stage,
    solve_normalized,
    solve_raw,
    write_stage,
)
from .hankel import (
    HankelSpectrum,
    PowerIterationResult,
    analytic_fields,
    bessel_kernel,
    hankel_spectrum,
    ideal_read_profile,
    ideal_write_profile,
    modified_hankel,
    optimal_mode_power_iteration,
    time_reversed_input,
)
from .fwm import (
    NoiseReport,
    anti_stokes_output,
    fwm_gain_sweep,
    noise_metrics,
    support_width,
)
from .optimize import (
    DEConfig,
    DEResult,
    GAUSSIAN_CT,
    SPLINE_N,
    MemoryObjectiveContext,
    de_optimize,
    make_memory_objective,
    memory_objective,
)

__version__ = "0.1.0"
