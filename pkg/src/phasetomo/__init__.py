"""Phase-based sinogram alignment and iterative tomographic reconstruction.

The package recovers unknown per-angle detector shifts of projection data by
alternating a few iterations of an algebraic solver with shift estimates
read from the phase of low fractional-frequency spectral ratios, and ships
the surrounding toolkit: parallel-beam projector, SIRT and TV solvers,
misalignment/noise simulation, translation-aware metrics, a two-stage
volume pipeline, and a config-driven experiment runner.
"""

from .align import (
    AlignConfig,
    ShiftHistory,
    pba_estimate,
    pba_run,
    pm_run,
    projection_match,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    Report,
    load_config,
    run_experiment,
    sweep,
)
from .fourier import (
    DegenerateFrequencyError,
    dft_at,
    fractional_shift,
    freq_grid,
    phase_ratio_shift,
)
from .metrics import (
    RegisteredError,
    registered_error,
    registered_error_volume,
    shift_totals,
    sinogram_shift_of_translation,
    translate_image,
)
from .misalign import add_noise, apply_shifts, cc_misalign, random_shifts
from .phantoms import blob_volume, shapes_phantom, shepp_logan
from .pipeline3d import (
    cross_section,
    default_slice_subset,
    mass_align_x,
    pba3d,
    reconstruct_stack,
)
from .projector import (
    Geometry,
    ProjectionStack,
    Sinogram,
    adjoint,
    forward,
    forward3d,
    operator_sums,
)
from .recon import ReconConfig, residual, sirt_step, solve, tv_objective, tv_solve

__version__ = "0.1.0"

__all__ = [
    "AlignConfig",
    "ConfigError",
    "DegenerateFrequencyError",
    "ExperimentConfig",
    "Geometry",
    "ProjectionStack",
    "ReconConfig",
    "RegisteredError",
    "Report",
    "ShiftHistory",
    "Sinogram",
    "add_noise",
    "adjoint",
    "apply_shifts",
    "blob_volume",
    "cc_misalign",
    "cross_section",
    "default_slice_subset",
    "dft_at",
    "forward",
    "forward3d",
    "fractional_shift",
    "freq_grid",
    "load_config",
    "mass_align_x",
    "operator_sums",
    "pba3d",
    "pba_estimate",
    "pba_run",
    "phase_ratio_shift",
    "pm_run",
    "projection_match",
    "random_shifts",
    "reconstruct_stack",
    "registered_error",
    "registered_error_volume",
    "residual",
    "run_experiment",
    "shapes_phantom",
    "shepp_logan",
    "shift_totals",
    "sinogram_shift_of_translation",
    "sirt_step",
    "solve",
    "sweep",
    "translate_image",
    "tv_objective",
    "tv_solve",
]
