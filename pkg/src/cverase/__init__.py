"""Gaussian-state simulation of continuous-variable quantum erasing."""

from .gaussian import (
    GaussianState,
    PhysicalityError,
    QuadratureAddress,
    add_classical_noise,
    apply_beamsplitter,
    apply_loss,
    apply_phase_rotation,
    apply_squeeze,
    displace,
    is_physical,
    quad_mean,
    quad_variance,
    squeezed_vacuum,
    tensor,
    trace_out,
    vacuum,
)
from .measurement import (
    DegenerateMeasurementError,
    GainStrategy,
    combination_variance,
    feedforward,
    homodyne_condition,
    homodyne_sample,
    optimal_gain,
)
from .metrics import NoiseReport, added_noise, fidelity_gaussian, gains, wigner_contour
from .protocol import (
    Coherent,
    EraserParams,
    calibrate_feedforward_to_paper,
    calibrate_to_paper,
    run_delayed_choice,
    run_erasure_electronic,
    run_erasure_feedforward,
    run_qnd_stage,
    sweep_squeezing,
)

__version__ = "0.1.0"
