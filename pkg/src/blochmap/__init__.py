"""Iterated measurement-induced qubit maps on the Bloch sphere.

Library for the dynamics of the rational map family
f_p(z) = (z^2 - conj(p)) / (1 + p z^2) and the induced mixed-state map on
the Bloch ball, with ergodicity and purification diagnostics and
parameter-plane sweeps.
"""

from .sphere import (
    INF,
    DegenerateImageError,
    SpherePoint,
    apply_map,
    bloch_from_point,
    chordal_distance,
    critical_points,
    point_from_bloch,
    point_from_z,
    spherical_derivative,
)
from .mixed import (
    BallExitError,
    BlochState,
    density_matrix,
    mixed_step,
    mixed_step_ensemble,
    mixed_step_lattes,
    purity,
    selection_map,
    unitary_from_angles,
    unitary_from_p,
)
from .sampling import (
    CenterStateError,
    EqualAreaGrid,
    GridMismatchError,
    Histogram,
    Patch,
    SeededSampler,
    ball_states,
    histogram_distance,
    mix64,
    patch_states,
    random_patch,
    shell_states,
    uniform_directions,
)
from .diagnostics import (
    ClassifyConfig,
    CoverageReport,
    CriticalOrbitHitError,
    CycleReport,
    ErgodicityFlags,
    LyapunovEstimate,
    PurificationReport,
    PurityStats,
    classify_ergodic,
    coverage_time,
    detect_attracting_cycle,
    ensemble_average_density,
    lyapunov,
    lyapunov_spectrum,
    purification_fraction,
    purity_stats,
    time_average_density,
)
from .sweep import (
    CheckpointFormatError,
    ParameterGrid,
    SweepConfig,
    SweepResult,
    TaskMismatchError,
    agreement_rate,
    checkpoint_load,
    checkpoint_save,
    run_sweep,
)

__version__ = "0.1.0"
