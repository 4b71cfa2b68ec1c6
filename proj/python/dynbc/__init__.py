"""Heat equations with dynamic (surface diffusion) boundary conditions:
solvers, observability estimates and null controls."""

from ._core import (  # noqa: F401
    CarlemanWeights,
    CgDiagnostics,
    ControlRegion,
    ControlResult,
    DiscreteOperator,
    EvolutionConfig,
    L2Pair,
    Mesh,
    MeshKind,
    ObservabilityReport,
    PotentialPair,
    StepControl,
    Trajectory,
    apply_operator,
    assemble,
    build_disk_mesh,
    build_eta0,
    build_interval_mesh,
    control_mask,
    estimate_backward_observability,
    inner,
    make_weights,
    norm,
    penalized_hum,
    run_config,
    run_verify_suite,
    solve_backward,
    solve_forward,
    spectrum_smallest,
    weighted_minimal_control,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
