"""Coupled full-order / reduced-order solvers for 2D conservation laws.

Subdomain-local models (finite-volume full order, POD/LSPG reduced order,
and hyper-reduced collocated variants) are advanced in time together by an
additive overlapping-Schwarz iteration with ghost-cell coupling.  The
package also ships the offline pipeline (snapshot collection, POD, sample
mesh construction) and a campaign driver with a command-line front end.
"""

from schwarzrom.exceptions import (
    ConfigurationError,
    CouplingError,
    IngestionError,
    InternalError,
    MetricError,
    SchwarzRomError,
    SolverError,
    StateError,
)
from schwarzrom.mesh import (
    CartesianGrid,
    DonorMap,
    Subdomain,
    build_donor_maps,
    build_grid,
    decompose,
    gather_fields,
    scatter_field,
)
from schwarzrom.physics import (
    BurgersSystem,
    EulerGas,
    FluxModel,
    ParamSet,
    RunDefaults,
    ShallowWater,
    get_model,
    ghost_state,
    initial_condition,
    make_params,
)
from schwarzrom.fv import (
    CollocationPlan,
    ResidualContext,
    default_context,
    residual_jacobian,
    spatial_residual,
    time_residual,
)
from schwarzrom.solvers import lspg_solve, lspg_solve_collocated, newton_solve
from schwarzrom.rom import (
    SampleMesh,
    SnapshotMatrix,
    TrialBasis,
    assemble_snapshots,
    build_sample_mesh,
    compute_pod,
    interface_seed_cells,
    projection_error,
    qdeim_indices,
    qdeim_seed_cells,
    snapshots_from_run,
)
from schwarzrom.fileio import (
    load_basis,
    load_sample_mesh,
    load_snapshots,
    save_basis,
    save_sample_mesh,
    save_snapshots,
)
from schwarzrom.schwarz import (
    SchwarzController,
    SchwarzResult,
    StepStats,
    SubdomainModel,
    run_transient,
)
from schwarzrom.campaign import (
    Campaign,
    CampaignConfig,
    CampaignResult,
    RunRecord,
    load_config,
    parse_config,
    run_campaign,
    space_time_error,
    speedup_report,
    truncate_basis,
)

__version__ = "0.1.0"

__all__ = [
    "BurgersSystem",
    "Campaign",
    "CampaignConfig",
    "CampaignResult",
    "CartesianGrid",
    "CollocationPlan",
    "ConfigurationError",
    "CouplingError",
    "DonorMap",
    "EulerGas",
    "FluxModel",
    "IngestionError",
    "InternalError",
    "MetricError",
    "ParamSet",
    "ResidualContext",
    "RunDefaults",
    "RunRecord",
    "SampleMesh",
    "SchwarzController",
    "SchwarzResult",
    "SchwarzRomError",
    "ShallowWater",
    "SnapshotMatrix",
    "SolverError",
    "StateError",
    "StepStats",
    "Subdomain",
    "SubdomainModel",
    "TrialBasis",
    "assemble_snapshots",
    "build_donor_maps",
    "build_grid",
    "build_sample_mesh",
    "compute_pod",
    "decompose",
    "default_context",
    "gather_fields",
    "get_model",
    "ghost_state",
    "initial_condition",
    "interface_seed_cells",
    "lspg_solve",
    "lspg_solve_collocated",
    "load_basis",
    "load_config",
    "load_sample_mesh",
    "load_snapshots",
    "make_params",
    "newton_solve",
    "parse_config",
    "projection_error",
    "qdeim_indices",
    "qdeim_seed_cells",
    "residual_jacobian",
    "run_campaign",
    "run_transient",
    "save_basis",
    "save_sample_mesh",
    "save_snapshots",
    "scatter_field",
    "snapshots_from_run",
    "space_time_error",
    "spatial_residual",
    "speedup_report",
    "time_residual",
    "truncate_basis",
]
