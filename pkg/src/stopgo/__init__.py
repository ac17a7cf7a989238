"""Two-velocity relaxation model for traffic flow.

Exact Riemann solutions of the hyperbolic part, kinetic boundary layers,
the jam-cluster limit and finite-volume schemes that reproduce all of the
reference experiments at desk scale.
"""

from .model_core import (
    BracketError,
    ConservativeState,
    EigenStructure,
    FundamentalDiagram,
    MacroState,
    ModelError,
    ModelParams,
    SingularityError,
    SubcharAudit,
    TriangleError,
    check_subcharacteristic,
    eigenstructure,
    equilibrium,
    equilibrium_z,
    from_conservative,
    genuine_nonlinearity_indicator,
    make_diagram,
    tau,
    to_conservative,
)
from .riemann import (
    ClusterFan,
    LwrFan,
    RiemannFan,
    Wave,
    intermediate_state,
    shock_speed_1,
    solve_riemann_cluster,
    solve_riemann_lwr,
    solve_riemann_system,
)
from .boundary_layer import (
    BoundaryResolution,
    LayerFixedPoints,
    LayerProfile,
    integrate_layer,
    layer_fixed_points,
    lw_closed_forms,
    resolve_left_boundary,
    resolve_right_boundary,
)
from .schemes import (
    BoundarySpec,
    CFLError,
    EdgeCondition,
    GridSolution,
    StepLog,
    apply_boundary,
    godunov_flux_system,
    relax_z,
    run_simulation,
    step_godunov_lwr,
    step_lax_friedrichs,
    step_relaxation,
    step_relaxed,
    suggest_dt,
)
from .harness import (
    RunReport,
    Scenario,
    builtin_scenarios,
    execute,
    front_position,
    get_scenario,
    l1_error,
    linf_error,
    riemann_reference,
    run_scenario,
)

__version__ = "0.1.0"
