"""Critical transmission radii of random geometric graphs over 3D convex regions."""

from .geometry import (
    ConvexRegion,
    RegionError,
    cap_volume_beyond,
    clipped_ball_volume,
    contains,
    dist_to_boundary,
    halfspace_clipped_ball_volume,
    lens_deficit,
    normalize_unit_volume,
    parse_region_spec,
    sample_uniform,
)
from .spatial import CellGrid, PointSample, build_grid, kth_nn_distance, neighbors_within
from .graphs import (
    CriticalRadii,
    Graph,
    build_rgg,
    critical_radius_k_connectivity,
    critical_radius_min_degree,
    is_k_connected,
    min_degree,
    vertex_connectivity,
)
from .theory import (
    IntegralReport,
    TheoryParams,
    boundary_layer_asymptote,
    boundary_layer_integral,
    limit_probability,
    psi,
    psi_integral_over_region,
    radius_2d,
    radius_3d,
    solve_xi_2d,
    solve_xi_3d,
    theory_params,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    TrialRecord,
    empirical_cdf_at,
    equality_rate,
    run_experiment,
    run_trial,
    sample_binomial_process,
    sample_poisson_process,
)

__version__ = "0.1.0"
