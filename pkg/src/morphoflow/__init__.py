"""morphoflow: 2D coupled shape-growth simulation.

A growth potential evolves by advection-reaction-diffusion on a moving
domain and drives the domain's deformation through a regularized elastic
equilibrium velocity solved in a reproducing-kernel space of vector fields,
plus a varifold-distance harness for recovering the initial potential's
center.
"""

from ._kernels import BACKEND
from .coupling import (
    MeshParams,
    OutputParams,
    PotentialParams,
    SimulationConfig,
    Trajectory,
    advance_flow,
    assemble_yank,
    run_simulation,
    solve_velocity,
    vector_gram,
)
from .elasticity import ElasticParams, assemble_elastic_matrix, elastic_pairing
from .errors import (
    AssemblyError,
    ConfigError,
    DegenerateDeformationError,
    DiffeomorphismError,
    InvalidMeshError,
    MorphoflowError,
    NumericalError,
    ParameterError,
)
from .geometry import (
    DeformationState,
    DensityField,
    Mesh,
    eulerian_density,
    make_ellipse_mesh,
    read_mesh,
    read_snapshot,
    recover_gradient,
    write_mesh,
    write_snapshot,
)
from .reaction_diffusion import (
    BumpProfile,
    DensityStepper,
    DiffusionSpec,
    assemble_rd_system,
    bump_eval,
    initial_potential,
    pullback_diffusion,
    step_density,
)
from .rkhs import (
    KernelSpec,
    VelocityField,
    collapse_points,
    eval_field,
    gram_matrix,
    kappa,
    kappa_derivatives,
    v_norm_squared,
)
from .varifold import (
    Curve,
    VarifoldSpec,
    boundary_curve,
    grid_search_center,
    varifold_distance,
    varifold_distance_squared,
)

__version__ = "0.1.0"
