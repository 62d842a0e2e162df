"""Planar vortex systems, their projective reduction and choreographic orbits."""
from .errors import (
    CollisionApproach,
    CollisionError,
    DomainError,
    NoConvergence,
    NumericalError,
    QuadratureFailure,
    VortexError,
)
from .hamiltonians import (
    Family,
    SystemSpec,
    energy,
    first_integrals,
    grad_energy,
    moment_of_inertia,
    regular_polygon,
    vector_field,
)
from .integrate import Trajectory, find_relative_equilibrium, flow, flow_map
from .projective import ProjectivePoint, centred_project, fs_distance, hopf_project, sigma1, sigma2
from .choreography import LoopSample, OrbitResult, apply_g, chore_defect, shooting_residual
from .spheres import SphereMap, equivariance_defect, evaluate_sphere, fs_area
from .search import SearchConfig, energy_sweep, search
from .analysis import (
    CircleConfig,
    chord_log_sum,
    invariant_component_probe,
    ngon_maximality_test,
    polygon_trap_coefficient,
    shub_separation_scan,
)
from .export import export_trajectory

__version__ = "0.1.0"
