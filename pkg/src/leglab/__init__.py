"""leglab: construction and sampled verification of Legendrian subvarieties.

The package builds projective varieties from parametrizations or
implicit hypersurface equations, attaches symplectic forms (given or
fitted), and runs exact or high-precision probabilistic checks of the
Lagrangian-tangent condition, hyperplane reduction, and conormal-lift
constructions.  See README.md for the CLI.
"""

from .catalog import CatalogEntry, CatalogError, catalog_get, catalog_names, cubic_form_variety, self_check
from .conormal import (
    ConormalLiftVariety,
    build_conormal_lift,
    incidence_quadric_residual,
    phi_chart_map,
    reduction_agreement_check,
    singularity_classification_probe,
    torus_action_check,
)
from .linalg import Matrix, kernel_basis, rank, solve_linear
from .poly import MultiPoly, isolate_real_roots, parse_poly
from .scalars import EXACT, approx_backend
from .symplectic import (
    SymplecticForm,
    classify_subspace,
    fit_symplectic_form,
    hyperplane,
    induced_form,
    omega_eval,
    random_coisotropic,
    standard_form,
    symplectic_perp,
)
from .variety import (
    ImplicitHypersurface,
    ParamVariety,
    TangentFrame,
    cone_tangent_frame,
    conormal_covector,
    dimension_estimate,
    hypersurface_point_sampler,
    jacobian_rank_at,
    sample_points,
)
from .verify import (
    ReducedVariety,
    VerificationReport,
    check_legendrian,
    coisotropic_reduce,
    hyperplane_reduce,
    secant_avoidance_probe,
    section_sampler,
    verify_reduction,
    witness_nonisotropic_pair,
)

__version__ = "0.1.0"
