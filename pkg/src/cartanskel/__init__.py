"""Computable core of Cartan geometries modeled on skeletons.

Modules:

* exactmat  - exact rational matrices and canonical subspaces
* liealg    - structure-constant Lie algebras, builtins, normalizers
* skeleton  - skeletons, kernel ideal, effective quotient, iext
* extension - morphisms/extensions, curvature and torsion
* autos     - extended skeletons, A-map, infinitesimal automorphisms
* riemann   - metrics sharing a Levi-Civita connection (exact + floats)
* cli       - `cartan-skel` entry point
"""

from .exactmat import Mat, Subspace, frac, kernel, rref, solve
from .liealg import (
    LieAlgebra,
    LinearMap,
    MatrixRealization,
    builtin,
    centralizer_in,
    is_derivation,
    is_lie_automorphism,
    normalizer_in,
    subalgebra_closure,
)
from .skeleton import (
    ExtGroupElement,
    Skeleton,
    affine_skeleton,
    effective_quotient,
    euclidean_skeleton,
    iext_algebra,
    is_effective,
    kernel_ideal,
    validate,
    verify_ext_candidate,
)
from .extension import (
    KleinModel,
    SkeletonMorphism,
    compose,
    curvature_homogeneous,
    identity_morphism,
    is_extension,
    r_alpha,
    torsion_component,
    validate_morphism,
)
from .autos import (
    AMap,
    ExtendedSkeleton,
    autcor_check,
    build_a_map,
    build_rho_s,
    curvature_operators,
    flat_model_auto_filter,
    holonomy_closure,
    infinitesimal_autos,
)
from .riemann import (
    MetricFamily,
    SymMatF,
    classify_metrics,
    holonomy_of_extension,
    jacobi_eigen,
    metric_space_z,
    metrizability_check,
    orbit_space,
    polar_decompose,
    reduce_to_holonomy,
    spd_exp,
    spd_log,
    spd_sqrt,
    tau_apply,
)

__version__ = "0.1.0"
