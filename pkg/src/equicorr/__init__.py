"""Group cross-correlation with faintly constrained filters on explicit
finite group actions.

The package models filters whose only symmetry requirement couples
conjugation on the group side with the bundle action on the fiber side.
That single constraint makes cross-correlation commute with the group
action on sections, and it is exactly what survives of ordinary
equivariance when the acting group is larger than the base: the familiar
bi-equivariant theory embeds as a degenerate special case.

Filters correspond to kernels on base-point pairs: integration over
stabilizers projects a filter down to a kernel, and a kernel lifts back
through any compatible orbit-map section and normalized stabilizer
density.  Measure families enter through conjugation-compatibility and a
disintegration identity, all checked numerically, never assumed.
"""

from .battery import run_battery, run_structural
from .bundles import (
    EquivariantBundle,
    MackeySection,
    Section,
    act_on_mackey,
    act_on_section,
    mackey_to_section,
    representation_bundle,
    section_to_mackey,
    sign_bundle,
    trivial_bundle,
    validate_bundle,
    validate_mackey,
)
from .errors import (
    CoverageError,
    DegenerateMeasureError,
    DomainError,
    EquicorrError,
    InconsistencyError,
    PreconditionError,
    StructuralError,
)
from .groups import (
    CosetSection,
    FiniteGroup,
    GroupAction,
    Orbit,
    coset_section,
    cyclic_group,
    dihedral_group,
    direct_product,
    fundamental_domain,
    group_from_tables,
    orbit,
    orbits,
    pair_stabilizer,
    stabilizer,
    validate_action,
    validate_group,
)
from .measures import (
    DeltaFunction,
    GroupMeasureFamily,
    OrbitMeasureFamily,
    PsiFunction,
    StabilizerMeasureFamily,
    check_fubini,
    construct_normalized_families,
    counting_family,
    counting_orbit_family,
    counting_stabilizer_family,
    dirac_delta,
    fubini_pointwise_residual,
    psi_from_class_function,
    psi_indicator_identity,
    restrict_psi_to_delta,
    solve_orbit_family,
    solve_orbit_measure,
    validate_delta,
    validate_families,
    validate_psi,
)
from .reporting import Check, ValidationReport, check_from_residual
from .rng import SplitMix64
from .sampling import (
    random_mackey_sections,
    random_section,
    random_valid_filter,
    random_valid_kernel,
    random_violating_kernel,
)
from .scenarios import Scenario, build_scenario, degeneracy_demo, derive_theta, line_grid_ladder
from .transforms import (
    Kernel,
    ThetaMap,
    check_equivariance,
    integral_transform,
    lift_equivalence_check,
    lift_kernel_to_filter,
    project_filter_to_kernel,
    transform_equivariance_residual,
    validate_kernel,
    validate_theta,
)
from .xcorr import (
    CompressedFilter,
    Filter,
    check_convolution_equality,
    compress_filter,
    convolve,
    cross_correlate,
    cross_correlate_at_identity,
    expand_filter,
    to_convolution_form,
    validate_filter,
    xcorr_equivariance_residual,
)

__version__ = "0.1.0"
