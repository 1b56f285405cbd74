"""Finite-dimensional analysis toolkit for quantum Markov semigroups in GKSL form."""

from .algebra import (
    OperatorSpace,
    commutant,
    generated_algebra,
    iterated_commutator_span,
    orbit_subspace,
)
from .analysis import (
    SpectralReport,
    Verdict,
    check_irreducibility,
    check_peripheral_triviality,
    check_positivity_improving,
    check_primitivity,
    decoherence_free_subalgebra,
    fixed_point_space,
    invariant_density_space,
    is_subharmonic,
    peripheral_spectrum,
    reversible_subalgebra,
    self_adjoint_span_criterion,
    support_reachable_space,
)
from .dynamics import (
    RelaxationProfile,
    cesaro_mean,
    cesaro_mean_observable,
    contraction_semigroup,
    evolve_observable,
    evolve_state,
    numerical_support_oracle,
    relaxation_profile,
)
from .gksl import (
    GkslModel,
    Superoperator,
    apply_generator,
    apply_predual,
    build_model,
    dump_model,
    gauge_transform,
    load_model,
    vectorize,
)
from .models import (
    ModelSpec,
    classical_restriction,
    random_gksl,
    standard_fixture,
    truncated_birth_death,
)
from .operator_core import (
    DEFAULT_TOL,
    InternalInconsistencyError,
    NumericalFailureError,
    QmsError,
    Subspace,
    Tolerances,
    ValidationError,
    corner_vanishing,
    hs_inner,
    is_psd,
    support_projection,
    trace_norm,
)
from .perron import PfReport, channel_at, pf_structure

__version__ = "0.1.0"
