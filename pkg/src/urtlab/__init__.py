"""urtlab: growth and lazy-walk return exponents on the d-regular tree.

Submodules
----------
trees      rooted-tree windows, sphere profiles, spine and decorations
generate   deterministic tree families, Bernoulli clusters, transfer automata
walk       exact lazy-walk distance kernel and return series (log domain)
rate       large-deviation rate function and its grid oracle
cogrowth   growth <-> return-exponent closed forms and variational cross-check
two_three  mass-transport functionals, 2-3 certificates, exponent estimators
verify     the acceptance checks behind ``urtlab verify-all``
cli        command-line interface
"""

__version__ = "0.1.0"

from .cogrowth import (
    CogrowthResult,
    cogrowth_rho,
    invert_cogrowth,
    lazy_from_simple,
    simple_from_lazy,
    variational_log_rho_lazy,
)
from .errors import (
    CapExceededError,
    PreconditionError,
    ValidationError,
    WindowRadiusError,
)
from .generate import (
    PendantPathLaw,
    PercolationParams,
    TransferAutomaton,
    automaton_profile,
    bernoulli_cluster,
    canopy_profile,
    canopy_root_level_sampler,
    line_profile,
    line_with_decorations,
    perron_growth,
    profile_from_spec,
    regular_profile,
    singleton_profile,
    spine_mtp_audit,
    subtree_profile,
)
from .rate import LdpCheck, RateFunction, ldp_check, rate_argmax
from .trees import (
    GrowthEstimate,
    NormalizedProfile,
    RootedTreeWindow,
    SphereProfile,
    decorations,
    format_window,
    growth_estimates,
    normalize,
    parse_window,
    sphere_sizes,
    spine,
)
from .two_three import (
    ConeDiagnostic,
    ExponentEstimate,
    TwoThreeAudit,
    c_pq,
    cluster_return_prob,
    cone_diagnostic,
    exponent_estimate,
    f1,
    f2,
    l0_diagnostic,
    mtp_expectation_audit,
    two_three_sample,
)
from .walk import (
    DistanceKernel,
    ReturnSeries,
    build_kernel,
    iter_distance_rows,
    mc_distance_histogram,
    mc_distance_walk,
    point_probability,
    return_series,
)
