"""Street-by-street diagram chains of mirror models on a cylinder.

Modules:

* ``diagrams``: Brauer diagrams, composition with loop removal, walledness.
* ``lattice``: street configurations, tracing, the at-most-two-mirror law.
* ``chain``: seeded Monte Carlo of the hitting times and the tail-bound formulas.
* ``exact``: exact distributions over diagrams and exact hitting-time CDFs.
* ``stats``: interval estimates and the one-sided checks against bounds.
* ``verification``: the acceptance harness behind ``mirrorcyl verify``.
"""

__version__ = "0.1.0"

from .chain import (  # noqa: E402
    BatchResult,
    BoundParams,
    RunSpec,
    bound_b,
    g_param,
    geometric_comparison_cdf,
    run_batch,
    run_trial,
    tail_bound_a,
    tail_bound_w,
    tau_samples,
)
from .diagrams import (  # noqa: E402
    ComposeResult,
    Diagram,
    bar_count,
    bar_pair,
    canonical_key,
    compose,
    compose_all,
    enumerate_diagrams,
    identity,
    is_walled,
    parse_diagram,
    random_diagram,
    to_text,
    transposition,
)
from .exact import (  # noqa: E402
    DistributionVector,
    Propagator,
    conditioned_distribution,
    evolve,
    bar_increment_probability,
    domination_check,
    hitting_cdf,
    lemma3_exact_check,
    lemma56_check,
    street_distribution,
    w_exact_cdf,
)
from .lattice import (  # noqa: E402
    BudgetExceeded,
    ModelParams,
    MirrorOrientation,
    StreetConfig,
    conditioned_law,
    enumerate_streets,
    prob_u_le2,
    sample_conditioned_X,
    sample_street,
    trace_street,
)
from .stats import IntervalEstimate, hoeffding_tau_check, ks_geometric, tail_vs_bound, wilson_interval  # noqa: E402
