"""Exact Robertson-Webb cake cutting laboratory.

Measures, the query referee, classic proportional protocols, the hard
instance family with its lazy adversary, and an exact decision-tree analyzer.
"""

from .valuation import (
    Interval,
    PiecewiseMeasure,
    alpha_point,
    interval_value,
    prefix_value,
)
from .engine import (
    Allocation,
    Engine,
    Mode,
    ProtocolFault,
    Transcript,
    check_proportional,
    query_counts,
    replay,
)
from .adversary import (
    AdversaryReferee,
    AdversaryState,
    ChunkString,
    JInstance,
    WSInstance,
    adversary_cut,
    adversary_finalize,
    build_measure,
    check_phi_equals_pi_inverse,
    count_J,
    enumerate_J,
    grid_point,
    sample_J,
    transform_eval_to_cut,
)
from .protocols import (
    PROTOCOLS,
    STRATEGIES,
    ProtocolSpec,
    cut_and_choose,
    even_paz,
    get_protocol,
    is_primitive,
    last_diminisher,
    run_protocol,
)
from .analysis import (
    check_uniform_posterior,
    exact_expected_depth,
    jensen_gap_check,
    lower_bound,
)
from .experiment import ExperimentReport, emit_report, run_experiment

__version__ = "0.1.0"
