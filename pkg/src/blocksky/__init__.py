"""Skyline learning for entity-resolution blocking schemes.

The package learns disjunctive-normal-form blocking schemes from labelled
record pairs and exposes the full pair-completeness / pair-quality trade-off
as a scheme skyline instead of a single threshold-tuned scheme.
"""

from blocksky.datamodel import (
    Dataset,
    GroundTruth,
    IngestConfig,
    IngestError,
    Record,
    RecordPair,
    load_dataset,
    load_ground_truth,
    save_dataset,
)
from blocksky.functions import (
    BlockingFunction,
    BlockingPredicate,
    PredicateUniverse,
    default_functions,
    double_metaphone_function,
    exact_match,
    get_substring,
    predicate_universe,
    soundex_function,
)
from blocksky.harness import (
    ExperimentPlan,
    HarnessError,
    compare_baselines,
    result_identity,
    run_algorithm,
    run_cs,
    run_once,
    sweep_label_cost,
    write_report,
)
from blocksky.learner import (
    AslResult,
    LearnError,
    SchemePoint,
    SkylineResult,
    active_sky,
    asl,
    dominates,
    find_approximate_scheme,
    find_optimal_scheme,
    naive_sky,
    pro_sky,
    skyline_of,
)
from blocksky.metrics import (
    DatasetIndex,
    MetricsError,
    NotEvaluableError,
    build_index,
    confusion,
    empirical_pc,
    empirical_pq,
    fm,
    materialize_blocks,
    pc,
    pq,
    rr,
)
from blocksky.oracle import (
    BudgetExhaustedError,
    CallbackOracle,
    GroundTruthOracle,
    OracleError,
    OracleSession,
    ReplayOracle,
    parse_log,
    replay,
)
from blocksky.sampling import MATCH, NONMATCH, FeatureVector, TrainingSet
from blocksky.scheme import Scheme, SchemeError, conjoin, disjoin, parse_scheme

__version__ = "0.1.0"

__all__ = [
    "AslResult",
    "BlockingFunction",
    "BlockingPredicate",
    "BudgetExhaustedError",
    "CallbackOracle",
    "Dataset",
    "DatasetIndex",
    "ExperimentPlan",
    "FeatureVector",
    "GroundTruth",
    "GroundTruthOracle",
    "HarnessError",
    "IngestConfig",
    "IngestError",
    "LearnError",
    "MATCH",
    "MetricsError",
    "NONMATCH",
    "NotEvaluableError",
    "OracleError",
    "OracleSession",
    "PredicateUniverse",
    "Record",
    "RecordPair",
    "ReplayOracle",
    "Scheme",
    "SchemeError",
    "SchemePoint",
    "SkylineResult",
    "TrainingSet",
    "active_sky",
    "asl",
    "build_index",
    "compare_baselines",
    "confusion",
    "conjoin",
    "default_functions",
    "disjoin",
    "dominates",
    "double_metaphone_function",
    "empirical_pc",
    "empirical_pq",
    "exact_match",
    "find_approximate_scheme",
    "find_optimal_scheme",
    "fm",
    "get_substring",
    "load_dataset",
    "load_ground_truth",
    "materialize_blocks",
    "naive_sky",
    "parse_log",
    "parse_scheme",
    "pc",
    "pq",
    "predicate_universe",
    "pro_sky",
    "replay",
    "result_identity",
    "rr",
    "run_algorithm",
    "run_cs",
    "run_once",
    "save_dataset",
    "skyline_of",
    "soundex_function",
    "sweep_label_cost",
    "write_report",
    "__version__",
]
