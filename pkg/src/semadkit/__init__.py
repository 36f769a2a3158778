"""semadkit: explainable semantic anomaly detection for event logs.

Extract DECLARE ground truth from workflow nets, synthesize noisy logs,
filter generated candidate constraints, mine baselines, check logs with
per-violation explanations, and evaluate constraint sets against truth.
"""

from .checker import Violation, ViolationReport, check, flag_traces
from .constraints import (
    Constraint,
    ConstraintSet,
    ConstraintSyntaxError,
    ConstraintType,
    Evaluation,
    EvfRelation,
    Verdict,
    candidate_constraints,
    evaluate,
    is_activated,
    is_satisfied,
    parse_constraint,
    render_constraint,
    to_evf,
)
from .evaluation import (
    EvalReport,
    Metrics,
    SweepResult,
    SweepRun,
    evaluate_corpus,
    score,
    split_corpus,
    sweep_theta,
)
from .gateway import (
    CandidateConstraint,
    FilterConfig,
    FilterResult,
    TrainingPair,
    build_input,
    export_training_pairs,
    filter_candidates,
    ingest_candidates,
)
from .logs import (
    Event,
    EventLog,
    LabelError,
    LogParseError,
    Trace,
    normalize_label,
    parse_xes,
    read_jsonl_log,
    write_jsonl_log,
    write_xes,
)
from .miner import MinedConstraint, MinerConfig, mine
from .nets import (
    BoundedLanguage,
    Marking,
    NetStructureError,
    PlayoutError,
    Soundness,
    SoundnessResult,
    Transition,
    TruncatedLanguageError,
    WorkflowNet,
    check_soundness,
    extract_truth,
    parse_net,
    playout_exhaustive,
    playout_sample,
)
from .noise import NoiseConfig, NoiseKind, NoiseOp, NoiseRecord, expand_and_corrupt

__version__ = "0.1.0"
