"""Explicit caption editing toolkit.

Edit-script derivation between caption pairs, a multi-round tag-and-insert
editing engine with oracle policies and training-sample expansion,
editing-aware evaluation metrics, and dataset construction pipelines.
"""

__version__ = "0.1.0"

from .builder import (
    Caption,
    DatasetStats,
    ECEInstance,
    FilterConfig,
    ScoreTable,
    build_cocoee_split,
    build_flickr30kee,
    compute_stats,
)
from .editscript import (
    ADD,
    DELETE,
    KEEP,
    EditOp,
    EditScript,
    apply_script,
    detokenize,
    edit_distance,
    min_edit_script,
    tokenize,
)
from .engine import (
    MASK,
    EditorState,
    ExpansionConfig,
    KeepAllPolicy,
    OraclePolicy,
    Policy,
    RoundRecord,
    RoundTrace,
    TracePolicy,
    TrainingSample,
    expand_instance,
    oracle_policy,
    run_inserter,
    run_rounds,
    run_tagger_add,
    run_tagger_del,
)
from .kernels import backend
from .metrics import (
    CompoundOp,
    MetricReport,
    bleu,
    bleu_all,
    cider_d,
    decompose_compound,
    es_implicit,
    es_of_trace,
    evaluate_records,
    format_report,
    gps,
    rouge_l,
)

__all__ = [
    "ADD",
    "DELETE",
    "KEEP",
    "MASK",
    "Caption",
    "CompoundOp",
    "DatasetStats",
    "ECEInstance",
    "EditOp",
    "EditScript",
    "EditorState",
    "ExpansionConfig",
    "FilterConfig",
    "KeepAllPolicy",
    "MetricReport",
    "OraclePolicy",
    "Policy",
    "RoundRecord",
    "RoundTrace",
    "ScoreTable",
    "TracePolicy",
    "TrainingSample",
    "apply_script",
    "backend",
    "bleu",
    "bleu_all",
    "build_cocoee_split",
    "build_flickr30kee",
    "cider_d",
    "compute_stats",
    "decompose_compound",
    "detokenize",
    "edit_distance",
    "es_implicit",
    "es_of_trace",
    "evaluate_records",
    "expand_instance",
    "format_report",
    "gps",
    "min_edit_script",
    "oracle_policy",
    "rouge_l",
    "run_inserter",
    "run_rounds",
    "run_tagger_add",
    "run_tagger_del",
    "tokenize",
]
