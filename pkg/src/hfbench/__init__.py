"""Group-fairness metrics and baseline-relative benchmarking (Harmonic Fairness)."""

__version__ = "0.1.0"

from .aggregate import (
    AggregateReport,
    RankedTable,
    RunReport,
    aggregate_runs,
    average_tasks,
    rank_methods,
    select_checkpoint,
)
from .classify import Confusion, GroupProfile, RateSet, fairness_report, group_confusion, rates
from .ingest import (
    ParseReport,
    load_manifest,
    load_manifest_file,
    parse_classification_log,
    parse_landmark_log,
)
from .landmark import (
    SuccessProfile,
    SweepSeries,
    compare_landmark,
    decode_heatmaps,
    group_success_profile,
    nme,
    sdr,
    threshold_sweep,
)
from .model import (
    BenchmarkManifest,
    ClassificationRecord,
    LandmarkRecord,
    Normalization,
    RenderOptions,
    validate_manifest,
)
from .relative import (
    ComparisonResult,
    PerformancePoint,
    compare_to_baseline,
    compute_dto,
    harmonic_fairness,
    hf_isoline_grid,
    sigmoid_rescale,
)
from .render import render_sweep_plot, render_table
from .synth import GroupSpec, generate_classification, generate_landmark, oracle_report
