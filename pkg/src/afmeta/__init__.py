"""afmeta: MQM scoring, metric meta-evaluation, and adequacy-fluency
balance analysis for machine translation."""

__version__ = "0.1.0"

from .data import (  # noqa: E402,F401
    AlignMode,
    ErrorAnnotation,
    EvaluationSet,
    MqmFormat,
    Orientation,
    ScoreMatrix,
    Severity,
    SystemPair,
    align,
    parse_mqm_file,
    parse_score_file,
)
from .scoring import (  # noqa: F401
    AspectClass,
    MqmMatrices,
    Taxonomy,
    WeightScheme,
    classify_error,
    error_penalty,
    mqm_matrices,
    system_means,
)
from .stats import (  # noqa: F401
    AnovaMethod,
    AnovaResult,
    PermutationConfig,
    f_cdf,
    f_statistic,
    permutation_pvalue,
    welch_f_statistic,
)
from .metametrics import (  # noqa: F401
    ConcordanceCounts,
    PairwiseResult,
    concordance_counts,
    pairwise_accuracy,
    soft_pairwise_accuracy,
)
from .synthesis import (  # noqa: F401
    Aspect,
    BiasReport,
    ComposedSetup,
    Dominance,
    SetupSpec,
    SynthesizedSet,
    b_transform,
    bias_report,
    build_setup,
    synthesize,
)
from .protocols import (  # noqa: F401
    PABreakdown,
    SensitivityResult,
    SentinelLine,
    SpaPlane,
    SPAPlanePoint,
    pa_breakdown,
    sensitivity,
    spa_plane,
)
from .synthetic import SyntheticDataset, SyntheticSpec, generate_dataset  # noqa: F401
