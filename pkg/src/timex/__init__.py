"""Temporal importance explanations for black-box models.

Given a model over (instance, feature, timestep) data and a test set, the
analysis identifies globally important features, localizes the contiguous
window each one's influence concentrates in, and tests whether within-window
ordering matters, with permutation-test p-values under hierarchical FDR
control.
"""

from .data import (
    FORMAT_BINARY,
    FORMAT_CSV_LONG,
    FeatureKind,
    FeatureMeta,
    LossKind,
    Task,
    TemporalDataset,
    Window,
    compute_loss,
    load_dataset,
    save_dataset,
)
from .errors import (
    AnalysisError,
    ConfigurationError,
    DataFormatError,
    GenerationError,
    InvalidArgumentError,
    ModelStartupError,
    ProtocolError,
    TimexError,
    TuningError,
)
from .models import (
    InProcessModel,
    ModelHandle,
    PredictBatch,
    SubprocessModel,
    predict,
    shutdown,
    spawn_external_model,
)
from .perturb import (
    ImportanceResult,
    InstancePermutation,
    TimestepPermutation,
    baseline_mean_loss,
    draw_instance_permutation,
    draw_timestep_permutation,
    ordering_round_losses,
    perturb_ordering_within_window,
    perturb_window_across_instances,
    window_importance,
)
from .pipeline import (
    AnalysisConfig,
    AnalysisReport,
    FeatureGroup,
    FeatureReport,
    analyze,
    analyze_with_groups,
)
from .search import WindowSearchResult, find_important_window
from .stats import (
    Decision,
    FdrConfig,
    TestKind,
    TestNode,
    bh_reject,
    empirical_p,
    hierarchical_fdr,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
