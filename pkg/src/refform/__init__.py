"""refform: a benchmark toolkit for referential-form selection in discourse.

Ingests coreference-annotated corpora, extracts linguistic features, trains
six classifiers under a uniform contract, and evaluates any predictor
through a metric and statistical-analysis battery (accuracy / macro-F1 /
weighted-F1, rankings, Spearman correlations, Beta-Binomial Bayes factors,
permutation feature importance).
"""

from .analysis import (
    BFResult,
    CorrelationResult,
    bayes_factor_accuracy,
    kass_raftery_band,
    spearman,
)
from .corpus import (
    CLASS_FORMS,
    Corpus,
    CorpusError,
    CorpusStats,
    Document,
    GramRole,
    Mention,
    RefForm,
    SplitSpec,
    compute_stats,
    parse_corpus,
    split_corpus,
)
from .evaluation import EvalReport, Ranking, confusion_matrix, evaluate, rank_models
from .features import (
    FeatureConfig,
    FeatureSpec,
    FeatureTable,
    builtin_registry,
    encode,
    extract,
)
from .importance import ImportanceRanking, importance_report, permutation_importance
from .models import (
    Prediction,
    TrainedModel,
    load_model,
    save_model,
    train_crf,
    train_gbt,
    train_knn,
    train_maxent,
    train_mlp,
    train_model,
    train_tree,
)
from .synth import SynthSpec, generate_corpus

__version__ = "0.1.0"
