"""Multiclass SVM toolkit for land-cover classification of multi-band
rasters.

Trains one-against-one and one-against-all ensembles of soft-margin
SVMs over linear, quadratic, polynomial and RBF kernels, classifies
rasters with explicit unclassified/mixed pixel semantics, and compares
the two strategies by pixel tallies, Cohen's kappa and a two-kappa
Z-test.
"""

from .assessment import (
    CellResult,
    ComparisonReport,
    ConfusionMatrix,
    KappaResult,
    build_confusion,
    compare_report,
    kappa,
    z_statistic,
)
from .backend import BACKEND
from .binary import (
    BinaryModel,
    TrainConfig,
    TrainingSet,
    brute_force_qp,
    decision_value,
    decision_values,
    dual_objective,
    grid_search_cv,
    kkt_violations,
    train_binary,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateTrainingError,
    DegenerateVarianceError,
    IncompleteGridError,
    InputError,
    ParseError,
    ToolkitError,
    UndefinedKappaError,
)
from .kernels import (
    KERNEL_KINDS,
    KernelSpec,
    Standardizer,
    cross_kernel,
    eval_kernel,
    gram_matrix,
)
from .model_io import load_labels, load_model, save_labels, save_model
from .multiclass import (
    MIXED,
    UNCLASSIFIED,
    ClassSet,
    LabelGrid,
    MulticlassModel,
    PixelLabel,
    TallySummary,
    classify_one_vs_all,
    classify_one_vs_one,
    classify_raster,
    predict_codes,
    train_one_vs_all,
    train_one_vs_one,
)
from .raster import (
    BlobClass,
    LandCoverMap,
    RasterImage,
    SampleSet,
    blob_means,
    export_map,
    gen_synthetic,
    load_raster,
    load_reference,
    load_samples,
    save_raster,
)

__version__ = "0.1.0"
