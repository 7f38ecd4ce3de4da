"""Nonparametric density estimation from the stationary law of a data-supported
Markov chain, with bandwidth optimization, local outlier scoring, and a seeded
benchmark harness."""

from . import errors
from .bandwidth import (
    BandwidthGrid,
    GridSpec,
    LossCurve,
    kde_kfold_cv,
    loss_kde_nll,
    loss_loo,
    loss_nll,
    optimize,
)
from .bench import (
    DEExperimentConfig,
    DEReport,
    OUTLIER_DATASETS,
    emse,
    performance_ratio,
    run_de_experiment,
    run_outlier_experiment,
)
from .chain import (
    distance_matrix,
    stationary_distribution,
    transition_matrix,
    weight_matrix,
)
from .estimator import (
    DensityModel,
    DomainBox,
    FitConfig,
    Interpolant,
    PointwiseEstimate,
    build_interpolant,
    f1_evaluate,
    fit_mcde,
    kde_evaluate,
    mc_normalize,
    model_from_dict,
    model_to_dict,
    normalization_constant_diagnostic,
    pointwise_estimate,
)
from .kernels import (
    KERNEL_FAMILIES,
    Kernel,
    KernelConstants,
    get_kernel,
    kernel_constants,
    kernel_eval,
)
from .outlier import OutlierReport, anomaly_scores, auc, detect, knn
from .preprocess import WhiteningTransform, reflect_boundary, transform_variable, whiten
from .synthdata import (
    DistributionSpec,
    LabeledSample,
    cdf_eval,
    parse_spec,
    pdf_eval,
    sample_mixture,
    sample_product,
)

__version__ = "0.1.0"
