"""Box-Cox power-transform image enhancement with histogram-based lambda estimation."""

from .boxcox import (
    LambdaEstimate,
    Mode,
    PositiveSample,
    boxcox_loglik,
    boxcox_transform,
    estimate_lambda,
)
from .enhance import EnhancementResult, apply_bci, apply_gamma, normalize_positive
from .errors import (
    AllZero,
    BCIError,
    CorruptFile,
    DegenerateSample,
    NoMaximumInRange,
    NonPositiveGamma,
    NonPositiveInput,
    ShapeMismatch,
    TooFewSamples,
    UnsupportedFormat,
    WrongChannelCount,
)
from .image import (
    Histogram,
    ImageBuffer,
    compute_histogram,
    lambda_from_histogram,
    luma,
    read_image,
    write_image,
)
from .metrics import (
    QualityReport,
    kurtosis,
    kurtosis_adjusted,
    pearson,
    psnr,
    qq_rayleigh,
    quality_report,
    rayleigh_fit,
    skewness,
    skewness_adjusted,
)
from .synth import gradient_image, lognormal_image

__version__ = "0.1.0"
