"""Time-averaged information theory for motions with stationary increments.

Synthesis of fBm, log-normal motions and the multifractal random walk;
k-nearest-neighbor estimates of the ersatz entropy, auto-mutual information
and entropy rate of a single window; closed-form fBm references.
"""

__version__ = "0.1.0"

from .embedding import (
    EmbeddedPointSet,
    EmbeddingSpec,
    increment_series,
    increment_std,
    increment_transform,
    inverse_increment_transform,
    takens_embed,
)
from .estimators import (
    EstimatorConfig,
    InfoEstimate,
    entropy_knn,
    ersatz_ami,
    ersatz_entropy,
    ersatz_entropy_rate,
    ersatz_entropy_rate_scan_k,
    mutual_information_ksg,
    normalized_entropy_rate,
)
from .synthesis import (
    NoiseSpec,
    Trajectory,
    fgn_autocovariance,
    integrate_to_motion,
    synth_fgn,
    synth_lognormal_noise,
    synth_motion,
    synth_mrw,
    synth_noise,
)
