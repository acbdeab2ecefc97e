"""Time-elastic distances, the KDTW kernel and time series averaging."""

from .averaging import (CentroidResult, dba, dba_step, ikdba, inertia, kdba, kdtw_pwa,
                        pairwise_dtw_centroid, pkdtw_pwa)
from .core import (KernelParams, LabeledDataset, TimeSeries, load_dataset, parse_multivariate,
                   parse_ucr, synth_fixtures)
from .elastic import (AlignmentPath, AlignmentProbability, AmaMatrix, ForwardMatrix, alignment_probabilities,
                      ama, dtw, forward_matrix, kdtw, log_kdtw, squared_euclidean)
from .evaluation import (EvalReport, RepresentativeSet, average_rank, build_representatives,
                         classify_1nc, error_rate, loo_tune_nu, medoid)
from .preimage import PreimageConfig, preimage_centroid, preimage_objective

__version__ = "0.1.0"
