"""Next-bit prediction from compressed lengths of transition-encoded histories."""

from .codec import (Alphabet, TransitionStream, build_alphabet, encode_history,
                    make_candidates, peel, splice, transition_encode)
from .compressor import (CompressorSpec, compress, compressed_length, decompress,
                         make_compressor)
from .errors import (BackendError, ConvergenceError, DecodeError, EncodingError,
                     ParameterError)
from .predictor import (PredictionTrace, PredictorParams, predict_step, run_block_prediction,
                        run_prediction, score_s1, score_s2, score_syx)
from .source import (SourceModel, bayes_error, generate, random_source,
                     stationary_distribution, uniform_source)

__version__ = "0.1.0"
