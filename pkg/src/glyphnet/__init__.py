"""Handwritten English alphabet recognition: grid features and a from-scratch MLP."""

from .experiment import run_experiment
from .features import GridSpec, PipelineConfig, extract_features
from .mlp import MULTICLASS_TOPOLOGY, PER_LETTER_TOPOLOGY, Network, TrainConfig, init_network, predict, train
from .synthgen import CorpusSpec, PerturbationParams, generate_corpus, reference_glyph

__version__ = "0.1.0"
