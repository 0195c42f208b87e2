"""Sequence classification with classical and possibilistic hidden Markov models."""

from .errors import ArgumentError, DomainError, FormatError, PtseqError
from .possibility import Algebra, PossibilityDistribution, combine, necessity_of, possibility_of
from .hmm import HmmModel, hmm_evaluate, hmm_fit, hmm_train, hmm_viterbi
from .pthmm import (
    PthmmModel,
    pt_backward,
    pt_classify,
    pt_fit,
    pt_forward,
    pt_forward_counted,
    pt_learn,
    pt_viterbi,
)
from .vq import Codebook, lbg_train, quantize
from .fusion import FusionConfig, ModeDecision, derive_weights, fuse

__version__ = "0.1.0"
