"""LT fountain codes under the Poisson reception model."""

from .degree_dist import DegreeDistribution, soliton_ideal, soliton_robust, validate
from .decoder import DecodeResult, peel, recover_values
from .finite_length import brute_force_exact, dp_naive, failure_probability, precompute_q
from .kernels import BACKEND
from .sampler import CodeInstance, CodeParameters, encode_payload, presence_prob, sample_instance

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CodeInstance",
    "CodeParameters",
    "DecodeResult",
    "DegreeDistribution",
    "brute_force_exact",
    "dp_naive",
    "encode_payload",
    "failure_probability",
    "peel",
    "precompute_q",
    "presence_prob",
    "recover_values",
    "sample_instance",
    "soliton_ideal",
    "soliton_robust",
    "validate",
]
