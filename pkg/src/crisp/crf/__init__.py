"""Dense fully connected CRF: model, filtering, inference and map refinement."""
from .filtering import filter_bruteforce, filter_fast
from .inference import (energy, frank_wolfe_infer, initial_marginals, mean_field_infer,
                        pairwise_messages, relaxed_energy)
from .model import APPEARANCE, SMOOTHNESS, DenseCrfProblem, KernelSpec, Marginals
from .refine import CrfConfig, refine, unary_from_probability

__all__ = [
    "APPEARANCE", "SMOOTHNESS", "CrfConfig", "DenseCrfProblem", "KernelSpec", "Marginals",
    "energy", "filter_bruteforce", "filter_fast", "frank_wolfe_infer", "initial_marginals",
    "mean_field_infer", "pairwise_messages", "refine", "relaxed_energy",
    "unary_from_probability",
]
