"""Ordinal embedding from noisy triplet comparisons."""

from .edm import (
    center_embedding,
    centered_component,
    distance_from_gram,
    edm_validity,
    gram_from_distance,
    gram_from_embedding,
    kernel_correct,
    recover_distance,
    recover_gram,
    second_largest_eigenvalue,
)
from .risk import LossKind, bayes_error, empirical_risk, prediction_error, true_risk
from .solvers import SolverConfig, SolveResult, debias, factored_gd, nuclear_pgd, pgd, rank_d_pgd, solve
from .triplets import Dataset, Triplet, enumerate_triplets, logistic_link, sample_triplets, simulate

__version__ = "0.1.0"
