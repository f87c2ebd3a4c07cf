"""Recover a single community of a graph from biased node weights or a few
labeled nodes, via whitened moment matrices of a random node partition."""

from .baseline import Clustering, Dendrogram, cut_to_k, select_target, slink, spectral_cluster, spectral_embed
from .bench import ExperimentConfig, ResultRow, estimation_error, load_polblogs, run_experiment, speedup
from .diagnostics import ConditionReport, PopulationMoments, evaluate_conditions, population_moments
from .errors import *  # noqa: F401,F403
from .graph import (Graph, GroundTruth, MembershipVector, SbmParams, generate_sbm, largest_connected_component,
                    linear_alpha, load_edge_list, load_ground_truth, membership_vector, save_edge_list)
from .partition import PartitionScheme, partition_nodes
from .search import (CommunityEstimate, build_moments, community_search, exact_recovery_refine,
                     parallel_search, search_subroutine, threshold_membership, whiten)
from .sideinfo import WeightScope, labeled_weights, recommended_radius, synthetic_weights
from .spectral import TruncatedSvd, rank_k_svd

__version__ = "0.1.0"
