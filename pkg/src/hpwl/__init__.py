"""Unsupervised feature selection with a point-weighted soft hypergraph."""

from .clustering import ClusterModel, kmeans, snap_centroids
from .dataset import DataMatrix, Split, load_csv, split_half, standardize
from .estimator import HPWLSelector
from .evaluation import SweepResult, knn_predict, make_planted, run_sweep
from .hypergraph import SoftHypergraph, build_incidence, extend_laplacian, laplacian
from .solver import FeatureRanking, HpwlParams, SolverState, feature_scores, fit, run

__all__ = [
    "ClusterModel",
    "DataMatrix",
    "FeatureRanking",
    "HPWLSelector",
    "HpwlParams",
    "SoftHypergraph",
    "SolverState",
    "Split",
    "SweepResult",
    "build_incidence",
    "extend_laplacian",
    "feature_scores",
    "fit",
    "kmeans",
    "knn_predict",
    "laplacian",
    "load_csv",
    "make_planted",
    "run",
    "run_sweep",
    "snap_centroids",
    "split_half",
    "standardize",
]

__version__ = "0.1.0"
