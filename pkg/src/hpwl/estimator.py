"""scikit-learn compatible wrapper around the solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .solver import HpwlParams, run


class HPWLSelector(SelectorMixin, BaseEstimator):
    """Unsupervised feature selection with a soft centroid hypergraph.

    Parameters
    ----------
    n_features_to_select : int, default=10
        Number of top-ranked columns kept by :meth:`transform`.
    tau, rho, kappa : float
        Weights of the global term, the l2,1 term and the hyperedge-weight
        penalty.
    n_components : int, optional
        Embedding dimension ``k``.
    rank : int, optional
        Rank bound ``r`` of the transform.
    n_neighbors : int, default=5
        Centroids per hyperedge besides the owner.
    n_centroids : int, optional
        Number of k-means clusters (default ``floor(n_samples / 10)``).
    max_iter, inner_max_iter : int
        Outer and P/Q iteration caps.
    tol : float
    variant : {"full", "identity_d", "binary_h", "no_global"}
    weight_update : {"safeguarded", "literal"}
    random_state : int, default=0

    Attributes
    ----------
    scores_ : ndarray of shape (n_features,)
        Row norms of the learned transform.
    ranking_ : ndarray of shape (n_features,)
        Column indices by descending score.
    transform_matrix_ : ndarray of shape (n_features, n_components)
    objective_trace_, err_trace_ : list of float
    centroid_indices_ : ndarray
    n_iter_ : int
    """

    def __init__(
        self,
        n_features_to_select=10,
        tau=1.0,
        rho=1.0,
        kappa=1.0,
        n_components=None,
        rank=None,
        n_neighbors=5,
        n_centroids=None,
        max_iter=20,
        inner_max_iter=10,
        tol=1e-4,
        variant="full",
        weight_update="safeguarded",
        random_state=0,
    ):
        self.n_features_to_select = n_features_to_select
        self.tau = tau
        self.rho = rho
        self.kappa = kappa
        self.n_components = n_components
        self.rank = rank
        self.n_neighbors = n_neighbors
        self.n_centroids = n_centroids
        self.max_iter = max_iter
        self.inner_max_iter = inner_max_iter
        self.tol = tol
        self.variant = variant
        self.weight_update = weight_update
        self.random_state = random_state

    def _params(self) -> HpwlParams:
        return HpwlParams(
            tau=self.tau,
            rho=self.rho,
            kappa=self.kappa,
            rank_r=self.rank,
            embed_k=self.n_components,
            l=self.n_neighbors,
            m=self.n_centroids,
            outer_max=self.max_iter,
            inner_pq_max=self.inner_max_iter,
            tol=self.tol,
            weight_update=self.weight_update,
        )

    def fit(self, X, y=None):
        """Learn feature scores from ``X``; ``y`` is ignored."""
        X = check_array(X, dtype=float, ensure_min_samples=4)
        self.n_features_in_ = X.shape[1]
        state = run(X, self._params(), seed=self.random_state, variant=self.variant)
        ranking = state.ranking()
        self.scores_ = ranking.scores
        self.ranking_ = ranking.order
        self.transform_matrix_ = state.transform
        self.objective_trace_ = list(state.objective_trace)
        self.err_trace_ = list(state.err_trace)
        self.centroid_indices_ = state.centroid_indices
        self.hyperedge_weights_ = state.hypergraph.weights
        self.n_iter_ = state.iteration
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "ranking_")
        count = self.n_features_to_select
        if not 1 <= count <= self.n_features_in_:
            raise ValueError(
                f"n_features_to_select must be in [1, {self.n_features_in_}], got {count}"
            )
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.ranking_[:count]] = True
        return mask
