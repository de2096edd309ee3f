"""Alternating minimisation of the hypergraph point-weighting objective.

The objective over the low-rank transform ``T = P Q`` and hyperedge
weights ``w`` is::

    tr(T^T C^T L C T) + tau |D^1/2 X T - Z|_F^2 + kappa |w|^2 + rho tr(T^T B T)

where ``C`` holds the centroid rows of ``X``, ``L`` is the hypergraph
Laplacian, ``D`` weights every point by its affinity to its centroid, ``Z``
is a rank-k factor of the weighted Gram matrix and ``B`` is the
reweighting diagonal that turns ``tr(T^T B T)`` into a smooth surrogate of
the l2,1 norm of ``T``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from . import hypergraph as hg
from .clustering import ClusterModel, kmeans, point_model, snap_centroids
from .dataset import DataMatrix
from .exceptions import ConstructionError, DivergenceError, RankDeficiencyError

logger = logging.getLogger(__name__)

VARIANTS = ("full", "identity_d", "binary_h", "no_global")


@dataclass
class HpwlParams:
    """Hyperparameters. ``None`` entries are resolved from the data shape.

    Parameters
    ----------
    tau : float
        Weight of the global correlation-preserving term.
    rho : float
        Weight of the l2,1 sparsity term.
    kappa : float
        Ridge penalty on the hyperedge weights; must be positive.
    rank_r : int, optional
        Rank bound of ``T``; defaults to ``embed_k``.
    embed_k : int, optional
        Embedding dimension; defaults to ``min(m, 30)``.
    l : int
        Neighbours per hyperedge (clipped to ``m - 1``).
    m : int, optional
        Number of k-means clusters; defaults to ``floor(n / 10)`` in ``[2, n]``.
    outer_max, inner_pq_max : int
        Iteration caps of the outer loop and of the P/Q/B loop.
    tol : float
        Threshold on the normalised change of ``T`` (both loops).
    eps_b : float
        Floor on row norms when refreshing ``B``.
    weight_update : {"safeguarded", "literal"}
        ``"safeguarded"`` descends on the Laplacian term (whose sign is
        ``-tr(R W S)``) and rejects any pair update that would raise the
        exact objective once vertex degrees are recomputed. ``"literal"``
        applies the closed form to ``+tr(R W S)`` unconditionally.
    """

    tau: float = 1.0
    rho: float = 1.0
    kappa: float = 1.0
    rank_r: Optional[int] = None
    embed_k: Optional[int] = None
    l: int = 5
    m: Optional[int] = None
    outer_max: int = 20
    inner_pq_max: int = 10
    tol: float = 1e-4
    eps_b: float = 1e-8
    kmeans_max_iter: int = 100
    weight_update: str = "safeguarded"

    def validate(self) -> "HpwlParams":
        if self.tau < 0 or self.rho < 0:
            raise ValueError("tau and rho must be non-negative")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.l < 1:
            raise ValueError("l must be >= 1")
        for name in ("rank_r", "embed_k", "m"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.rank_r is not None and self.embed_k is not None and self.rank_r > self.embed_k:
            raise ValueError("rank_r must not exceed embed_k")
        if self.outer_max < 1 or self.inner_pq_max < 1:
            raise ValueError("iteration caps must be >= 1")
        if not self.tol > 0 or not self.eps_b > 0:
            raise ValueError("tol and eps_b must be positive")
        if self.weight_update not in ("safeguarded", "literal"):
            raise ValueError(f"unknown weight_update {self.weight_update!r}")
        return self

    def n_clusters(self, n: int) -> int:
        m = self.m if self.m is not None else n // 10
        return int(min(max(m, 2), n))

    def resolve(self, n: int, d: int, m: int) -> "HpwlParams":
        """Concrete copy for a data set with ``m`` distinct centroids."""
        self.validate()
        k = self.embed_k if self.embed_k is not None else min(m, 30, d, n)
        r = self.rank_r if self.rank_r is not None else k
        if not 1 <= r <= k <= d:
            raise ValueError(f"need 1 <= rank_r <= embed_k <= d, got r={r}, k={k}, d={d}")
        if k > n:
            raise ValueError(f"embed_k={k} exceeds the number of samples {n}")
        return replace(self, embed_k=int(k), rank_r=int(r), l=int(min(self.l, m - 1)), m=int(m))


@dataclass
class FeatureRanking:
    scores: np.ndarray
    order: np.ndarray

    def top(self, count: int) -> np.ndarray:
        return self.order[:count]


@dataclass
class SolverState:
    """Everything the alternating updates read or write.

    ``descent_traces[i]`` lists ``Psi + tau*Upsilon + rho*|T|_21`` after every
    P/Q/B iteration of outer iteration ``i``; when a previous ``T`` exists the
    list starts with its value under the current weights.
    """

    params: HpwlParams
    p: Optional[np.ndarray]
    q: np.ndarray
    b_diag: np.ndarray
    d_diag: np.ndarray
    z_k: np.ndarray
    hypergraph: hg.SoftHypergraph
    clusters: ClusterModel
    objective_trace: list = field(default_factory=list)
    err_trace: list = field(default_factory=list)
    descent_traces: list = field(default_factory=list)
    weight_traces: list = field(default_factory=list)
    iteration: int = 0
    converged: bool = False

    @property
    def centroid_indices(self) -> np.ndarray:
        return self.clusters.centroid_indices

    @property
    def transform(self) -> np.ndarray:
        if self.p is None:
            return np.zeros((self.b_diag.shape[0], self.q.shape[1]))
        return self.p @ self.q

    @property
    def laplacian(self) -> np.ndarray:
        return hg.laplacian(self.hypergraph)

    @property
    def laplacian_sym(self) -> np.ndarray:
        return hg.symmetrize(self.laplacian)

    def ranking(self) -> FeatureRanking:
        return feature_scores(self.p, self.q) if self.p is not None else feature_scores(self.transform)


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=float)


# -- fixed quantities -------------------------------------------------------


def build_point_weights(x, model: ClusterModel, sigma: float) -> np.ndarray:
    """1 for centroid rows, Gaussian affinity to the own centroid otherwise."""
    x = _values(x)
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    own = model.centroids[model.assignments]
    diff = x - own
    w = hg.gaussian_affinity(np.einsum("ij,ij->i", diff, diff), sigma)
    w[model.centroid_indices] = 1.0
    return w


def build_global_target(x, d_diag: np.ndarray, embed_k: int) -> np.ndarray:
    """Rank-k factor ``Z`` with ``Z Z^T`` closest to ``(k/d) D^1/2 X X^T D^1/2``.

    Eigenvalues are taken in descending order (ties keep the lower
    eigenvector index) and every eigenvector is signed so that its largest
    magnitude entry is positive.
    """
    x = _values(x)
    n, d = x.shape
    if embed_k > n:
        raise ValueError(f"embed_k={embed_k} exceeds the number of samples {n}")
    xs = np.sqrt(d_diag)[:, None] * x
    gram = (embed_k / d) * (xs @ xs.T)
    vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    order = np.argsort(-vals, kind="stable")[:embed_k]
    vals, vecs = np.clip(vals[order], 0.0, None), vecs[:, order]
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.where(vecs[lead, np.arange(embed_k)] < 0, -1.0, 1.0)
    return vecs * signs * np.sqrt(vals)


def refresh_b(p: np.ndarray, q: np.ndarray, eps_b: float = 1e-8) -> np.ndarray:
    norms = np.linalg.norm(p @ q, axis=1)
    return 1.0 / (2.0 * np.maximum(norms, eps_b))


# -- P and Q ----------------------------------------------------------------


def _use_fast(x: np.ndarray, rho: float, path: str) -> bool:
    if path == "direct":
        return False
    if path == "fast":
        if rho <= 0:
            raise ValueError("the n x n path needs rho > 0")
        return True
    return x.shape[1] > x.shape[0] and rho > 0


def system_matrix(state: SolverState, x) -> np.ndarray:
    """The d x d matrix ``C^T L' C + tau X^T D X + rho B``."""
    x = _values(x)
    c = x[state.centroid_indices]
    prm = state.params
    m = c.T @ state.laplacian_sym @ c
    m += prm.tau * (x.T * state.d_diag) @ x
    m[np.diag_indices_from(m)] += prm.rho * state.b_diag
    return 0.5 * (m + m.T)


def _n_system(state: SolverState, x: np.ndarray, delta_n: Optional[np.ndarray]) -> np.ndarray:
    """``L'_n + tau D`` (n x n), the data-space counterpart of the system matrix."""
    if delta_n is None:
        delta_n = hg.extend_laplacian(state.laplacian_sym, state.centroid_indices, x.shape[0])
    k = delta_n.copy()
    k[np.diag_indices_from(k)] += state.params.tau * state.d_diag
    return k


def _target_rhs(state: SolverState) -> np.ndarray:
    return np.sqrt(state.d_diag)[:, None] * state.z_k


def solve_system(state: SolverState, x, delta_n=None, path: str = "auto") -> np.ndarray:
    """``M^-1 X^T D^1/2 Z`` through either the d x d or the n x n route."""
    x = _values(x)
    v = _target_rhs(state)
    if not _use_fast(x, state.params.rho, path):
        return scipy.linalg.solve(system_matrix(state, x), x.T @ v, assume_a="sym")
    rho = state.params.rho
    binv_xt = x.T / (rho * state.b_diag)[:, None]  # (rho B)^-1 X^T
    inner = _n_system(state, x, delta_n) @ (x @ binv_xt)
    inner[np.diag_indices_from(inner)] += 1.0
    return binv_xt @ np.linalg.solve(inner, v)


def _check_rank(a: np.ndarray, r: int, what: str):
    if np.linalg.matrix_rank(a) < r:
        raise RankDeficiencyError(f"{what} lost full rank {r}; re-initialise the factors")


def update_p(state: SolverState, x, delta_n=None, path: str = "auto") -> np.ndarray:
    """Exact minimiser over P for fixed Q, w and B.

    ``P = tau M^-1 X^T D^1/2 Z Q^T (Q Q^T)^-1``.
    """
    prm = state.params
    d = _values(x).shape[1]
    if prm.tau == 0:
        return np.zeros((d, prm.rank_r))
    q = state.q
    _check_rank(q, prm.rank_r, "Q")
    q_pinv = scipy.linalg.solve(q @ q.T, q, assume_a="pos").T
    return prm.tau * solve_system(state, x, delta_n, path) @ q_pinv


def update_q(state: SolverState, x, delta_n=None, path: str = "auto") -> np.ndarray:
    """Exact minimiser over Q for fixed P, w and B.

    ``Q = tau (P^T M P)^-1 P^T X^T D^1/2 Z``; equal to
    ``tau P^+ M^-1 X^T D^1/2 Z`` whenever the columns of ``M^-1 X^T D^1/2 Z``
    lie in the range of ``P`` (always the case right after a P update when
    ``rank_r == embed_k``).
    """
    x = _values(x)
    prm = state.params
    if prm.tau == 0:
        return np.zeros((prm.rank_r, prm.embed_k))
    p = state.p
    _check_rank(p, prm.rank_r, "P")
    v = _target_rhs(state)
    xp = x @ p
    if _use_fast(x, prm.rho, path):
        ptmp = prm.rho * (p.T * state.b_diag) @ p + xp.T @ _n_system(state, x, delta_n) @ xp
    else:
        ptmp = p.T @ system_matrix(state, x) @ p
    ptmp = 0.5 * (ptmp + ptmp.T)
    return prm.tau * scipy.linalg.solve(ptmp, xp.T @ v, assume_a="sym")


# -- hyperedge weights ------------------------------------------------------


def weight_coefficients(state: SolverState, x) -> np.ndarray:
    """Linear coefficients of the weight subproblem.

    With ``Y = C T``, ``R = Y^T Dv^-1 H`` and ``S = De^-1 H^T Y`` the
    coefficient of hyperedge ``i`` is ``sum_j R[j, i] * S[i, j]``.
    """
    h = state.hypergraph
    y = _values(x)[state.centroid_indices] @ state.transform
    inv_v = hg.inv_or_zero(h.vertex_degrees)
    r = y.T @ (inv_v[:, None] * h.incidence)
    s = (h.incidence.T @ y) / h.edge_degrees[:, None]
    return np.einsum("ji,ij->i", r, s)


def pair_update(omega_i: float, omega_j: float, kappa: float, c: float) -> tuple[float, float]:
    """Minimise ``a*wi + b*wj + kappa(wi^2 + wj^2)`` on ``wi + wj = c, wi, wj >= 0``."""
    gap = omega_i - omega_j
    if 2 * kappa * c <= gap:
        return 0.0, c
    if 2 * kappa * c <= -gap:
        return c, 0.0
    wi = min(max((2 * kappa * c - gap) / (4 * kappa), 0.0), c)
    return wi, c - wi


def weight_subobjective(omega: np.ndarray, w: np.ndarray, kappa: float) -> float:
    return float(omega @ w + kappa * w @ w)


def laplacian_term(state: SolverState, x, weights: np.ndarray) -> float:
    """``tr(Y^T L Y) + kappa |w|^2`` for candidate weights, degrees recomputed."""
    graph = hg.degrees(replace(state.hypergraph, weights=weights))
    y = _values(x)[state.centroid_indices] @ state.transform
    return float(np.sum(y * (hg.laplacian(graph) @ y)) + state.params.kappa * weights @ weights)


def update_w(state: SolverState, x, record: Optional[list] = None) -> np.ndarray:
    """One sweep of pairwise coordinate descent over consecutive hyperedges.

    If ``record`` is a list, the weight vector after every pair update is
    appended to it.
    """
    omega = weight_coefficients(state, x)
    safeguarded = state.params.weight_update == "safeguarded"
    if safeguarded:
        omega = -omega
        current = laplacian_term(state, x, state.hypergraph.weights)
    w = state.hypergraph.weights.copy()
    kappa = state.params.kappa
    for i in range(len(w) - 1):
        old = w[i], w[i + 1]
        w[i], w[i + 1] = pair_update(omega[i], omega[i + 1], kappa, w[i] + w[i + 1])
        if safeguarded and (w[i], w[i + 1]) != old:
            value = laplacian_term(state, x, w)
            if value > current:
                w[i], w[i + 1] = old
            else:
                current = value
        if record is not None:
            record.append(w.copy())
    return w


# -- objective --------------------------------------------------------------


def objective_terms(state: SolverState, x, delta_n=None) -> dict:
    """Individual terms of the objective, evaluated with ``L`` as built."""
    x = _values(x)
    t = state.transform
    if delta_n is not None:
        xt = x @ t
        psi = float(np.sum(xt * (delta_n @ xt)))
    else:
        y = x[state.centroid_indices] @ t
        psi = float(np.sum(y * (state.laplacian @ y)))
    resid = np.sqrt(state.d_diag)[:, None] * (x @ t) - state.z_k
    row_norms = np.linalg.norm(t, axis=1)
    w = state.hypergraph.weights
    return {
        "psi": psi,
        "upsilon": float(np.sum(resid**2)),
        "weights": float(w @ w),
        "theta": float(state.b_diag @ row_norms**2),
        "l21": float(row_norms.sum()),
    }


def objective(state: SolverState, x, delta_n=None, sparsity: str = "surrogate") -> float:
    """Full objective.

    ``sparsity="surrogate"`` uses ``rho tr(T^T B T)`` with ``B`` frozen at its
    current value; ``sparsity="l21"`` uses ``rho |T|_21`` instead, which is the
    form that decreases monotonically over the iterations.
    """
    terms = objective_terms(state, x, delta_n)
    prm = state.params
    sparse = terms["theta"] if sparsity == "surrogate" else terms["l21"]
    return (
        terms["psi"]
        + prm.tau * terms["upsilon"]
        + prm.kappa * terms["weights"]
        + prm.rho * sparse
    )


def descent_value(state: SolverState, x) -> float:
    """``Psi + tau*Upsilon + rho*|T|_21``: the quantity the P/Q/B loop decreases."""
    terms = objective_terms(state, x)
    return terms["psi"] + state.params.tau * terms["upsilon"] + state.params.rho * terms["l21"]


def feature_scores(p: np.ndarray, q: Optional[np.ndarray] = None) -> FeatureRanking:
    """Row norms of ``T = P Q``, ranked descending (ties: lower index first)."""
    t = p if q is None else p @ q
    scores = np.linalg.norm(t, axis=1)
    return FeatureRanking(scores, np.argsort(-scores, kind="stable"))


# -- driver -----------------------------------------------------------------


def initialize(x, params: HpwlParams, seed: int = 0, variant: str = "full") -> SolverState:
    """Cluster, build the hypergraph and all fixed matrices."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    x = _values(x)
    n, d = x.shape
    if n < 4:
        raise ValueError(f"need at least 4 samples, got {n}")
    params.validate()

    if variant == "identity_d":
        # every point is a vertex; embedding size still follows the clustered setup
        model = point_model(x)
        prm = params.resolve(n, d, params.n_clusters(n))
        prm = replace(prm, m=model.n_clusters, l=int(min(params.l, model.n_clusters - 1)))
    else:
        model = kmeans(x, params.n_clusters(n), seed=seed, max_iter=params.kmeans_max_iter)
        model = snap_centroids(x, model)
        if model.n_clusters < 2:
            raise ConstructionError("fewer than 2 distinct centroids after snapping")
        prm = params.resolve(n, d, model.n_clusters)
    if variant == "no_global":
        prm = replace(prm, tau=0.0)

    graph = hg.build_incidence(model.centroids, prm.l)
    if variant == "binary_h":
        graph = hg.binarize(graph)
    if variant == "identity_d":
        d_diag = np.ones(n)
    else:
        d_diag = build_point_weights(x, model, graph.sigma)
    z_k = build_global_target(x, d_diag, prm.embed_k)

    q0 = np.eye(prm.rank_r, prm.embed_k)
    return SolverState(
        params=prm,
        p=None,
        q=q0,
        b_diag=np.full(d, 0.5),
        d_diag=d_diag,
        z_k=z_k,
        hypergraph=graph,
        clusters=model,
    )


def pq_step(state: SolverState, x, delta_n=None, path: str = "auto") -> SolverState:
    """One P update, one Q update and a B refresh, in place."""
    state.p = update_p(state, x, delta_n, path)
    state.q = update_q(state, x, delta_n, path)
    state.b_diag = refresh_b(state.p, state.q, state.params.eps_b)
    return state


def _check_finite(value: float, state: SolverState, where: str):
    if not np.isfinite(value):
        raise DivergenceError(
            f"non-finite objective at outer iteration {state.iteration} ({where}); "
            f"objective trace so far: {state.objective_trace}"
        )


def run(x, params: HpwlParams, seed: int = 0, variant: str = "full",
        path: str = "auto") -> SolverState:
    """Full alternating minimisation; returns the final solver state."""
    x = _values(x)
    state = initialize(x, params, seed, variant)
    prm = state.params
    d, k = x.shape[1], prm.embed_k
    t_prev = np.zeros((d, k))

    for outer in range(1, prm.outer_max + 1):
        state.iteration = outer
        delta_n = None
        if _use_fast(x, prm.rho, path):
            delta_n = hg.extend_laplacian(state.laplacian_sym, state.centroid_indices, x.shape[0])

        descent = [descent_value(state, x)] if state.p is not None else []
        t_old = state.transform
        for _ in range(prm.inner_pq_max):
            pq_step(state, x, delta_n, path)
            descent.append(descent_value(state, x))
            _check_finite(descent[-1], state, "P/Q update")
            t_new = state.transform
            scale = max(np.linalg.norm(t_old), np.finfo(float).tiny)
            if np.linalg.norm(t_new - t_old) / scale < prm.tol:
                break
            t_old = t_new
        state.descent_traces.append(descent)

        pairs: list = []
        w = update_w(state, x, record=pairs)
        state.weight_traces.append(pairs)
        state.hypergraph = hg.degrees(replace(state.hypergraph, weights=w))
        isolated = hg.isolated_vertices(state.hypergraph)
        if len(isolated):
            logger.warning(
                "vertices %s lost all hyperedge weight; their degree is pseudo-inverted",
                isolated.tolist(),
            )

        obj = objective(state, x, sparsity="l21")
        _check_finite(obj, state, "weight update")
        state.objective_trace.append(obj)

        t = state.transform
        err = float(np.sum((t - t_prev) ** 2) / (d * k))
        state.err_trace.append(err)
        t_prev = t
        logger.debug("outer %d: objective=%.6g err=%.3g", outer, obj, err)
        # err(1) is measured against the zero start, so it cannot signal convergence
        if outer >= 2 and err < prm.tol:
            state.converged = True
            break
    return state


def fit(x, params: Optional[HpwlParams] = None, seed: int = 0,
        variant: str = "full") -> FeatureRanking:
    """Rank the columns of ``x`` (no labels are used)."""
    return run(x, params or HpwlParams(), seed, variant).ranking()
