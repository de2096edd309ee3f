"""Slow reference implementations used as test oracles (explicit loops only)."""

import math

import numpy as np


def pairwise_sum(h, w, y):
    """0.5 * sum_ij alpha_ij |y_i - y_j|^2 with
    alpha_ij = sum_e w_e h_ie h_je / (delta_e d_i)."""
    m, n_edges = len(h), len(h[0])
    delta = [sum(h[v][e] for v in range(m)) for e in range(n_edges)]
    deg = [sum(w[e] * h[v][e] for e in range(n_edges)) for v in range(m)]
    total = 0.0
    for i in range(m):
        for j in range(m):
            alpha = sum(w[e] * h[i][e] * h[j][e] / (delta[e] * deg[i]) for e in range(n_edges))
            dist = sum((y[i][a] - y[j][a]) ** 2 for a in range(len(y[i])))
            total += alpha * dist
    return 0.5 * total


def brute_incidence(c, l):
    m = len(c)
    dist = [[math.dist(c[i], c[j]) for j in range(m)] for i in range(m)]
    pairs = [dist[i][j] for i in range(m) for j in range(i + 1, m)]
    sigma = sum(pairs) / len(pairs)
    h = np.zeros((m, m))
    for i in range(m):
        others = sorted((dist[i][j], j) for j in range(m) if j != i)[:l]
        h[i][i] = 1.0
        for dd, j in others:
            h[j][i] = math.exp(-(dd**2) / sigma**2)
    return h, sigma


def naive_objective(x, centroid_idx, lap, t, d_diag, z, w, b_diag, tau, kappa, rho):
    """Every term by explicit summation."""
    n, d = len(x), len(x[0])
    k = len(t[0])
    xt = [[sum(x[i][f] * t[f][a] for f in range(d)) for a in range(k)] for i in range(n)]
    y = [xt[i] for i in centroid_idx]
    m = len(y)
    psi = sum(y[i][a] * lap[i][j] * y[j][a] for i in range(m) for j in range(m) for a in range(k))
    ups = sum((math.sqrt(d_diag[i]) * xt[i][a] - z[i][a]) ** 2 for i in range(n) for a in range(k))
    ww = sum(v * v for v in w)
    theta = sum(b_diag[f] * t[f][a] ** 2 for f in range(d) for a in range(k))
    return psi + tau * ups + kappa * ww + rho * theta


def knn_brute(train_x, train_y, test_x, k):
    out = []
    for row in test_x:
        dists = []
        for idx, tr in enumerate(train_x):
            dists.append((sum((a - b) ** 2 for a, b in zip(tr, row)), idx))
        dists.sort()
        votes = {}
        for _, idx in dists[:k]:
            votes[train_y[idx]] = votes.get(train_y[idx], 0) + 1
        top = max(votes.values())
        out.append(min(lab for lab, v in votes.items() if v == top))
    return np.array(out)
