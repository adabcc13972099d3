"""Independent dense reference computations used by the test suite.

Nothing here goes through the block assembly, quadrature or banded solvers
of the package; process noise is integrated exactly with polynomial
arithmetic and everything else is dense linear algebra.
"""

from itertools import combinations

import numpy as np
from numpy.polynomial import Polynomial


def q_poly(kind, q_c=1.0, t_total=20.0):
    if kind == "constant":
        return Polynomial([q_c])
    half = t_total / 2.0
    return Polynomial([half**2, -2 * half, 1.0])


def exact_noise_block(t_a, t_b, kind, dim, q_c=1.0, t_total=20.0):
    q = q_poly(kind, q_c, t_total)
    r = Polynomial([t_b, -1.0])

    def integral(p):
        f = p.integ()
        return f(t_b) - f(t_a)

    q11, q12, q22 = integral(q * r * r), integral(q * r), integral(q)
    eye = np.eye(dim)
    return np.block([[q11 * eye, q12 * eye], [q12 * eye, q22 * eye]])


def phi(dt, dim):
    """Matrix exponential of the nilpotent double-integrator generator."""
    f = np.zeros((2 * dim, 2 * dim))
    f[:dim, dim:] = np.eye(dim)
    # exp(F dt) = I + F dt since F^2 = 0
    return np.eye(2 * dim) + f * dt


def dense_precision(n_support, dim, t_total, kind, q_c=1.0, sigma0=1e-6, sigmaN=1e-6):
    """Stacked [F^-1; 0..0 I]^T diag(K0^-1, Q^-1.., KN^-1) [F^-1; 0..0 I]."""
    s = 2 * dim
    n = n_support
    dt = t_total / (n - 1)
    f_inv = np.eye(n * s)
    for i in range(1, n):
        f_inv[i * s:(i + 1) * s, (i - 1) * s:i * s] = -phi(dt, dim)
    goal_row = np.zeros((s, n * s))
    goal_row[:, (n - 1) * s:] = np.eye(s)
    big_f = np.vstack([f_inv, goal_row])
    blocks = [np.eye(s) / sigma0]
    for i in range(n - 1):
        q = exact_noise_block(i * dt, (i + 1) * dt, kind, dim, q_c, t_total)
        blocks.append(np.linalg.inv(q))
    blocks.append(np.eye(s) / sigmaN)
    q_inv = np.zeros(((n + 1) * s, (n + 1) * s))
    for k, b in enumerate(blocks):
        q_inv[k * s:(k + 1) * s, k * s:(k + 1) * s] = b
    return big_f.T @ q_inv @ big_f


def forward_covariance(times, dim, kind, q_c=1.0, t_total=20.0, k0=None):
    """Joint covariance of the unconditioned LTV-SDE at sorted ``times``.

    Marginals propagate as P_b = Phi P_a Phi^T + Q_{a,b}; cross terms are
    K(t_b, t_a) = Phi(t_b, t_a) P_a.
    """
    s = 2 * dim
    m = len(times)
    marg = [np.eye(s) if k0 is None else k0]
    for a in range(m - 1):
        ph = phi(times[a + 1] - times[a], dim)
        q = exact_noise_block(times[a], times[a + 1], kind, dim, q_c, t_total)
        marg.append(ph @ marg[-1] @ ph.T + q)
    cov = np.zeros((m * s, m * s))
    for b in range(m):
        for a in range(b + 1):
            blk = phi(times[b] - times[a], dim) @ marg[a]
            cov[b * s:(b + 1) * s, a * s:(a + 1) * s] = blk
            cov[a * s:(a + 1) * s, b * s:(b + 1) * s] = blk.T
    return cov


def goal_conditioned_covariance(n_support, dim, t_total, kind, q_c=1.0, sigma0=1e-6, sigmaN=1e-6):
    """Propagate from the start forward, then condition on a noisy goal observation."""
    times = np.linspace(0.0, t_total, n_support)
    s = 2 * dim
    prior = forward_covariance(times, dim, kind, q_c, t_total, k0=sigma0 * np.eye(s))
    h = np.zeros((s, n_support * s))
    h[:, -s:] = np.eye(s)
    innov = h @ prior @ h.T + sigmaN * np.eye(s)
    gain = prior @ h.T @ np.linalg.inv(innov)
    return prior - gain @ h @ prior


def conditioning_coeffs(t_support, tau, dim, kind, q_c=1.0, t_total=20.0):
    """E[theta(tau) | support states] = C @ stacked support states."""
    times = np.sort(np.append(t_support, tau))
    idx = int(np.flatnonzero(times == tau)[0])
    cov = forward_covariance(times, dim, kind, q_c, t_total)
    s = 2 * dim
    keep = [k for k in range(len(times)) if k != idx]
    rows = np.arange(idx * s, (idx + 1) * s)
    cols = np.concatenate([np.arange(k * s, (k + 1) * s) for k in keep])
    return np.linalg.solve(cov[np.ix_(cols, cols)], cov[np.ix_(cols, rows)]).T


def brute_force_sdf(occ, resolution):
    """O(n^2) signed center-to-center distances, capped at the diagonal."""
    h, w = occ.shape
    cap = np.hypot(w, h) * resolution
    rr, cc = np.mgrid[0:h, 0:w]
    out = np.empty((h, w))
    occ_pts = np.argwhere(occ)
    free_pts = np.argwhere(~occ)
    for r in range(h):
        for c in range(w):
            targets = free_pts if occ[r, c] else occ_pts
            if len(targets) == 0:
                out[r, c] = -cap if occ[r, c] else cap
                continue
            d = np.sqrt(((targets - [r, c]) ** 2).sum(axis=1)).min() * resolution
            out[r, c] = -d if occ[r, c] else d
    return np.clip(out, -cap, cap)


def grid_edges(n):
    edges = []
    for r in range(n):
        for c in range(n):
            if c + 1 < n:
                edges.append(frozenset(((r, c), (r, c + 1))))
            if r + 1 < n:
                edges.append(frozenset(((r, c), (r + 1, c))))
    return edges


def enumerate_spanning_trees(n):
    """All spanning trees of the n x n grid graph by exhaustive subset search."""
    edges = grid_edges(n)
    cells = [(r, c) for r in range(n) for c in range(n)]
    index = {cell: k for k, cell in enumerate(cells)}
    trees = []
    for subset in combinations(edges, len(cells) - 1):
        parent = list(range(len(cells)))

        def find(a):
            while parent[a] != a:
                a = parent[a]
            return a

        ok = True
        for e in subset:
            a, b = (index[c] for c in e)
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        if ok:
            trees.append(frozenset(subset))
    return trees


def kirchhoff_count(n):
    """Matrix-tree theorem: any cofactor of the grid Laplacian."""
    cells = [(r, c) for r in range(n) for c in range(n)]
    index = {cell: k for k, cell in enumerate(cells)}
    lap = np.zeros((len(cells), len(cells)))
    for e in grid_edges(n):
        a, b = (index[c] for c in e)
        lap[a, a] += 1
        lap[b, b] += 1
        lap[a, b] -= 1
        lap[b, a] -= 1
    return int(round(np.linalg.det(lap[1:, 1:])))
