"""Chebyshev collocation on the unit interval.

Nodes are Chebyshev-Gauss-Lobatto points mapped to [0, 1], so both
endpoints are nodes: the origin (where radial regularity is imposed)
and the lightcone rho = 1 (where the evolution degenerates to outflow).
Differentiation is the standard dense collocation matrix, quadrature is
Clenshaw-Curtis on the same nodes, and off-node evaluation uses the
barycentric second formula.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class Grid:
    """Collocation grid of order N (N+1 nodes) on [0, 1].

    nodes   -- rho_j = (1 - cos(j pi / N)) / 2, increasing, rho_0 = 0, rho_N = 1
    D       -- first-derivative matrix acting on node samples
    w       -- Clenshaw-Curtis weights for integral over [0, 1] (sum to 1)
    bary    -- barycentric interpolation weights
    """

    N: int
    nodes: np.ndarray
    D: np.ndarray
    w: np.ndarray
    bary: np.ndarray

    @property
    def size(self):
        return self.N + 1


def _cheb_matrix(N):
    # Trefethen's cheb.m: nodes x_j = cos(j pi / N) (decreasing) and the
    # derivative matrix with respect to x.
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    c = np.ones(N + 1)
    c[0] = 2.0
    c[N] = 2.0
    c = c * (-1.0) ** j
    X = np.tile(x, (N + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(N + 1))
    D = D - np.diag(D.sum(axis=1))
    return x, D


def _clenshaw_curtis(N):
    # Weights on [-1, 1] for the N+1 Gauss-Lobatto nodes (Trefethen's
    # clencurt.m).  Symmetric, so node orientation does not matter.
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    ii = np.arange(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
        v -= np.cos(N * theta[ii]) / (N * N - 1)
    else:
        w[0] = w[N] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[ii]) / (4 * k * k - 1)
    w[ii] = 2.0 * v / N
    return w


def make_grid(N):
    """Build the order-N collocation grid on [0, 1]."""
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidArgumentError("grid order must be an integer >= 2")
    x, Dx = _cheb_matrix(N)
    rho = (1.0 - x) / 2.0
    rho[0] = 0.0
    rho[N] = 1.0
    # chain rule: rho = (1 - x)/2 so d/drho = -2 d/dx
    D = -2.0 * Dx
    w = _clenshaw_curtis(N) / 2.0
    j = np.arange(N + 1)
    bary = (-1.0) ** j
    bary[0] *= 0.5
    bary[N] *= 0.5
    return Grid(N=N, nodes=rho, D=D, w=w, bary=bary)


def _check_length(g, values):
    values = np.asarray(values)
    if values.shape != (g.N + 1,):
        raise InvalidArgumentError(
            "expected %d node samples, got shape %r" % (g.N + 1, values.shape)
        )
    return values


def differentiate(g, values):
    """Derivative of the interpolant at the nodes (D @ values)."""
    values = _check_length(g, values)
    return g.D @ values


def interpolate(g, values, x):
    """Evaluate the barycentric interpolant of node samples at x in [0, 1].

    x may be a scalar or an array; values at points that coincide with a
    node are returned exactly.
    """
    values = _check_length(g, values)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > 1.0):
        raise InvalidArgumentError("evaluation point outside [0, 1]")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    diff = xa[:, None] - g.nodes[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        wq = g.bary[None, :] / diff
        out = (wq @ values) / wq.sum(axis=1)
    hit_row, hit_col = np.nonzero(diff == 0.0)
    out[hit_row] = values[hit_col]
    return out[0] if scalar else out


def sup_norm(g, values, refine=4):
    """Sup of |interpolant| over the nodes plus >= refine*N uniform points."""
    values = _check_length(g, values)
    m = max(int(refine) * g.N, 1)
    xs = np.linspace(0.0, 1.0, m + 1)
    best = float(np.max(np.abs(interpolate(g, values, xs))))
    return max(best, float(np.max(np.abs(values))))


def sample_matrix(g, xs):
    """Matrix E with E @ values = barycentric interpolant evaluated at xs."""
    xs = np.asarray(xs, dtype=float)
    diff = xs[:, None] - g.nodes[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        W = g.bary[None, :] / diff
        E = W / W.sum(axis=1)[:, None]
    hit_row, hit_col = np.nonzero(diff == 0.0)
    E[hit_row, :] = 0.0
    E[hit_row, hit_col] = 1.0
    return E


def cheb_coeffs(g, values):
    """Chebyshev coefficients of the interpolant.

    Returns c with  f(rho) = sum_k c[k] T_k(1 - 2 rho)  (the grid's natural
    Chebyshev variable), via the discrete cosine transform on the
    Gauss-Lobatto angles.
    """
    values = _check_length(g, np.asarray(values))
    N = g.N
    j = np.arange(N + 1)
    C = np.cos(np.outer(j, j) * np.pi / N)
    f = values.astype(complex if np.iscomplexobj(values) else float).copy()
    f[0] *= 0.5
    f[N] *= 0.5
    c = (2.0 / N) * (C @ f)
    c[0] *= 0.5
    c[N] *= 0.5
    return c


def even_projector(g):
    """Orthogonal projector onto the even-regular collocation subspace.

    The discrete realization of smooth radial functions on the ball is
    the space of polynomials in rho^2 of degree <= N (sampled at the
    nodes); the projector is Q Q^T from a reduced QR of the even-Chebyshev
    Vandermonde T_k(2 rho^2 - 1), k = 0..N//2.  On that subspace it is the
    identity, and it annihilates the odd-order collocation content that
    feeds the single grid-artifact mode of the radial Laplacian at the
    origin.
    """
    K = g.N // 2
    s = 2.0 * g.nodes ** 2 - 1.0
    V = np.polynomial.chebyshev.chebvander(s, K)
    Q, _ = np.linalg.qr(V)
    return Q @ Q.T
