"""Discrete generator of the similarity-variable evolution and its spectrum.

The free generator acts on stacked (phi1, phi2) node samples as

    (phi1, phi2) -> (-rho phi1' - phi1/2 + phi2,
                     phi1'' + (2/rho) phi1' - rho phi2' - (3/2) phi2),

and the full generator adds the potential term (15/4) phi1 to the second
row (the linearization of the quintic nonlinearity at the constant
profile).  At rho = 0 the singular (2/rho) d/drho is replaced by its
even-regular limit 2 d^2/drho^2; no condition is imposed at rho = 1,
where the characteristics flow outward.

The full generator has the exact eigenvalue 1 with constant eigenvector
(2, 3) (time translation of the blowup family); `projection` builds the
rank-one spectral projection onto it using the adjoint eigenvector with
respect to the quadrature energy inner product.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    InvalidArgumentError,
    NumericalFailureError,
    SpectralFailureError,
)
from .grid import Grid, cheb_coeffs, make_grid
from .norms import gram_matrix

MODES = ("free", "full")


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense 2(N+1) x 2(N+1) collocation realization of the generator."""

    grid: Grid
    mode: str
    matrix: np.ndarray


def assemble(g, mode):
    """Assemble the collocation generator in the given mode."""
    if mode not in MODES:
        raise InvalidArgumentError("mode must be one of %r" % (MODES,))
    n = g.N + 1
    rho, D = g.nodes, g.D
    D2 = D @ D
    eye = np.eye(n)
    B11 = -rho[:, None] * D - 0.5 * eye
    B12 = eye
    B21 = D2.copy()
    B21[1:, :] += (2.0 / rho[1:, None]) * D[1:, :]
    B21[0, :] = 3.0 * D2[0, :]
    if mode == "full":
        B21 += 3.75 * eye
    B22 = -rho[:, None] * D - 1.5 * eye
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = B11
    A[:n, n:] = B12
    A[n:, :n] = B21
    A[n:, n:] = B22
    return OperatorMatrix(grid=g, mode=mode, matrix=A)


def gauge_vector(g):
    """Stacked constant pair (2, 3): the exact eigenvalue-1 eigenvector."""
    n = g.N + 1
    return np.concatenate([2.0 * np.ones(n), 3.0 * np.ones(n)])


def eigenpairs(op):
    """Full eigendecomposition, sorted by descending real part."""
    try:
        vals, vecs = scipy.linalg.eig(op.matrix)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError("eigendecomposition failed: %s" % exc) from exc
    if not np.all(np.isfinite(vals)):
        raise NumericalFailureError("non-finite eigenvalues returned")
    order = np.argsort(-vals.real)
    return [(vals[i], vecs[:, i]) for i in order]


@dataclass
class Projection:
    """Rank-one spectral projection onto the gauge mode.

    right       -- stacked constant pair (2, 3)
    left        -- adjoint eigenvector g* in the energy inner product
                   (node samples, stacked), <f, g*>_energy = functional @ f
    functional  -- Euclidean covector y with amplitude(f) = y @ f and
                   y @ right = 1 (so P right = right)
    """

    grid: Grid
    right: np.ndarray
    left: np.ndarray
    functional: np.ndarray

    def amplitude(self, f):
        """Coefficient of f along the gauge mode."""
        return self.functional @ np.asarray(f)

    def apply(self, f):
        """P f = <f, g*> g."""
        return self.amplitude(f) * self.right

    def matrix(self):
        return np.outer(self.right, self.functional)


def projection(op):
    """Build the gauge-mode projection from the full generator.

    The adjoint eigenvector with respect to the energy inner product
    <u, v> = v^T M u satisfies M g* = y with A^T y = y, so the amplitude
    functional is f -> y^T f; g* itself is recovered by least squares
    (M is singular only on the zero-measure origin row of the second
    component, where the rho^2 weight vanishes).
    """
    if op.mode != "full":
        raise InvalidArgumentError("projection requires the full generator")
    vals, vecs = scipy.linalg.eig(op.matrix.T)
    i = int(np.argmin(np.abs(vals - 1.0)))
    if abs(vals[i] - 1.0) > 1e-6:
        raise SpectralFailureError(
            "no adjoint eigenvalue within 1e-6 of 1 (closest %r)" % (vals[i],)
        )
    y = vecs[:, i]
    if np.max(np.abs(y.imag)) > 1e-8 * np.max(np.abs(y.real)):
        raise SpectralFailureError("adjoint gauge eigenvector unexpectedly complex")
    y = y.real
    gvec = gauge_vector(op.grid)
    y = y / (y @ gvec)
    M = gram_matrix(op.grid)
    gstar, *_ = np.linalg.lstsq(M, y, rcond=None)
    return Projection(grid=op.grid, right=gvec, left=gstar, functional=y)


_projection_cache = {}


def cached_projection(g):
    """Memoized projection for a grid order (deterministic per N)."""
    proj = _projection_cache.get(g.N)
    if proj is None:
        proj = projection(assemble(g, "full"))
        _projection_cache[g.N] = proj
    return proj


def _tail_fraction(g, component):
    """Energy fraction of the top-third Chebyshev coefficients."""
    c = cheb_coeffs(g, component)
    e = np.abs(c) ** 2
    total = e.sum()
    if total == 0.0:
        return 0.0
    cut = (2 * (g.N + 1)) // 3
    return float(e[cut:].sum() / total)


def spurious_filter(op, eigenpair, refined_values=None, move_tol=1e-4,
                    tail_tol=0.1):
    """Accept an eigenpair as physical.

    Requires eigenvalue stability under grid refinement N -> 2N (move
    smaller than move_tol against the closest refined eigenvalue) and a
    decaying Chebyshev coefficient tail in both eigenvector components
    (top-third energy below tail_tol).  refined_values may carry a
    precomputed refined spectrum to amortize the reassembly over many
    pairs.
    """
    lam, vec = eigenpair
    if refined_values is None:
        op2 = assemble(make_grid(2 * op.grid.N), op.mode)
        refined_values = scipy.linalg.eigvals(op2.matrix)
    if np.min(np.abs(refined_values - lam)) > move_tol:
        return False
    n = op.grid.N + 1
    vec = np.asarray(vec)
    scale = np.max(np.abs(vec))
    if scale == 0.0:
        return False
    for comp in (vec[:n], vec[n:]):
        if _tail_fraction(op.grid, comp) > tail_tol:
            return False
    return True
