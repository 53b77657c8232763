"""Collocation grid: nodes, differentiation, quadrature, even projector.

Oracles: closed-form node positions, numpy polynomial derivatives, and
exact integrals of monomials.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowlab import (cheb_coeffs, differentiate, even_projector, interpolate,
                     make_grid, sample_matrix, sup_norm)
from blowlab.errors import InvalidArgumentError


def test_nodes_closed_form():
    g = make_grid(8)
    j = np.arange(9)
    expected = 0.5 * (1.0 - np.cos(np.pi * j / 8))
    assert np.allclose(g.nodes, expected, atol=1e-15)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 1.0


def test_make_grid_validates():
    with pytest.raises(InvalidArgumentError):
        make_grid(1)
    with pytest.raises(InvalidArgumentError):
        make_grid(-4)


def test_make_grid_deterministic():
    a, b = make_grid(16), make_grid(16)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.D, b.D)
    assert np.array_equal(a.w, b.w)


@given(st.integers(min_value=0, max_value=12))
@settings(max_examples=13, deadline=None)
def test_derivative_exact_on_monomials(k):
    # D is exact for polynomials of degree <= N
    g = make_grid(16)
    vals = g.nodes ** k
    want = k * g.nodes ** (k - 1) if k > 0 else np.zeros_like(vals)
    assert np.max(np.abs(g.D @ vals - want)) < 5e-11


def test_derivative_spectral_on_exp():
    g = make_grid(32)
    err = np.max(np.abs(g.D @ np.exp(g.nodes) - np.exp(g.nodes)))
    assert err < 1e-10


def test_differentiate_matches_matrix():
    g = make_grid(16)
    v = np.sin(g.nodes)
    assert np.array_equal(differentiate(g, v), g.D @ v)


def test_quadrature_weights_exact_on_polynomials():
    # Clenshaw-Curtis on [0,1]: exact for degree <= N
    g = make_grid(16)
    for k in range(0, 17):
        got = np.sum(g.w * g.nodes ** k)
        assert abs(got - 1.0 / (k + 1)) < 1e-14, k


def test_interpolate_reproduces_polynomial():
    g = make_grid(12)
    rng = np.random.default_rng(5)
    c = rng.standard_normal(13)
    vals = np.polyval(c, g.nodes)
    pts = np.linspace(0.0, 1.0, 37)
    want = np.polyval(c, pts)
    got = interpolate(g, vals, pts)
    assert np.max(np.abs(got - want)) < 1e-10 * max(1, np.max(np.abs(want)))


def test_sample_matrix_consistent_with_interpolate():
    g = make_grid(12)
    v = np.cos(3 * g.nodes)
    pts = np.linspace(0.0, 1.0, 11)
    assert np.allclose(sample_matrix(g, pts) @ v, interpolate(g, v, pts),
                       atol=1e-13)


def test_interpolate_at_nodes_is_identity():
    g = make_grid(10)
    E = sample_matrix(g, g.nodes)
    assert np.max(np.abs(E - np.eye(11))) < 1e-10


def test_cheb_coeffs_picks_out_basis():
    # coefficients in T_k(1 - 2 rho): T_k itself -> unit vector e_k
    g = make_grid(16)
    x = 1.0 - 2.0 * g.nodes
    for k in (0, 1, 5, 16):
        vals = np.polynomial.chebyshev.chebval(x, np.eye(17)[k])
        c = cheb_coeffs(g, vals)
        want = np.eye(17)[k]
        assert np.max(np.abs(c - want)) < 1e-12, k


def test_even_projector_is_orthogonal_projector():
    g = make_grid(16)
    P = even_projector(g)
    assert np.max(np.abs(P @ P - P)) < 1e-12
    assert np.max(np.abs(P - P.T)) < 1e-12
    # trace = dimension of the even-regular subspace (polys in rho^2)
    assert abs(np.trace(P) - 9.0) < 1e-9


def test_even_projector_fixes_even_powers():
    g = make_grid(16)
    P = even_projector(g)
    for k in (0, 2, 6, 16):
        v = g.nodes ** k
        assert np.max(np.abs(P @ v - v)) < 1e-11, k


def test_even_projector_moves_odd_powers():
    g = make_grid(16)
    P = even_projector(g)
    v = g.nodes ** 3
    # projection of rho^3 is a genuinely different polynomial (the even
    # subspace approximates it well on [0,1], but not to roundoff)
    assert np.max(np.abs(P @ v - v)) > 1e-5


@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=1,
                max_size=8))
@settings(max_examples=25, deadline=None)
def test_even_projector_fixes_even_polynomials(coeffs):
    g = make_grid(16)
    P = even_projector(g)
    v = sum(c * g.nodes ** (2 * k) for k, c in enumerate(coeffs))
    v = np.asarray(v, dtype=float)
    scale = max(1.0, np.max(np.abs(v)))
    assert np.max(np.abs(P @ v - v)) < 1e-10 * scale


def test_sup_norm_sees_between_nodes():
    # a polynomial whose maximum falls between collocation points
    g = make_grid(8)
    v = g.nodes * (1.0 - g.nodes)  # max 0.25 at rho = 0.5 (not a node)
    got = sup_norm(g, v)
    assert abs(got - 0.25) < 1e-6
    assert got >= np.max(np.abs(v)) - 1e-15
