"""Discrete generator: assembly, spectrum, gauge projection, filtering.

Oracle for assembly: the operator applied to (rho^2, rho^4) by hand,

  first row:  -rho (rho^2)' - (1/2) rho^2 + rho^4 = -2.5 rho^2 + rho^4
  second row: lap(rho^2) - rho (rho^4)' - 1.5 rho^4 [+ 3.75 rho^2]
            = 6 - 5.5 rho^4 [+ 3.75 rho^2]

with lap f = f'' + (2/rho) f'.
"""

import numpy as np
import pytest

from blowlab import make_grid
from blowlab.errors import InvalidArgumentError, SpectralFailureError
from blowlab.generator import (assemble, cached_projection, eigenpairs,
                               gauge_vector, projection, spurious_filter)


def _apply(g, mode, phi1, phi2):
    A = assemble(g, mode).matrix
    out = A @ np.concatenate([phi1, phi2])
    n = g.N + 1
    return out[:n], out[n:]


def test_full_matrix_matches_hand_oracle(g16):
    r = g16.nodes
    d1, d2 = _apply(g16, "full", r ** 2, r ** 4)
    assert np.max(np.abs(d1 - (-2.5 * r ** 2 + r ** 4))) < 1e-10
    assert np.max(np.abs(d2 - (6.0 - 5.5 * r ** 4 + 3.75 * r ** 2))) < 1e-9


def test_free_matrix_matches_hand_oracle(g16):
    r = g16.nodes
    d1, d2 = _apply(g16, "free", r ** 2, r ** 4)
    assert np.max(np.abs(d1 - (-2.5 * r ** 2 + r ** 4))) < 1e-10
    assert np.max(np.abs(d2 - (6.0 - 5.5 * r ** 4))) < 1e-9


def test_full_minus_free_is_potential_block(g16):
    F = assemble(g16, "full").matrix
    Z = assemble(g16, "free").matrix
    n = g16.N + 1
    diff = F - Z
    want = np.zeros_like(diff)
    want[n:, :n] = 3.75 * np.eye(n)
    assert np.max(np.abs(diff - want)) < 1e-12


def test_origin_row_uses_limit(g16):
    # lap phi1 at rho=0 for phi1 = rho^2 must give 3*2 = 6 (the 2/rho
    # term contributes 2 f''(0) in the limit), not a division by zero
    r = g16.nodes
    _, d2 = _apply(g16, "free", r ** 2, np.zeros_like(r))
    assert abs(d2[0] - 6.0) < 1e-9


def test_assemble_validates_mode(g16):
    with pytest.raises(InvalidArgumentError):
        assemble(g16, "quadratic")


def test_gauge_vector_is_eigenvector(g32):
    A = assemble(g32, "full").matrix
    v = gauge_vector(g32)
    # residual floor is D^2 roundoff (entries ~N^4)
    assert np.max(np.abs(A @ v - v)) < 1e-8


def test_eigenpairs_sorted_and_contain_gauge(g32):
    op = assemble(g32, "full")
    pairs = eigenpairs(op)
    vals = np.array([v for v, _ in pairs])
    assert np.all(np.diff(vals.real) <= 1e-12)
    assert np.min(np.abs(vals - 1.0)) < 1e-8
    assert np.min(np.abs(vals + 1.0)) < 1e-6


def test_spurious_filter_rejects_grid_artifact(g32):
    op = assemble(g32, "full")
    pairs = eigenpairs(op)
    # the artifact eigenvalue scales like N^2 and sits near 0.92 N^2
    art = max(pairs, key=lambda p: p[0].real)
    assert art[0].real > 100.0
    assert not spurious_filter(op, art)


def test_spurious_filter_accepts_gauge(g32):
    op = assemble(g32, "full")
    pairs = eigenpairs(op)
    gauge = min(pairs, key=lambda p: abs(p[0] - 1.0))
    assert spurious_filter(op, gauge)


def test_accepted_spectrum_in_half_plane_free(g32):
    # free generator: accepted eigenvalues have Re <= 0 (+ tolerance)
    op = assemble(g32, "free")
    for val, vec in eigenpairs(op):
        if spurious_filter(op, (val, vec)):
            assert val.real <= 1e-8, val


def test_accepted_gap_full(g32):
    # accepted full spectrum: gauge at 1, everything else Re <= 1 - gap
    op = assemble(g32, "full")
    accepted = [val for val, vec in eigenpairs(op)
                if spurious_filter(op, (val, vec))]
    accepted = np.array(accepted)
    rest = accepted[np.abs(accepted - 1.0) > 1e-6]
    assert rest.real.max() < 0.6


def test_projection_properties(g32):
    proj = cached_projection(g32)
    P = proj.matrix()
    assert np.max(np.abs(P @ P - P)) < 1e-10
    v = gauge_vector(g32)
    assert np.max(np.abs(P @ v - v)) < 1e-10
    assert abs(proj.amplitude(v) - 1.0) < 1e-12


def test_projection_commutes_with_generator(g32):
    A = assemble(g32, "full").matrix
    P = cached_projection(g32).matrix()
    scale = np.max(np.abs(A))
    assert np.max(np.abs(P @ A - A @ P)) < 1e-9 * scale


def test_projection_requires_full_mode(g16):
    with pytest.raises(InvalidArgumentError):
        projection(assemble(g16, "free"))


def test_projection_kills_projected_data(g32, random_state_factory):
    proj = cached_projection(g32)
    f = random_state_factory(g32).stack()
    out = f - proj.apply(f)
    assert abs(proj.amplitude(out)) < 1e-12 * max(1.0, abs(proj.amplitude(f)))
