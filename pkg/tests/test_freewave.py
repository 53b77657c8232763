"""Free-flow window integrals: closed forms, causality, duality, semigroup.

Hand oracles: constant data evolves by

    (0, 1) -> first component e^{-tau/2} (1 - e^{-tau})
    (1, 0) -> first component e^{-tau/2}

and for (rho^2, rho^4) the window integrals are elementary:
h(s) = 3 s^2 integrates to b^3 - a^3 and s * s^4 to (b^6 - a^6) / 6.
"""

import numpy as np
import pytest

from blowlab import make_grid
from blowlab.coords import State, constant_state
from blowlab.errors import InvalidArgumentError
from blowlab.experiments import RandomDataSpec, random_state
from blowlab.freewave import (WindowSpec, free_strichartz_constant,
                              s0_first_component, s0_matrix, s0_row,
                              s0_state)
from blowlab.norms import h_norm


def _rand(g, member, n_modes=12, seed=7):
    return random_state(RandomDataSpec(seed=seed, member=member,
                                       n_modes=n_modes), g)


def test_window_limits():
    w = WindowSpec(0.3, 0.4)
    assert w.a == 1.0 - np.exp(-0.3) * 1.4
    assert w.b == 1.0 - np.exp(-0.3) * 0.6
    assert WindowSpec(5.0, 1.0).b == 1.0 - 0.0 * np.exp(-5.0)
    with pytest.raises(InvalidArgumentError):
        WindowSpec(-0.1, 0.5)
    with pytest.raises(InvalidArgumentError):
        WindowSpec(1.0, 1.5)


def test_constant_data_closed_forms(g16):
    zero_one = constant_state(g16, 0.0, 1.0)
    one_zero = constant_state(g16, 1.0, 0.0)
    for tau in (0.3, 1.0, 2.5, 6.0):
        got = s0_row(zero_one, tau)
        want = np.exp(-0.5 * tau) * (1.0 - np.exp(-tau))
        assert np.max(np.abs(got - want)) < 1e-8, tau
        got = s0_row(one_zero, tau)
        assert np.max(np.abs(got - np.exp(-0.5 * tau))) < 1e-8, tau


def test_constant_data_scalar_route(g16):
    st = constant_state(g16, 0.0, 1.0)
    tau, rho = 1.3, 0.37
    want = np.exp(-0.5 * tau) * (1.0 - np.exp(-tau))
    assert abs(s0_first_component(st, tau, rho) - want) < 1e-8


def test_polynomial_window_oracle(poly_state):
    # f = (rho^2, rho^4); both window limits positive at (tau, rho) = (1, 1/2)
    tau, rho = 1.0, 0.5
    a = 1.0 - np.exp(-tau) * (1.0 + rho)
    b = 1.0 - np.exp(-tau) * (1.0 - rho)
    assert a > 0
    want = np.exp(-0.5 * tau) / (2.0 * np.exp(-tau) * rho) * (
        (b ** 3 - a ** 3) + (b ** 6 - a ** 6) / 6.0)
    assert abs(s0_first_component(poly_state, tau, rho) - want) < 1e-10
    got_row = s0_row(poly_state, tau, rhos=np.array([rho]))
    assert abs(got_row[0] - want) < 1e-10


def test_time_zero_is_identity(g16):
    st = _rand(g16, 0)
    assert np.max(np.abs(s0_row(st, 0.0) - st.phi1)) < 1e-10


def test_causality_empty_window():
    # data supported in [0.8, 0.9]: before the window reaches the support
    # and after it has swept past, the first component vanishes exactly
    def bump(r):
        x = (r - 0.85) / 0.05
        return float(np.exp(-1.0 / (1.0 - x * x))) if abs(x) < 1.0 else 0.0

    zero = lambda r: 0.0
    # tau = 3: window [a, b] sits in [0.9004, 1], past the support
    assert s0_first_component((bump, zero, zero), 3.0, 0.5) == 0.0
    assert s0_first_component((zero, zero, bump), 3.0, 0.5) == 0.0
    # tau = 0.05, rho = 0.1: window below 0.15, short of the support
    assert s0_first_component((bump, zero, zero), 0.05, 0.1) == 0.0
    assert s0_first_component((zero, zero, bump), 0.05, 0.1) == 0.0


def test_scalar_and_matrix_routes_agree(g16):
    st = _rand(g16, 1)
    tau = 0.7
    row = s0_row(st, tau)
    for j in (0, 3, 8, 13, 16):
        scalar = s0_first_component(st, tau, g16.nodes[j])
        assert abs(row[j] - scalar) < 1e-11, j


def test_origin_limit_continuous(g16):
    st = _rand(g16, 2)
    tau = 0.9
    at0 = s0_first_component(st, tau, 0.0)
    near0 = s0_first_component(st, tau, 1e-5)
    assert abs(at0 - near0) < 1e-4
    assert abs(s0_row(st, tau)[0] - at0) < 1e-11


def test_matrix_rhos_default_and_custom(g16):
    M1, M2 = s0_matrix(g16, 0.4)
    assert M1.shape == (g16.N + 1, g16.N + 1) and M2.shape == M1.shape
    probe = np.array([0.2, 0.6])
    M1p, _ = s0_matrix(g16, 0.4, rhos=probe)
    assert M1p.shape == (2, g16.N + 1)
    with pytest.raises(InvalidArgumentError):
        s0_matrix(g16, -0.2)


def test_semigroup_property(g32):
    # S0(0.9) S0(0.4) f == S0(1.3) f on the first component
    for member in range(5):
        st = _rand(g32, member)
        mid = s0_state(st, 0.4)
        two_step = s0_row(mid, 0.9)
        one_step = s0_row(st, 1.3)
        assert np.max(np.abs(two_step - one_step)) < 1e-8, member


def test_s0_state_transport_consistency(g32):
    # phi2 of the reconstructed state satisfies the transport relation
    # against an independent finite difference of the first component
    st = _rand(g32, 3)
    tau, h = 1.1, 1e-4
    out = s0_state(st, tau)
    dtau = (s0_row(st, tau + h) - s0_row(st, tau - h)) / (2.0 * h)
    want = dtau + g32.nodes * (g32.D @ out.phi1) + 0.5 * out.phi1
    assert np.max(np.abs(out.phi2 - want)) < 1e-7


def test_s0_state_small_tau_guard(g16):
    st = constant_state(g16, 1.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        s0_state(st, 1e-4)


def test_free_strichartz_constant_closed_form(g16):
    # (0, 1): sup_rho is e^{-tau/2}(1 - e^{-tau}); its L^2_tau norm is
    # 3^{-1/2}, and h_norm of the data is 3^{-1/2}, so the ratio is 1
    st = constant_state(g16, 0.0, 1.0)
    assert abs(h_norm(st) - 3.0 ** -0.5) < 1e-12
    got = free_strichartz_constant([st], (2, np.inf), tau_max=40.0)
    assert abs(got - 1.0) < 5e-3


def test_free_strichartz_constant_validation(g16):
    with pytest.raises(InvalidArgumentError):
        free_strichartz_constant([], (2, np.inf))
