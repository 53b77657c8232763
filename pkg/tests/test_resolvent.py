"""Spectral-ODE fundamental systems, Wronskian, Green function, resolvent.

Oracles: zero-potential closed forms

    phi0(rho; lam) = rho^{-1} [ (1+rho)^{1/2-lam} - (1-rho)^{1/2-lam} ]
    phi1(rho; lam) = rho^{-1} (1+rho)^{1/2-lam}

for which the scaled Wronskian is exactly 1, and the Gamma-ratio closed
form of w0 for the linearized potential (itself validated against mpmath
elsewhere).  The resolvent identity is checked by applying the
independently assembled collocation generator to the quadrature output.
"""

import numpy as np
import pytest

from blowlab import make_grid
from blowlab.errors import (DegenerateParameterError,
                            EigenvalueSingularityError,
                            InconsistentWronskianError, InvalidArgumentError,
                            OutOfStripError)
from blowlab.experiments import RandomDataSpec, random_state
from blowlab.generator import assemble
from blowlab.hypergeom import w0_closed
from blowlab.norms import gram_matrix
from blowlab.resolvent import (LINEARIZED_POTENTIAL, ZERO_POTENTIAL,
                               SpectralPoint, apply_resolvent,
                               fundamental_pair, green, potential,
                               resolvent_rhs, solve_u0, solve_u1,
                               wronskian_w0)


def _phi0(rho, lam):
    return ((1.0 + rho) ** (0.5 - lam) - (1.0 - rho) ** (0.5 - lam)) / rho


def _phi1(rho, lam):
    return (1.0 + rho) ** (0.5 - lam) / rho


def test_spectral_point_strip():
    assert SpectralPoint(0.2 + 3j).in_strip()
    assert SpectralPoint(1j).in_strip()
    assert not SpectralPoint(0.5 + 3j).in_strip()
    assert not SpectralPoint(-0.01).in_strip()


def test_potential_presets():
    assert potential("zero") is ZERO_POTENTIAL
    assert potential("linearized") is LINEARIZED_POTENTIAL
    assert LINEARIZED_POTENTIAL(0.3) == -3.75
    assert potential(lambda r: r).name == "custom"
    with pytest.raises(InvalidArgumentError):
        potential("cubic")
    with pytest.raises(InvalidArgumentError):
        potential(17)


def test_u0_normalization_at_origin(g16):
    for lam in (0.1, 0.2 + 4j):
        u0, u0p = solve_u0(lam, "linearized", g16)
        assert abs(u0[0] - (1.0 - 2.0 * lam)) < 1e-12, lam
        assert u0p[0] == 0.0


def test_u1_normalization_at_lightcone(g16):
    for lam in (0.1, 0.2 + 4j):
        u1, _ = solve_u1(lam, "linearized", g16)
        assert abs(u1[-1] - 2.0 ** (0.5 - lam)) < 1e-12, lam


def test_u0_constant_at_gauge_eigenvalue(g16):
    # lam = 1 with the linearized potential: mu + V = 0 and the constant
    # solves the equation, matching the constant first component of the
    # eigenvalue-1 mode
    u0, _ = solve_u0(1.0, "linearized", g16, strict=False)
    sel = g16.nodes <= 0.9
    assert np.max(np.abs(u0[sel] - u0[0])) <= 1e-6 * abs(u0[0])


def test_branches_parallel_at_eigenvalue(g16):
    pair = fundamental_pair(1.0, "linearized", g16, strict=False)
    sel = (g16.nodes >= 0.1) & (g16.nodes <= 0.9)
    a = pair.u0[sel] / pair.u0[1]
    b = pair.u1[sel] / pair.u1[1]
    assert np.max(np.abs(a - b)) <= 1e-5


def test_u0_zero_potential_closed_form():
    g = make_grid(32)
    lam = 1j
    u0, _ = solve_u0(lam, "zero", g)
    sel = (g.nodes >= 0.1) & (g.nodes <= 0.9)
    want = _phi0(g.nodes[sel], lam)
    # phi0(0+) = 1 - 2 lam, so phi0 carries the u0 normalization already
    assert np.max(np.abs(u0[sel] - want)) < 1e-8


def test_u1_zero_potential_closed_form():
    g = make_grid(32)
    lam = 1j
    u1, _ = solve_u1(lam, "zero", g)
    sel = (g.nodes >= 0.1) & (g.nodes <= 0.9)
    want = _phi1(g.nodes[sel], lam)
    # phi1(1) = 2^(1/2-lam) matches the lightcone normalization
    assert np.max(np.abs(u1[sel] - want)) < 1e-8


def test_u1_degenerate_exponent(g16):
    with pytest.raises(DegenerateParameterError):
        solve_u1(-0.5, "linearized", g16, strict=False)


def test_strip_enforcement(g16):
    with pytest.raises(OutOfStripError):
        solve_u0(0.4 + 2j, "linearized", g16)
    with pytest.raises(OutOfStripError):
        fundamental_pair(-0.2, "linearized", g16)
    # strict=False admits diagnostics outside the strip
    u0, _ = solve_u0(0.4 + 2j, "linearized", g16, strict=False)
    assert np.all(np.isfinite(u0))


def test_wronskian_zero_potential_is_one(g16):
    pair = fundamental_pair(1j, "zero", g16)
    assert abs(wronskian_w0(pair) - 1.0) < 1e-8


def test_wronskian_vanishes_at_eigenvalue(g16):
    pair = fundamental_pair(1.0, "linearized", g16, strict=False)
    assert abs(pair.w0) <= 1e-6


def test_wronskian_matches_gamma_closed_form(g16):
    for lam in (0.1, 0.1 + 5j, 0.25 - 8j):
        pair = fundamental_pair(lam, "linearized", g16)
        got, spread = wronskian_w0(pair, lam=lam, with_spread=True)
        assert abs(got - w0_closed(lam)) < 1e-6, lam
        assert spread < 1e-6


def test_wronskian_guards(g16):
    pair = fundamental_pair(0.1, "linearized", g16)
    with pytest.raises(InvalidArgumentError):
        wronskian_w0(pair, lam=0.2)
    pair.spread = 1.0  # simulate branches that do not solve the same ODE
    with pytest.raises(InconsistentWronskianError):
        wronskian_w0(pair)


def test_green_continuous_across_diagonal(g16):
    lam = 0.1 + 2j
    pair = fundamental_pair(lam, "linearized", g16)
    s = 0.5
    left = green(s - 1e-8, s, lam, pair)
    right = green(s + 1e-8, s, lam, pair)
    assert abs(left - right) < 1e-6 * abs(left)


def test_green_zero_potential_closed_form(g16):
    lam = 1j
    pair = fundamental_pair(lam, "zero", g16)
    rho, s = 0.3, 0.6
    got = green(rho, s, lam, pair)
    want = (s ** 2 * (1.0 - s ** 2) ** (-0.5 + lam)
            / (1.0 - 2.0 * lam) * _phi0(rho, lam) * _phi1(s, lam))
    assert abs(got - want) / abs(want) < 1e-7


def test_green_derivative_jump(g16):
    # d/drho G(rho, s) jumps by -1/(1 - s^2) across rho = s; evaluated
    # through the branch derivatives, this is the scaled-Wronskian
    # identity and must hold to solver accuracy
    lam = 0.1 + 2j
    pair = fundamental_pair(lam, "linearized", g16)
    s = 0.5
    pref = s ** 2 * (1.0 - s ** 2) ** (-0.5 + lam) / ((1.0 - 2.0 * lam)
                                                      * pair.w0)
    u0, u0p = (v[0] for v in pair.u0_at(s))
    u1, u1p = (v[0] for v in pair.u1_at(s))
    jump = pref * (u0 * u1p - u0p * u1)
    assert abs(jump - (-1.0 / (1.0 - s ** 2))) < 1e-6


def test_green_derivative_jump_finite_difference(g16):
    # same identity through the public green(), one-sided second order
    lam = 0.1 + 2j
    pair = fundamental_pair(lam, "linearized", g16)
    s, h = 0.5, 1e-4

    def gv(r):
        return green(r, s, lam, pair)

    # one-sided stencils that do not sample the diagonal point itself
    dplus = (-2.5 * gv(s + h) + 4.0 * gv(s + 2 * h) - 1.5 * gv(s + 3 * h)) / h
    dminus = (2.5 * gv(s - h) - 4.0 * gv(s - 2 * h) + 1.5 * gv(s - 3 * h)) / h
    assert abs((dplus - dminus) - (-1.0 / (1.0 - s ** 2))) < 1e-5


def test_green_domain_and_eigenvalue_guards(g16):
    lam = 0.1 + 2j
    pair = fundamental_pair(lam, "linearized", g16)
    with pytest.raises(InvalidArgumentError):
        green(0.0, 0.5, lam, pair)
    with pytest.raises(InvalidArgumentError):
        green(0.5, 1.0, lam, pair)
    with pytest.raises(InvalidArgumentError):
        green(0.3, 0.6, 0.2 + 2j, pair)
    pair.w0 = 1e-12  # simulate sitting on an eigenvalue
    with pytest.raises(EigenvalueSingularityError):
        green(0.3, 0.6, lam, pair)


def _identity_residual(g, lam, f):
    """Relative H-error of (lam - L) R(lam) f - f via the dense generator."""
    pair = fundamental_pair(lam, "linearized", g)
    rhs = resolvent_rhs(g, f.phi1, f.phi2, lam)
    out = apply_resolvent(lam, rhs, pair)
    A = assemble(g, "full").matrix
    M = gram_matrix(g)
    y = np.concatenate([out.phi1, out.phi2])
    fvec = np.concatenate([f.phi1, f.phi2])
    resid = lam * y - A @ y - fvec

    def hnorm(v):
        return np.sqrt(abs(np.conj(v) @ (M @ v)))

    return hnorm(resid) / hnorm(fvec)


def test_resolvent_identity_random_data(g32):
    lam = 0.1 + 5j
    for member in range(3):
        f = random_state(RandomDataSpec(seed=21, member=member,
                                        n_modes=12), g32)
        assert _identity_residual(g32, lam, f) < 1e-6, member


def test_resolvent_identity_other_points(g32):
    f = random_state(RandomDataSpec(seed=22, member=0, n_modes=12), g32)
    for lam in (0.05 + 0.5j, 0.2 + 10j, 1.0 / 3.0 + 1j):
        assert _identity_residual(g32, lam, f) < 1e-6, lam


def test_resolvent_rhs_validation(g16):
    with pytest.raises(InvalidArgumentError):
        resolvent_rhs(g16, np.zeros(5), np.zeros(5), 0.1)
    bad = np.full(g16.N + 1, np.nan)
    with pytest.raises(InvalidArgumentError):
        resolvent_rhs(g16, bad, bad, 0.1)


def test_apply_resolvent_consistency_guard(g16, g32):
    lam = 0.1 + 2j
    pair = fundamental_pair(lam, "linearized", g16)
    rhs = resolvent_rhs(g16, np.ones(g16.N + 1), np.zeros(g16.N + 1), 0.3 + 2j)
    with pytest.raises(InvalidArgumentError):
        apply_resolvent(lam, rhs, pair)
