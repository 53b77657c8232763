"""Similarity coordinates, the blowup constant, and the exact gauge family.

The similarity variables are tau = -log(T - t) + log T and rho = r/(T - t);
in them the blowing-up constant solution of the quintic wave equation is the
constant pair (c3, c3/2) with c3 = (3/4)^(1/4).  States in this package are
perturbations of that pair sampled at the collocation nodes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainTooSmallError,
    GaugeSingularError,
    InvalidArgumentError,
)
from .grid import Grid, interpolate

#: amplitude of the constant self-similar profile, (3/4)^(1/4)
C3 = 0.75 ** 0.25


@dataclass(frozen=True)
class BlowupConstant:
    """Carrier for the profile amplitude c3 = (3/4)^(1/4)."""

    c3: float = C3


@dataclass(frozen=True)
class CoordinateFrame:
    """Similarity frame anchored at blowup-time parameter T > 0, base time 0."""

    T: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidArgumentError("frame parameter T must be positive")


@dataclass
class PhysicalData:
    """Radial data (f, g) = (position, velocity) on the ball of radius R.

    f and g are either callables r -> value (closed form, assumed
    vectorized over numpy arrays) or node samples on ``grid`` scaled to
    [0, R]; sampled data is evaluated with the grid's barycentric rule.
    """

    R: float
    f: object
    g: object
    grid: Grid = None

    def __post_init__(self):
        if not self.R > 0:
            raise InvalidArgumentError("data radius must be positive")
        if (not callable(self.f) or not callable(self.g)) and self.grid is None:
            raise InvalidArgumentError("sampled data requires a grid")

    def _eval(self, which, r):
        if callable(which):
            return np.asarray(which(np.asarray(r, dtype=float)), dtype=float)
        return interpolate(self.grid, np.asarray(which, dtype=float),
                           np.asarray(r, dtype=float) / self.R)

    def eval_f(self, r):
        return self._eval(self.f, r)

    def eval_g(self, r):
        return self._eval(self.g, r)


def _as_component(a):
    a = np.asarray(a)
    if not np.iscomplexobj(a):
        a = a.astype(float)
    return a


@dataclass
class State:
    """Perturbation (phi1, phi2) of the constant profile on a grid.

    Components are real node samples in the evolution modules; the
    resolvent returns complex-valued States at complex spectral points.
    """

    grid: Grid
    phi1: np.ndarray
    phi2: np.ndarray

    def __post_init__(self):
        self.phi1 = _as_component(self.phi1)
        self.phi2 = _as_component(self.phi2)
        n = self.grid.N + 1
        if self.phi1.shape != (n,) or self.phi2.shape != (n,):
            raise InvalidArgumentError("component length must match the grid")

    def stack(self):
        """Concatenated (phi1, phi2) vector of length 2(N+1)."""
        return np.concatenate([self.phi1, self.phi2])

    @classmethod
    def from_stack(cls, grid, vec):
        n = grid.N + 1
        vec = _as_component(vec)
        if vec.shape != (2 * n,):
            raise InvalidArgumentError("stacked vector length must be 2(N+1)")
        return cls(grid, vec[:n], vec[n:])

    def copy(self):
        return State(self.grid, self.phi1.copy(), self.phi2.copy())


def zero_state(g):
    """The constant blowup solution itself (zero perturbation)."""
    n = g.N + 1
    return State(g, np.zeros(n), np.zeros(n))


def constant_state(g, c1, c2):
    """rho-independent perturbation (c1, c2)."""
    ones = np.ones(g.N + 1)
    return State(g, c1 * ones, c2 * ones)


def to_similarity(data, frame, g):
    """Map physical data into the similarity frame at tau = 0.

    phi1 = sqrt(T) f(T rho) - c3,  phi2 = T^(3/2) g(T rho) - c3/2.
    The data must cover the initial lightcone slice: R >= T.
    """
    if data.R < frame.T:
        raise DomainTooSmallError(
            "data radius %g does not cover the lightcone slice T=%g"
            % (data.R, frame.T)
        )
    r = frame.T * g.nodes
    phi1 = np.sqrt(frame.T) * data.eval_f(r) - C3
    phi2 = frame.T ** 1.5 * data.eval_g(r) - 0.5 * C3
    return State(g, phi1, phi2)


def gauge_solution(T_prime, frame, tau, g):
    """Exact similarity representation of the blowup at time T', seen in
    the frame anchored at T.

    Returns the perturbation State; it is rho-independent:
        psi1 = c3 sqrt(T) e^(-tau/2) q^(-1/2),
        psi2 = (c3/2) T^(3/2) e^(-3 tau/2) q^(-3/2),
        q = T' - T + T e^(-tau),
    minus the constant profile.  Requires q > 0.
    """
    T = frame.T
    q = T_prime - T + T * np.exp(-tau)
    if not q > 0:
        raise GaugeSingularError(
            "gauge solution at T'=%g already blown up at tau=%g" % (T_prime, tau)
        )
    psi1 = C3 * np.sqrt(T) * np.exp(-0.5 * tau) / np.sqrt(q)
    psi2 = 0.5 * C3 * T ** 1.5 * np.exp(-1.5 * tau) / q ** 1.5
    return constant_state(g, psi1 - C3, psi2 - 0.5 * C3)


def gauge_time_derivative(T_prime, frame, tau, g):
    """Analytic d/dtau of gauge_solution, for stepper validation."""
    T = frame.T
    q = T_prime - T + T * np.exp(-tau)
    if not q > 0:
        raise GaugeSingularError("gauge solution blown up at tau=%g" % tau)
    e = np.exp(-tau)
    dq = -T * e
    psi1 = C3 * np.sqrt(T) * np.exp(-0.5 * tau) / np.sqrt(q)
    psi2 = 0.5 * C3 * T ** 1.5 * np.exp(-1.5 * tau) / q ** 1.5
    d1 = psi1 * (-0.5 - 0.5 * dq / q)
    d2 = psi2 * (-1.5 - 1.5 * dq / q)
    return constant_state(g, d1, d2)


def from_similarity(state, frame, tau):
    """Physical slice at similarity time tau >= 0.

    Returns (t, u) with t = T(1 - e^(-tau)) and u the samples of the
    solution at radii (T - t) rho_j.
    """
    if tau < 0:
        raise InvalidArgumentError("similarity time must be nonnegative")
    T = frame.T
    t = T * (1.0 - np.exp(-tau))
    u = (T - t) ** -0.5 * (state.phi1 + C3)
    return t, u
