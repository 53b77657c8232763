"""Time integration of the similarity-coordinate systems.

Three right-hand sides share one stepper: the free transport system, its
linearization around the constant blowup profile (adds (15/4) phi1), and
the full nonlinear system (adds the quintic-expansion nonlinearity).
Stepping is classical RK4 with a per-step projection onto the
even-regular collocation sector, which is exact on physical states and
removes the origin grid-artifact mode; linearized/free trajectories are
advanced by a precomputed one-step matrix so long ensembles amount to a
few matrix powers.
"""

from dataclasses import dataclass, field

import numpy as np

from .coords import C3, State
from .errors import IntegrationFailureError, InvalidArgumentError, UndefinedRateError
from .generator import assemble, cached_projection
from .grid import Grid, even_projector, sup_norm
from .norms import h_norm

MODES = ("free", "linearized", "nonlinear")


@dataclass(frozen=True)
class EvolveConfig:
    """Stepper configuration.

    dt defaults to 0.25/N^2 (set when integrate sees the grid);
    escape_threshold caps sup|phi1| for blow-control, dealias optionally
    zeroes the top sixth of Chebyshev coefficients each step, and
    deflate_gauge removes the gauge-mode component every step (for long
    projected linearized runs where roundoff reseeds e^tau growth).
    """

    mode: str
    dt: float = None
    tau_max: float = 20.0
    record_stride: int = 1
    escape_threshold: float = 10.0
    dealias: bool = False
    deflate_gauge: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError("mode must be one of %r" % (MODES,))
        if self.dt is not None and not self.dt > 0:
            raise InvalidArgumentError("dt must be positive")
        if not self.tau_max > 0:
            raise InvalidArgumentError("tau_max must be positive")
        if int(self.record_stride) < 1:
            raise InvalidArgumentError("record_stride must be >= 1")
        if not self.escape_threshold > 0:
            raise InvalidArgumentError("escape_threshold must be positive")


@dataclass
class Trajectory:
    """Recorded trajectory with per-record diagnostics.

    amplitudes holds the gauge-mode coefficient a(tau) of each record;
    escape_tau is the time the sup-norm cap was exceeded (None if not).
    """

    grid: Grid
    taus: np.ndarray
    states: list
    h_norms: np.ndarray
    sup_phi1: np.ndarray
    amplitudes: np.ndarray
    escaped: bool = False
    escape_tau: float = None

    def __post_init__(self):
        m = len(self.taus)
        if not (len(self.states) == len(self.h_norms) == len(self.sup_phi1)
                == len(self.amplitudes) == m):
            raise InvalidArgumentError("trajectory record lengths disagree")
        if m > 1 and not np.all(np.diff(self.taus) > 0):
            raise InvalidArgumentError("trajectory taus must be increasing")


def _nonlin(p):
    """Quintic-expansion nonlinearity, Horner form."""
    return p * p * (10.0 * C3 ** 3 + p * (10.0 * C3 ** 2 + p * (5.0 * C3 + p)))


def _rhs_stack(g, Y, mode):
    """Right-hand side on stacked samples; Y of shape (2n,) or (2n, B)."""
    n = g.N + 1
    p1, p2 = Y[:n], Y[n:]
    D = g.D
    dp1 = D @ p1
    dp2 = D @ p2
    ddp1 = D @ dp1
    if Y.ndim == 1:
        rho = g.nodes
        inv = 2.0 / g.nodes[1:]
    else:
        rho = g.nodes[:, None]
        inv = 2.0 / g.nodes[1:, None]
    d1 = -rho * dp1 - 0.5 * p1 + p2
    lap = ddp1.copy()
    lap[1:] += inv * dp1[1:]
    lap[0] = 3.0 * ddp1[0]
    d2 = lap - rho * dp2 - 1.5 * p2
    if mode != "free":
        d2 = d2 + 3.75 * p1
    if mode == "nonlinear":
        d2 = d2 + _nonlin(p1)
    return np.concatenate([d1, d2], axis=0)


def rhs(state, mode):
    """State-shaped right-hand side increment."""
    if mode not in MODES:
        raise InvalidArgumentError("mode must be one of %r" % (MODES,))
    out = _rhs_stack(state.grid, state.stack(), mode)
    return State.from_stack(state.grid, out)


def rk4_step(g, Y, dt, mode):
    """One classical RK4 step on stacked samples (vectorized over columns)."""
    k1 = _rhs_stack(g, Y, mode)
    k2 = _rhs_stack(g, Y + 0.5 * dt * k1, mode)
    k3 = _rhs_stack(g, Y + 0.5 * dt * k2, mode)
    k4 = _rhs_stack(g, Y + dt * k3, mode)
    return Y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


_component_cache = {}


def component_projector(g, dealias=False):
    """Per-component stabilizer: even-regular sector, optional dealias."""
    key = (g.N, bool(dealias))
    P = _component_cache.get(key)
    if P is None:
        P = even_projector(g)
        if dealias:
            P = P @ _dealias_matrix(g)
        _component_cache[key] = P
    return P


def _dealias_matrix(g):
    """Zero the top sixth of Chebyshev coefficients (values -> values)."""
    N = g.N
    j = np.arange(N + 1)
    C = np.cos(np.outer(j, j) * (np.pi / N))
    h = np.ones(N + 1)
    h[0] = h[N] = 0.5
    analysis = (2.0 / N) * (h[:, None] * C * h[None, :])
    mask = np.ones(N + 1)
    mask[N + 1 - (N + 1) // 6:] = 0.0
    return C @ (mask[:, None] * analysis)


def stack_projector(g, dealias=False):
    """Block-diagonal stabilizer acting on stacked (phi1, phi2)."""
    P = component_projector(g, dealias)
    n = g.N + 1
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = P
    S[n:, n:] = P
    return S


_step_cache = {}


def _linear_step_matrix(g, mode, dt, dealias, deflate):
    """Projected one-step RK4 matrix for the linear modes."""
    key = (g.N, mode, dt, bool(dealias), bool(deflate))
    M = _step_cache.get(key)
    if M is None:
        A = assemble(g, "full" if mode == "linearized" else "free").matrix
        m = A.shape[0]
        M = np.eye(m)
        term = np.eye(m)
        for k in range(1, 5):
            term = (dt / k) * (A @ term)
            M = M + term
        M = stack_projector(g, dealias) @ M
        if deflate:
            M = (np.eye(m) - cached_projection(g).matrix()) @ M
        _step_cache[key] = M
    return M


_stride_cache = {}


def _stride_matrix(g, mode, dt, dealias, deflate, stride):
    key = (g.N, mode, dt, bool(dealias), bool(deflate), int(stride))
    M = _stride_cache.get(key)
    if M is None:
        Mstep = _linear_step_matrix(g, mode, dt, dealias, deflate)
        M = np.linalg.matrix_power(Mstep, int(stride))
        _stride_cache[key] = M
    return M


def _step_count(tau_max, dt):
    steps = tau_max / dt
    n = int(round(steps))
    if abs(steps - n) > 1e-9 * max(1.0, abs(steps)):
        n = int(np.ceil(steps))
    return max(n, 1)


def integrate(initial, cfg):
    """Integrate one state, recording every record_stride-th step.

    Stops at tau_max or when sup|phi1| over the nodes exceeds
    escape_threshold (recorded as escape); a non-finite value raises
    IntegrationFailureError carrying the last good tau.
    """
    g = initial.grid
    dt = cfg.dt if cfg.dt is not None else 0.25 / g.N ** 2
    nsteps = _step_count(cfg.tau_max, dt)
    stride = int(cfg.record_stride)
    proj = cached_projection(g)
    functional = proj.functional

    taus, states, hs, sups, amps = [], [], [], [], []
    escaped = False
    escape_tau = None

    def record(k, Y):
        st = State.from_stack(g, Y)
        taus.append(k * dt)
        states.append(st)
        hs.append(h_norm(st))
        sups.append(sup_norm(g, st.phi1))
        amps.append(float(functional @ Y))

    Y = initial.stack().astype(float)
    record(0, Y)

    if cfg.mode in ("free", "linearized"):
        Mstride = _stride_matrix(g, cfg.mode, dt, cfg.dealias, cfg.deflate_gauge,
                                 stride)
        Mstep = _linear_step_matrix(g, cfg.mode, dt, cfg.dealias,
                                    cfg.deflate_gauge)
        k = 0
        while k < nsteps:
            if k + stride <= nsteps:
                Y = Mstride @ Y
                k += stride
            else:
                Y = Mstep @ Y
                k += 1
            if not np.all(np.isfinite(Y)):
                raise IntegrationFailureError(
                    "non-finite state in %s mode" % cfg.mode, last_tau=taus[-1])
            record(k, Y)
            if np.max(np.abs(Y[:g.N + 1])) > cfg.escape_threshold:
                escaped, escape_tau = True, k * dt
                break
    else:
        Pstack = stack_projector(g, cfg.dealias)
        n = g.N + 1
        for k in range(1, nsteps + 1):
            Y = Pstack @ rk4_step(g, Y, dt, "nonlinear")
            if not np.all(np.isfinite(Y)):
                raise IntegrationFailureError(
                    "non-finite state in nonlinear mode", last_tau=(k - 1) * dt)
            esc = np.max(np.abs(Y[:n])) > cfg.escape_threshold
            if k % stride == 0 or k == nsteps or esc:
                record(k, Y)
            if esc:
                escaped, escape_tau = True, k * dt
                break

    return Trajectory(grid=g, taus=np.asarray(taus), states=states,
                      h_norms=np.asarray(hs), sup_phi1=np.asarray(sups),
                      amplitudes=np.asarray(amps), escaped=escaped,
                      escape_tau=escape_tau)


def growth_rate(traj, window):
    """Least-squares slope of log|a(tau)| over the window (lo, hi)."""
    lo, hi = window
    sel = (traj.taus >= lo) & (traj.taus <= hi)
    if np.count_nonzero(sel) < 2:
        raise InvalidArgumentError("window contains fewer than 2 records")
    amps = np.abs(traj.amplitudes[sel])
    if np.any(amps <= 0):
        raise UndefinedRateError("nonpositive amplitude in window")
    slope = np.polyfit(traj.taus[sel], np.log(amps), 1)[0]
    return float(slope)
