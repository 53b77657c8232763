"""Norms on the closed unit ball and mixed space-time norms.

All ball norms are radial reductions: integral over [0, 1] with weight
rho^2 and the angular factor 4 pi omitted throughout (only ratios and
boundedness are ever used).  The energy norm pairs H^1 for the first
component with L^2 for the second.  The transformed norm applies the
first-order transform (rho phi2, rho phi1' + phi1) and measures it in
plain weight-one L^2(0, 1).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .grid import differentiate, sup_norm

_INF = float("inf")


@dataclass(frozen=True)
class StrichartzExponents:
    """Admissible exponent pair: p in [2, inf], q in [6, inf],
    1/p + 3/q = 1/2 (convention 1/inf = 0)."""

    p: float
    q: float

    def __post_init__(self):
        p, q = float(self.p), float(self.q)
        if not (2.0 <= p <= _INF) or not (6.0 <= q <= _INF):
            raise InvalidArgumentError("exponents out of range: p=%r q=%r" % (p, q))
        ip = 0.0 if np.isinf(p) else 1.0 / p
        iq = 0.0 if np.isinf(q) else 1.0 / q
        if abs(ip + 3.0 * iq - 0.5) > 1e-12:
            raise InvalidArgumentError(
                "non-admissible exponents: 1/p + 3/q must equal 1/2"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


def as_exponents(exps):
    if isinstance(exps, StrichartzExponents):
        return exps
    try:
        p, q = exps
    except Exception as exc:
        raise InvalidArgumentError("cannot interpret %r as exponents" % (exps,)) from exc
    return StrichartzExponents(p, q)


@dataclass
class NormReport:
    """Named nonnegative norm values collected by experiments."""

    h_norm: float = 0.0
    g_norm: float = 0.0
    lq: dict = field(default_factory=dict)
    strichartz: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in [self.h_norm, self.g_norm, *self.lq.values(),
                  *self.strichartz.values()]:
            if not np.isfinite(v) or v < 0:
                raise InvalidArgumentError("norm entries must be finite and >= 0")


def l2_ball(g, values):
    """(integral from 0 to 1 of |f|^2 rho^2 drho)^(1/2) by grid quadrature."""
    values = np.asarray(values)
    return float(np.sqrt(np.sum(g.w * g.nodes ** 2 * np.abs(values) ** 2)))


def h1_ball(g, values):
    """(l2_ball(f)^2 + l2_ball(f')^2)^(1/2)."""
    values = np.asarray(values)
    return float(np.sqrt(l2_ball(g, values) ** 2
                         + l2_ball(g, differentiate(g, values)) ** 2))


def h_norm(state):
    """Energy norm: (h1_ball(phi1)^2 + l2_ball(phi2)^2)^(1/2)."""
    g = state.grid
    return float(np.sqrt(h1_ball(g, state.phi1) ** 2
                         + l2_ball(g, state.phi2) ** 2))


def lq_ball(g, values, q):
    """(integral of |f|^q rho^2 drho)^(1/q); sup norm for q = inf."""
    q = float(q)
    if not (1.0 <= q <= _INF):
        raise InvalidArgumentError("q must lie in [1, inf]")
    values = np.asarray(values)
    if np.isinf(q):
        return sup_norm(g, values)
    return float(np.sum(g.w * g.nodes ** 2 * np.abs(values) ** q) ** (1.0 / q))


def gram_matrix(g):
    """Matrix of the discrete energy inner product on stacked vectors.

    <u, v> = v^T M u reproduces h_norm^2 on the diagonal:
    M = blockdiag(Q + D^T Q D, Q) with Q = diag(w * rho^2).
    """
    Q = np.diag(g.w * g.nodes ** 2)
    upper = Q + g.D.T @ Q @ g.D
    n = g.N + 1
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = upper
    M[n:, n:] = Q
    return M


def g_transform(state):
    """First-order transform (rho phi2, rho phi1' + phi1) at the nodes."""
    g = state.grid
    first = g.nodes * state.phi2
    second = g.nodes * differentiate(g, state.phi1) + state.phi1
    return first, second


def g_norm(state):
    """Plain weight-one L^2(0,1) norm of the concatenated transform pair."""
    g = state.grid
    first, second = g_transform(state)
    return float(np.sqrt(np.sum(g.w * (first ** 2 + second ** 2))))


def _tail_estimate(taus, vals, p):
    """Exponential-decay extrapolation of the truncated time integral.

    Fits log(vals) over the trailing decade of the tau grid and integrates
    the fit beyond the last sample.  Returns 0 when no decay is detected
    (nothing meaningful to extrapolate) or for p = inf.
    """
    if np.isinf(p):
        return 0.0
    t1 = taus[-1]
    window = taus >= t1 - min(10.0, 0.5 * (t1 - taus[0]))
    tw, vw = taus[window], vals[window]
    pos = vw > 0
    if pos.sum() < 3:
        return 0.0
    slope, intercept = np.polyfit(tw[pos], np.log(vw[pos]), 1)
    if slope >= 0:
        return 0.0
    # integral of e^(p(a + b tau)) from t1 to infinity
    return float((np.exp(p * (intercept + slope * t1)) / (-p * slope)) ** (1.0 / p))


def strichartz_norm(traj, exps, tau_max=None, with_tail=False):
    """Mixed norm of the first component over a stored trajectory.

    Composite trapezoid of ||phi1(tau)||_{L^q}^p over the tau grid, p-th
    root; running maximum for p = inf.  With with_tail=True also returns
    an exponential-tail estimate for the truncated integral.
    """
    exps = as_exponents(exps)
    taus = np.asarray(traj.taus, dtype=float)
    if taus.ndim != 1 or taus.size < 2 or np.any(np.diff(taus) <= 0):
        raise InvalidArgumentError("trajectory tau grid must be increasing")
    vals = np.array([lq_ball(s.grid, s.phi1, exps.q) for s in traj.states])
    if tau_max is not None:
        keep = taus <= tau_max + 1e-12
        if keep.sum() < 2:
            raise InvalidArgumentError("tau_max leaves fewer than two samples")
        taus, vals = taus[keep], vals[keep]
    if np.isinf(exps.p):
        total = float(np.max(vals))
    else:
        total = float(np.trapezoid(vals ** exps.p, taus) ** (1.0 / exps.p))
    if not with_tail:
        return total
    return total, _tail_estimate(taus, vals, exps.p)
