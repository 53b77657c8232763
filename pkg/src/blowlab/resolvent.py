"""Fundamental solutions of the spectral ODE, Wronskian, Green function,
and resolvent application.

The second-order spectral problem on (0, 1),

    (1 - rho^2) u'' - ((3 + 2 lam) rho - 2/rho) u' - (mu + V(rho)) u = 0,
    mu = lam^2 + 2 lam + 3/4,

has regular singular points at both endpoints.  u0 is the branch regular
at the origin (exponent 0, normalized so u0(0) = 1 - 2 lam), u1 the
branch regular at the lightcone (normalized so u1(1) = 2^(1/2-lam)).
Both are launched from short Frobenius expansions and integrated with an
adaptive high-order Runge-Kutta method; near rho = 1 the integration
stops at distance 1e-6 and analytic connection data (u0 expressed in the
Frobenius basis at rho = 1) covers the remaining sliver.  The Green
function and the resolvent integrals follow the standard
variation-of-parameters construction with the scaled Wronskian w0(lam).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .coords import State
from .errors import (
    DegenerateParameterError,
    EigenvalueSingularityError,
    InconsistentWronskianError,
    InvalidArgumentError,
    OutOfStripError,
    StiffFailureError,
)
from .grid import interpolate

#: series launch point for the origin branch
RIN = 1e-4
#: the lightcone branch is integrated down to here (origin-branch basin)
RIN_LOW = 1e-8
#: Frobenius matching distance from rho = 1
X_MATCH = 1e-6
ROUT = 1.0 - X_MATCH

STRIP_MAX = 1.0 / 3.0


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter lam = eps + i omega."""

    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def eps(self):
        return self.lam.real

    @property
    def omega(self):
        return self.lam.imag

    def in_strip(self):
        return -1e-12 <= self.eps <= STRIP_MAX + 1e-12


def _lam_of(lam):
    if isinstance(lam, SpectralPoint):
        return lam.lam
    return complex(lam)


def _check_strip(lam, strict):
    if strict and not SpectralPoint(lam).in_strip():
        raise OutOfStripError(
            "Re lambda = %g outside [0, 1/3]; pass strict=False for "
            "diagnostics outside the strip" % lam.real
        )


@dataclass(frozen=True)
class PotentialSpec:
    """Smooth potential on [0, 1] with a name for reports."""

    name: str
    func: object

    def __call__(self, r):
        return self.func(r)


ZERO_POTENTIAL = PotentialSpec("zero", lambda r: 0.0)
LINEARIZED_POTENTIAL = PotentialSpec("linearized", lambda r: -3.75)


def potential(spec):
    """Coerce a PotentialSpec, preset name, or callable to a PotentialSpec."""
    if isinstance(spec, PotentialSpec):
        return spec
    if isinstance(spec, str):
        presets = {"zero": ZERO_POTENTIAL, "linearized": LINEARIZED_POTENTIAL}
        if spec not in presets:
            raise InvalidArgumentError("unknown potential preset %r" % spec)
        return presets[spec]
    if callable(spec):
        return PotentialSpec("custom", spec)
    raise InvalidArgumentError("potential must be a spec, preset name, or callable")


def _ode_rhs(r, yv, lam, V):
    u = yv[0] + 1j * yv[1]
    up = yv[2] + 1j * yv[3]
    mu = lam * lam + 2.0 * lam + 0.75
    upp = (((3.0 + 2.0 * lam) * r - 2.0 / r) * up + (mu + V(r)) * u) / (1.0 - r * r)
    return [up.real, up.imag, upp.real, upp.imag]


def _run_ivp(span, y0, lam, V, rtol):
    sol = solve_ivp(_ode_rhs, span, y0, args=(lam, V), method="DOP853",
                    rtol=rtol, atol=1e-13, dense_output=True)
    if not sol.success:
        raise StiffFailureError(
            "spectral ODE solve failed on %r: %s" % (span, sol.message))
    return sol


class _OriginBranch:
    """u0: regular at rho = 0, launched by the even power series."""

    def __init__(self, lam, V, rtol):
        mu = lam * lam + 2.0 * lam + 0.75
        V0 = complex(V(0.0))
        # indicial recursion 2k(2k+1) a_{2k} =
        #   [(2k-2)(2k-3) + (3+2 lam)(2k-2) + mu + V0] a_{2k-2}
        self.a2 = (mu + V0) / 6.0
        self.a4 = self.a2 * (lam * lam + 6.0 * lam + 8.75 + V0) / 20.0
        self.lam = lam
        f = 1.0 - 2.0 * lam
        u = f * (1.0 + self.a2 * RIN ** 2 + self.a4 * RIN ** 4)
        up = f * (2.0 * self.a2 * RIN + 4.0 * self.a4 * RIN ** 3)
        self.sol = _run_ivp((RIN, ROUT), [u.real, u.imag, up.real, up.imag],
                            lam, V, rtol)

    def at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        y = self.sol.sol(np.clip(s, RIN, ROUT))
        u = y[0] + 1j * y[1]
        up = y[2] + 1j * y[3]
        lo = s < RIN
        if lo.any():
            sl = s[lo]
            f = 1.0 - 2.0 * self.lam
            u[lo] = f * (1.0 + self.a2 * sl ** 2 + self.a4 * sl ** 4)
            up[lo] = f * (2.0 * self.a2 * sl + 4.0 * self.a4 * sl ** 3)
        return u, up


class _LightconeBranch:
    """u1: regular at rho = 1, launched by the series in x = 1 - rho."""

    def __init__(self, lam, V, rtol):
        mu = lam * lam + 2.0 * lam + 0.75
        V1 = complex(V(1.0))
        if abs(1.0 + 2.0 * lam) < 1e-12 or abs(6.0 + 4.0 * lam) < 1e-12:
            raise DegenerateParameterError(
                "indicial denominator vanishes at lambda = %r" % lam)
        self.c0 = 2.0 ** (0.5 - lam)
        self.c1 = (mu + V1) * self.c0 / (1.0 + 2.0 * lam)
        self.c2 = (5.0 + 2.0 * lam + mu + V1) * self.c1 / (6.0 + 4.0 * lam)
        x = X_MATCH
        u = self.c0 + self.c1 * x + self.c2 * x * x
        up = -(self.c1 + 2.0 * self.c2 * x)
        self.sol = _run_ivp((ROUT, RIN_LOW), [u.real, u.imag, up.real, up.imag],
                            lam, V, rtol)

    def at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        y = self.sol.sol(np.clip(s, RIN_LOW, ROUT))
        u = y[0] + 1j * y[1]
        up = y[2] + 1j * y[3]
        hi = s > ROUT
        if hi.any():
            x = 1.0 - s[hi]
            u[hi] = self.c0 + self.c1 * x + self.c2 * x * x
            up[hi] = -(self.c1 + 2.0 * self.c2 * x)
        return u, up


class FundamentalPair:
    """Both branches at one lam: node samples, connection data, and w0.

    u0, u0p, u1, u1p are node samples; u0[0] = 1 - 2 lam and
    u1[-1] = 2^(1/2-lam) hold exactly by the launch normalization, and
    u0[-1] is the continuous limit alpha * u1(1) from the connection

        u0 = alpha * u1 + beta * x^sig (1 + h1 x),    x = 1 - rho,

    with sig = 1/2 - lam.  The lightcone branch diverges like 1/rho at
    the origin, so its origin samples hold the values at the inner
    cutoff 1e-8; interior nodes are what the Wronskian and the resolvent
    quadrature consume.
    """

    def __init__(self, lam, V, g, strict=True, rtol=1e-11):
        lam = _lam_of(lam)
        _check_strip(lam, strict)
        V = potential(V)
        self.lam = lam
        self.grid = g
        self.potential = V
        self._b0 = _OriginBranch(lam, V, rtol)
        self._b1 = _LightconeBranch(lam, V, rtol)
        b1 = self._b1
        self.c0, self.c1, self.c2 = b1.c0, b1.c1, b1.c2

        # connection at x = X_MATCH in the Frobenius basis {u1, x^sig(1+h1 x)}
        sig = 0.5 - lam
        h1 = (3.0 - 2.0 * lam + complex(V(1.0))) / (3.0 - 2.0 * lam)
        self.sig, self.h1 = sig, h1
        x = X_MATCH
        y0 = self._b0.sol.sol(ROUT)
        v0, v0p = y0[0] + 1j * y0[1], y0[2] + 1j * y0[3]
        u1v = b1.c0 + b1.c1 * x + b1.c2 * x * x
        u1x = b1.c1 + 2.0 * b1.c2 * x
        ut = x ** sig * (1.0 + h1 * x)
        utx = x ** (sig - 1.0) * (sig + (sig + 1.0) * h1 * x)
        Mm = np.array([[u1v, ut], [u1x, utx]])
        ab = np.linalg.solve(Mm, np.array([v0, -v0p]))
        self.alpha, self.beta = ab[0], ab[1]

        rho = g.nodes
        u0, u0p = self._b0.at(rho)
        u0[0], u0p[0] = 1.0 - 2.0 * lam, 0.0
        u0[-1] = self.alpha * b1.c0
        u1, u1p = self._b1.at(rho)
        u1[-1], u1p[-1] = b1.c0, -b1.c1
        self.u0, self.u0p = u0, u0p
        self.u1, self.u1p = u1, u1p
        self.w0, self.spread = _scaled_wronskian(self)

    def u0_at(self, s):
        """Dense (u0, u0') off the grid."""
        return self._b0.at(s)

    def u1_at(self, s):
        return self._b1.at(s)


def _scaled_wronskian(pair):
    """Median over interior nodes of the weighted Wronskian, plus spread.

    The spread is measured relative to |w0| when w0 is away from zero,
    and relative to the pre-cancellation product scale otherwise, so the
    diagnostic stays meaningful at eigenvalues where w0 itself vanishes.
    """
    rho = pair.grid.nodes[1:-1]
    u0, u0p = pair.u0[1:-1], pair.u0p[1:-1]
    u1, u1p = pair.u1[1:-1], pair.u1p[1:-1]
    weight = rho ** 2 * (1.0 - rho ** 2) ** (0.5 + pair.lam) / (-1.0 + 2.0 * pair.lam)
    sc = (u0 * u1p - u0p * u1) * weight
    w0 = complex(np.median(sc.real), np.median(sc.imag))
    scale = float(np.median((np.abs(u0 * u1p) + np.abs(u0p * u1)) * np.abs(weight)))
    denom = abs(w0) if abs(w0) > 1e-6 * scale else scale
    if denom == 0.0:
        # both branches constant (gauge eigenvalue): every sample vanishes
        return w0, 0.0
    spread = float(np.max(np.abs(sc - w0)) / denom)
    return w0, spread


def fundamental_pair(lam, V, g, strict=True, rtol=1e-11):
    """Solve both branches at lam for potential V on grid g."""
    return FundamentalPair(lam, V, g, strict=strict, rtol=rtol)


def solve_u0(lam, V, g, strict=True, rtol=1e-11):
    """Node samples (u0, u0') of the branch regular at the origin."""
    lam = _lam_of(lam)
    _check_strip(lam, strict)
    branch = _OriginBranch(lam, potential(V), rtol)
    u, up = branch.at(g.nodes)
    u[0], up[0] = 1.0 - 2.0 * lam, 0.0
    return u, up


def solve_u1(lam, V, g, strict=True, rtol=1e-11):
    """Node samples (u1, u1') of the branch regular at the lightcone."""
    lam = _lam_of(lam)
    _check_strip(lam, strict)
    branch = _LightconeBranch(lam, potential(V), rtol)
    u, up = branch.at(g.nodes)
    u[-1], up[-1] = branch.c0, -branch.c1
    return u, up


def wronskian_w0(pair, lam=None, with_spread=False):
    """Scaled Wronskian w0(lam) with a self-consistency check."""
    if lam is not None and abs(_lam_of(lam) - pair.lam) > 1e-12:
        raise InvalidArgumentError("lam does not match the pair")
    if pair.spread > 1e-6:
        raise InconsistentWronskianError(
            "scaled Wronskian varies across nodes (spread %.2e)" % pair.spread)
    if with_spread:
        return pair.w0, pair.spread
    return pair.w0


def green(rho, s, lam, pair):
    """Green function G(rho, s; lam) of the spectral problem."""
    lam = _lam_of(lam)
    if abs(lam - pair.lam) > 1e-12:
        raise InvalidArgumentError("lam does not match the pair")
    _check_strip(lam, strict=True)
    if not (0.0 < rho < 1.0 and 0.0 < s < 1.0):
        raise InvalidArgumentError("green requires rho, s in (0, 1)")
    if abs(pair.w0) <= 1e-8:
        raise EigenvalueSingularityError(
            "Wronskian vanishes at lambda = %r (eigenvalue)" % lam)
    lo, hi = (rho, s) if rho <= s else (s, rho)
    u0v = pair.u0_at(lo)[0][0]
    u1v = pair.u1_at(hi)[0][0]
    weight = s ** 2 * (1.0 - s ** 2) ** (-0.5 + lam)
    return weight / ((1.0 - 2.0 * lam) * pair.w0) * u0v * u1v


@dataclass
class ResolventRHS:
    """Assembled right-hand side data for one resolvent application.

    F holds node samples of F(s) = s f1'(s) + (lam + 3/2) f1(s) + f2(s),
    the source appearing in the reduced second-order problem.
    """

    grid: object
    lam: complex
    f1: np.ndarray
    f1p: np.ndarray
    f2: np.ndarray
    F: np.ndarray


def resolvent_rhs(g, f1, f2, lam):
    """Build the ResolventRHS from node samples of (f1, f2)."""
    lam = _lam_of(lam)
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    if f1.shape != (g.N + 1,) or f2.shape != (g.N + 1,):
        raise InvalidArgumentError("rhs samples must match the grid")
    f1p = g.D @ f1
    F = g.nodes * f1p + (lam + 1.5) * f1 + f2
    if not (np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))):
        raise InvalidArgumentError("rhs samples must be finite")
    return ResolventRHS(grid=g, lam=lam, f1=f1, f1p=f1p, f2=f2,
                        F=F.astype(complex))


def _gl_panels(a_pts, nsub=2, ngauss=16):
    """Composite Gauss-Legendre nodes/weights over consecutive intervals.

    Returns flat points, weights, and the cumulative index of each
    original interval boundary (for per-interval partial sums).
    """
    xg, wg = np.polynomial.legendre.leggauss(ngauss)
    nsubs = np.broadcast_to(np.asarray(nsub, dtype=int), (len(a_pts) - 1,))
    pts, wts, edges = [], [], [0]
    for a, b, ns in zip(a_pts[:-1], a_pts[1:], nsubs):
        sub = np.linspace(a, b, ns + 1)
        for aa, bb in zip(sub[:-1], sub[1:]):
            mid, half = (aa + bb) / 2.0, (bb - aa) / 2.0
            pts.append(mid + half * xg)
            wts.append(half * wg)
        edges.append(edges[-1] + ns * ngauss)
    return np.concatenate(pts), np.concatenate(wts), edges


def apply_resolvent(lam, rhs, pair):
    """Apply the resolvent: u1-component by Green-function quadrature,
    u2-component from the first-order relation u2 = rho u1' + (lam+1/2) u1 - f1.

    The s-integral splits into per-node panels whose subdivision follows
    the local oscillation rate, a log-spaced segment absorbing the
    (1-s)^(-1/2+lam) endpoint weight, and an analytic two-term edge
    integral on the final 1e-6 sliver using the Frobenius connection.
    """
    lam = _lam_of(lam)
    if abs(lam - rhs.lam) > 1e-12 or abs(lam - pair.lam) > 1e-12:
        raise InvalidArgumentError("lam, rhs, and pair must agree")
    if abs(pair.w0) <= 1e-8:
        raise EigenvalueSingularityError(
            "Wronskian vanishes at lambda = %r (eigenvalue)" % lam)
    g = rhs.grid
    rho, D = g.nodes, g.D
    N = g.N
    w0 = pair.w0
    pref = 1.0 / ((1.0 - 2.0 * lam) * w0)
    Fn = rhs.F
    F1, F1p = Fn[N], (D @ Fn)[N]

    # interior panels [rho_j, rho_{j+1}], j = 0..N-2: subdivision follows
    # the local phase rate ~ omega / (1 - rho^2)
    om = abs(lam.imag)
    mid = 0.5 * (rho[:N - 1] + rho[1:N])
    phase = om * np.diff(rho[:N]) / (1.0 - mid ** 2)
    nsub = np.maximum(2, np.ceil(phase / 4.0).astype(int))
    s_int, w_int, edges = _gl_panels(rho[:N], nsub=nsub)
    u0v = pair.u0_at(s_int)[0]
    u1v = pair.u1_at(s_int)[0]
    mfac = s_int ** 2 * (1.0 - s_int ** 2) ** (-0.5 + lam) * pref
    Fv = interpolate(g, Fn, s_int)
    Aint = u0v * mfac * Fv
    Bint = u1v * mfac * Fv

    IA = np.zeros(N + 1, dtype=complex)
    for j in range(1, N):
        IA[j] = IA[j - 1] + Aint[edges[j - 1]:edges[j]] @ w_int[edges[j - 1]:edges[j]]

    # log-spaced segment [rho_{N-1}, 1 - X_MATCH]: s = 1 - (1 - s0) e^{-y}
    s0 = rho[N - 1]
    Ym = np.log((1.0 - s0) / X_MATCH)
    npan = max(16, int(np.ceil(Ym * (om + 1.0) / 3.0)))
    yg, wyg, _ = _gl_panels(np.linspace(0.0, Ym, npan + 1), nsub=1)
    xg = (1.0 - s0) * np.exp(-yg)
    sg = 1.0 - xg
    u0t = pair.u0_at(sg)[0]
    u1t = pair.u1_at(sg)[0]
    mt = sg ** 2 * (1.0 + sg) ** (-0.5 + lam) * xg ** (0.5 + lam) * pref
    Ftv = interpolate(g, Fn, sg)
    seg_A = (u0t * mt * Ftv) @ wyg
    seg_B = (u1t * mt * Ftv) @ wyg

    # analytic edge [1 - X_MATCH, 1]: two-term expansions of the weighted
    # integrands in x = 1 - s, using the Frobenius connection for u0
    xm, h1 = X_MATCH, pair.h1
    c0, c1 = pair.c0, pair.c1
    q = 2.0 ** (-0.5 + lam)
    g0 = c0 * q * F1
    g1 = q * (c1 * F1 + c0 * (-2.0 * F1 + (0.5 - lam) / 2.0 * F1 - F1p))
    EB = pref * (g0 * xm ** (0.5 + lam) / (0.5 + lam)
                 + g1 * xm ** (1.5 + lam) / (1.5 + lam))
    k0 = q * F1
    k1 = q * ((h1 - 2.0 + (0.5 - lam) / 2.0) * F1 - F1p)
    K = pref * (k0 * xm + k1 * xm ** 2 / 2.0)
    EA = pair.alpha * EB + pair.beta * K

    IA[N] = IA[N - 1] + seg_A + EA
    IB = np.zeros(N + 1, dtype=complex)
    IB[N - 1] = seg_B + EB
    for j in range(N - 2, -1, -1):
        IB[j] = IB[j + 1] + Bint[edges[j]:edges[j + 1]] @ w_int[edges[j]:edges[j + 1]]

    u0n = pair.u0
    u1n = pair.u1
    y1 = np.empty(N + 1, dtype=complex)
    y1[1:] = u1n[1:] * IA[1:] + u0n[1:] * IB[1:]
    y1[0] = u0n[0] * IB[0]
    y2 = rho * (D @ y1) + (lam + 0.5) * y1 - rhs.f1
    return State(g, y1, y2)
