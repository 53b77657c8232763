"""Fourier-Laplace inversion along the imaginary axis.

Three instruments live here:

* osc_check evaluates the built-in symbol-class model integrals
  int e^{i a omega} f(omega) d omega by oscillatory-weight quadrature on
  [0, 1e4] plus a three-term integration-by-parts tail, and reports the
  <a>^2-scaled modulus.

* the perturbation kernel K(rho, s; tau) = (1/pi) Re int_0^Omega
  e^{i omega tau} [G - G0](rho, s; i omega) d omega, where G and G0 are
  the Green functions of the linearized and free spectral problems.  The
  difference is formed from ONE stacked ODE system integrating both
  potentials at once, so a potential override to zero makes the two
  halves bitwise identical and the kernel vanishes exactly.

* laplace_semigroup_check reconstructs the first component of the
  linearized flow from the contour representation at Re lambda = 0:
  the free part via the d'Alembert window formula and the perturbation
  part by resolvent differences swept over omega (batched in chunks of
  omega values per ODE solve, then Filon-integrated in omega so the
  e^{i omega tau} phase is handled exactly).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import InvalidArgumentError, PartialResultError
from .freewave import s0_row
from .grid import sample_matrix
from .resolvent import RIN, ROUT, X_MATCH, _gl_panels
from .resolvent import potential as as_potential

# ---------------------------------------------------------------------------
# oscillatory sample checks


@dataclass
class OscResult:
    """Value and <a>^2-scaled modulus of a model oscillatory integral."""

    value: complex
    scaled: float
    principal_value: bool = False

    def __iter__(self):
        return iter((self.value, self.scaled))


_OSC_CUT = 1e4


def _g_even(w):
    return 1.0 / (1.0 + w * w)


def _g_even_tail(w):
    d = 1.0 + w * w
    return 1.0 / d, -2.0 * w / d ** 2, (6.0 * w * w - 2.0) / d ** 3


def _g_odd(w):
    return w / (1.0 + w * w)


def _g_odd_tail(w):
    d = 1.0 + w * w
    return w / d, (1.0 - w * w) / d ** 2, 2.0 * w * (w * w - 3.0) / d ** 3


def _ibp_tail(tail_at, a, om):
    """int_om^inf e^{i a w} g dw by three integrations by parts."""
    g, gp, gpp = tail_at(om)
    ia = 1j * a
    return -np.exp(ia * om) * (g / ia - gp / ia ** 2 + gpp / ia ** 3)


def osc_check(sample_id, a):
    """Oscillatory integral of a built-in symbol sample.

    sample_id is 'even' (1/(1+w^2)), 'odd' (w/(1+w^2)), or 'mix' (their
    sum); returns OscResult(value, <a>^2 |value|).  a = 0 with an odd
    component returns the principal value 0 for that part, flagged.
    """
    if sample_id not in ("even", "odd", "mix"):
        raise InvalidArgumentError("sample_id must be 'even', 'odd', or 'mix'")
    a = float(a)
    total = 0.0 + 0.0j
    pv = False
    if sample_id in ("even", "mix"):
        if a == 0.0:
            total += np.pi
        else:
            body = quad(_g_even, 0.0, _OSC_CUT, weight="cos", wvar=a,
                        epsabs=1e-12, epsrel=1e-12, limit=2000)[0]
            total += 2.0 * (body + _ibp_tail(_g_even_tail, a, _OSC_CUT).real)
    if sample_id in ("odd", "mix"):
        if a == 0.0:
            pv = True
        else:
            body = quad(_g_odd, 0.0, _OSC_CUT, weight="sin", wvar=a,
                        epsabs=1e-12, epsrel=1e-12, limit=2000)[0]
            total += 2.0j * (body + _ibp_tail(_g_odd_tail, a, _OSC_CUT).imag)
    scaled = (1.0 + a * a) * abs(total)
    return OscResult(value=total, scaled=float(scaled), principal_value=pv)


# ---------------------------------------------------------------------------
# Filon integration of e^{i omega tau} against piecewise-linear samples


def filon_linear(omegas, H, tau):
    """int e^{i omega tau} H(omega) d omega with H piecewise linear.

    The phase factor is integrated exactly per panel, so the result is
    robust for tau well beyond the grid's Nyquist rate.  H may carry
    leading axes; integration runs along the last axis.
    """
    omegas = np.asarray(omegas, dtype=float)
    H = np.asarray(H)
    d = np.diff(omegas)
    if abs(tau) * d.max() < 1e-6:
        return np.trapezoid(H * np.exp(1j * tau * omegas), omegas, axis=-1)
    it = 1j * tau
    e0 = np.exp(it * omegas[:-1])
    e1 = np.exp(it * omegas[1:])
    I0 = (e1 - e0) / it
    I1 = (d * e1) / it - (e1 - e0) / it ** 2
    c0 = H[..., :-1]
    c1 = (H[..., 1:] - H[..., :-1]) / d
    return np.sum(c0 * I0 + c1 * I1, axis=-1)


# ---------------------------------------------------------------------------
# batched dual-potential branch sweeps at lam = i omega


def _interleave(u, up):
    y = np.empty(4 * u.size)
    y[0::4] = u.real
    y[1::4] = u.imag
    y[2::4] = up.real
    y[3::4] = up.imag
    return y


def _make_rhs(lam2, mu2, k, Vf):
    three = 3.0 + 2.0 * lam2

    def rhs(r, Y):
        u = Y[0::4] + 1j * Y[1::4]
        up = Y[2::4] + 1j * Y[3::4]
        Va = np.zeros(2 * k)
        Va[:k] = Vf(r)
        upp = ((three * r - 2.0 / r) * up + (mu2 + Va) * u) / (1.0 - r * r)
        out = np.empty_like(Y)
        out[0::4] = up.real
        out[1::4] = up.imag
        out[2::4] = upp.real
        out[3::4] = upp.imag
        return out

    return rhs


class _SweepBranches:
    """Fundamental branches for potentials (V, 0) on an omega grid.

    Values of u0 are sampled at pts_up (ascending, in (0, ROUT]) and of
    u1 at pts_dn (descending); derivatives are kept only at the listed
    deriv points and at ROUT (for the Frobenius connection).  Arrays are
    indexed [potential_half, omega, point] with half 0 = V, half 1 = 0.
    """

    def __init__(self, omegas, V, pts_up, pts_dn, deriv_pts, rtol=1e-9,
                 chunk=24):
        omegas = np.asarray(omegas, dtype=float)
        self.omegas = omegas
        self.lam = 1j * omegas
        self.V = V
        nw = len(omegas)
        pts_up = np.asarray(pts_up, dtype=float)
        pts_dn = np.asarray(pts_dn, dtype=float)
        deriv_pts = np.asarray(deriv_pts, dtype=float)
        self.pts_up, self.pts_dn, self.deriv_pts = pts_up, pts_dn, deriv_pts

        lo_mask = pts_up < RIN
        te_up = pts_up[~lo_mask]
        if te_up[-1] < ROUT:
            te_up = np.append(te_up, ROUT)
        te_dn = pts_dn.copy()
        if te_dn[0] < ROUT:
            te_dn = np.insert(te_dn, 0, ROUT)

        iu_d = np.searchsorted(te_up, deriv_pts)
        id_d = len(te_dn) - 1 - np.searchsorted(te_dn[::-1], deriv_pts)

        self.U0 = np.empty((2, nw, len(pts_up)), dtype=complex)
        self.U1 = np.empty((2, nw, len(pts_dn)), dtype=complex)
        self.U0P_d = np.empty((2, nw, len(deriv_pts)), dtype=complex)
        self.U1P_d = np.empty((2, nw, len(deriv_pts)), dtype=complex)
        self.v_rout = np.empty((2, nw), dtype=complex)
        self.vp_rout = np.empty((2, nw), dtype=complex)
        self.c0 = np.empty((2, nw), dtype=complex)
        self.c1 = np.empty((2, nw), dtype=complex)
        self.c2 = np.empty((2, nw), dtype=complex)

        for lo in range(0, nw, chunk):
            om = omegas[lo:lo + chunk]
            k = len(om)
            lam = 1j * om
            lam2 = np.concatenate([lam, lam])
            mu2 = lam2 * lam2 + 2.0 * lam2 + 0.75
            rhs = _make_rhs(lam2, mu2, k, V)
            sl = slice(lo, lo + k)

            # origin branch, series-launched at RIN
            V0a = np.zeros(2 * k)
            V0a[:k] = V(0.0)
            a2 = (mu2 + V0a) / 6.0
            a4 = a2 * (lam2 * lam2 + 6.0 * lam2 + 8.75 + V0a) / 20.0
            f = 1.0 - 2.0 * lam2
            u = f * (1.0 + a2 * RIN ** 2 + a4 * RIN ** 4)
            up = f * (2.0 * a2 * RIN + 4.0 * a4 * RIN ** 3)
            sol = solve_ivp(rhs, (RIN, ROUT), _interleave(u, up), t_eval=te_up,
                            method="DOP853", rtol=rtol, atol=1e-13)
            if not sol.success:
                raise PartialResultError(
                    "origin-branch sweep failed for omega in [%g, %g]: %s"
                    % (om[0], om[-1], sol.message), partial=self)
            uu = (sol.y[0::4] + 1j * sol.y[1::4]).reshape(2, k, -1)
            uup = (sol.y[2::4] + 1j * sol.y[3::4]).reshape(2, k, -1)
            self.U0[:, sl, ~lo_mask] = uu[:, :, :len(pts_up[~lo_mask])]
            if lo_mask.any():
                sp = pts_up[lo_mask]
                base = 1.0 + a2[:, None] * sp ** 2 + a4[:, None] * sp ** 4
                self.U0[:, sl, lo_mask] = (f[:, None] * base).reshape(2, k, -1)
            self.U0P_d[:, sl, :] = uup[:, :, iu_d]
            self.v_rout[:, sl] = uu[:, :, -1]
            self.vp_rout[:, sl] = uup[:, :, -1]

            # lightcone branch, series-launched at distance X_MATCH
            V1a = np.zeros(2 * k)
            V1a[:k] = V(1.0)
            c0 = 2.0 ** (0.5 - lam2)
            c1 = (mu2 + V1a) * c0 / (1.0 + 2.0 * lam2)
            c2 = (5.0 + 2.0 * lam2 + mu2 + V1a) * c1 / (6.0 + 4.0 * lam2)
            x = X_MATCH
            u = c0 + c1 * x + c2 * x * x
            up = -(c1 + 2.0 * c2 * x)
            sol = solve_ivp(rhs, (ROUT, te_dn[-1]), _interleave(u, up),
                            t_eval=te_dn, method="DOP853", rtol=rtol,
                            atol=1e-13)
            if not sol.success:
                raise PartialResultError(
                    "lightcone-branch sweep failed for omega in [%g, %g]: %s"
                    % (om[0], om[-1], sol.message), partial=self)
            uu = (sol.y[0::4] + 1j * sol.y[1::4]).reshape(2, k, -1)
            uup = (sol.y[2::4] + 1j * sol.y[3::4]).reshape(2, k, -1)
            off = len(te_dn) - len(pts_dn)
            self.U1[:, sl, :] = uu[:, :, off:]
            self.U1P_d[:, sl, :] = uup[:, :, id_d]
            self.c0[:, sl] = c0.reshape(2, k)
            self.c1[:, sl] = c1.reshape(2, k)
            self.c2[:, sl] = c2.reshape(2, k)

    def u0_at(self, query):
        """Value samples of u0 at points previously listed in pts_up."""
        idx = np.searchsorted(self.pts_up, np.asarray(query, dtype=float))
        return self.U0[:, :, idx]

    def u1_at(self, query):
        rev = self.pts_dn[::-1]
        idx = len(self.pts_dn) - 1 - np.searchsorted(rev, np.asarray(query))
        return self.U1[:, :, idx]

    def w0(self):
        """Scaled Wronskian per potential half from the deriv points."""
        r = self.deriv_pts
        u0 = self.u0_at(r)
        u1 = self.u1_at(r)
        lam = self.lam[None, :, None]
        W = u0 * self.U1P_d - self.U0P_d * u1
        sc = W * r ** 2 * (1.0 - r ** 2) ** (0.5 + lam) / (-1.0 + 2.0 * lam)
        return np.median(sc.real, axis=2) + 1j * np.median(sc.imag, axis=2)


#: interior reference points for Wronskian extraction during sweeps
W0_POINTS = np.array([0.35, 0.5, 0.65])


def _omega_grid(omega_max, domega):
    return np.arange(0.0, omega_max + 0.5 * domega, domega)


# ---------------------------------------------------------------------------
# perturbation kernel


@dataclass
class KernelSample:
    """One kernel evaluation with its decay envelope."""

    rho: float
    s: float
    tau: float
    K: float
    E: float
    ratio: float
    err: float

    def __post_init__(self):
        if not self.E > 0:
            raise InvalidArgumentError("envelope must be positive")
        if not np.isfinite(self.K):
            raise InvalidArgumentError("kernel value must be finite")


def envelope(s, tau):
    """Decay envelope s (1-s)^(-1/2) <tau + log(1-s)>^(-2)."""
    x = tau + np.log(1.0 - s)
    return s / np.sqrt(1.0 - s) / (1.0 + x * x)


def _check_kernel_point(rho, s, tau):
    if not (0.05 <= rho <= 0.95 and 0.05 <= s <= 0.95):
        raise InvalidArgumentError("kernel points must lie in [0.05, 0.95]")
    if not 0.0 <= tau <= 15.0:
        raise InvalidArgumentError("kernel tau must lie in [0, 15]")


class KernelSweep:
    """Resolvent-difference samples G - G0 at fixed (rho, s) pairs over an
    omega grid, reusable across tau and across truncation frequencies."""

    def __init__(self, points, omega_max=400.0, domega=0.25,
                 potential="linearized", rtol=1e-9, chunk=24):
        self.points = [(float(r), float(s)) for r, s in points]
        for r, s in self.points:
            _check_kernel_point(r, s, 0.0)
        self.omegas = _omega_grid(omega_max, domega)
        V = as_potential(potential)
        mins = np.array(sorted({min(r, s) for r, s in self.points}))
        maxs = np.array(sorted({max(r, s) for r, s in self.points}))
        pts_up = np.unique(np.concatenate([mins, W0_POINTS]))
        pts_dn = np.unique(np.concatenate([maxs, W0_POINTS]))[::-1]
        br = _SweepBranches(self.omegas, V, pts_up, pts_dn, W0_POINTS,
                            rtol=rtol, chunk=chunk)
        w0 = br.w0()  # (2, nw)
        lam = br.lam
        H = np.empty((len(self.points), len(self.omegas)), dtype=complex)
        for i, (r, s) in enumerate(self.points):
            u0v = br.u0_at([min(r, s)])[:, :, 0]
            u1v = br.u1_at([max(r, s)])[:, :, 0]
            G = (s ** 2 * (1.0 - s ** 2) ** (-0.5 + lam)
                 / ((1.0 - 2.0 * lam) * w0) * u0v * u1v)
            H[i] = G[0] - G[1]
        self.H = H

    def _index(self, rho, s):
        for i, (r, t) in enumerate(self.points):
            if abs(r - rho) < 1e-12 and abs(t - s) < 1e-12:
                return i
        raise InvalidArgumentError("(rho, s) not among the sweep points")

    def sample(self, rho, s, tau, omega_max=None):
        """KernelSample at (rho, s, tau), truncating at omega_max."""
        _check_kernel_point(rho, s, tau)
        i = self._index(rho, s)
        if omega_max is None:
            omega_max = self.omegas[-1]
        sel = self.omegas <= omega_max + 1e-12
        om = self.omegas[sel]
        H = self.H[i, sel]
        K = float(np.real(filon_linear(om, H, tau)) / np.pi)
        q = max(2, len(om) // 4)
        c = float(np.median(np.abs(H[-q:]) * om[-q:] ** 2))
        err = c / (np.pi * om[-1])
        E = float(envelope(s, tau))
        return KernelSample(rho=rho, s=s, tau=tau, K=K, E=E,
                            ratio=abs(K) / E, err=err)


def perturbation_kernel(rho, s, tau, omega_max=200.0, domega=0.25,
                        potential="linearized", rtol=1e-9, sweep=None):
    """Perturbation kernel K(rho, s; tau) with envelope and error bar.

    Passing a precomputed KernelSweep reuses its omega sweep (the sweep
    is the expensive part; kernel values for new tau or smaller
    omega_max are then immediate).
    """
    if sweep is None:
        sweep = KernelSweep([(rho, s)], omega_max=omega_max, domega=domega,
                            potential=potential, rtol=rtol)
    return sweep.sample(rho, s, tau, omega_max=omega_max)


# ---------------------------------------------------------------------------
# contour reconstruction of the linearized flow


def _apply_skeleton(g, om_ref):
    """Fixed quadrature structure of the resolvent application, sized for
    the largest omega of a sweep."""
    rho, N = g.nodes, g.N
    mid = 0.5 * (rho[:N - 1] + rho[1:N])
    phase = om_ref * np.diff(rho[:N]) / (1.0 - mid ** 2)
    nsub = np.maximum(2, np.ceil(phase / 4.0).astype(int))
    s_int, w_int, edges = _gl_panels(rho[:N], nsub=nsub)
    s0 = rho[N - 1]
    Ym = np.log((1.0 - s0) / X_MATCH)
    npan = max(16, int(np.ceil(Ym * (om_ref + 1.0) / 3.0)))
    yg, wyg, _ = _gl_panels(np.linspace(0.0, Ym, npan + 1), nsub=1)
    xg = (1.0 - s0) * np.exp(-yg)
    return dict(s_int=s_int, w_int=w_int, edges=edges,
                sg=1.0 - xg, xg=xg, wyg=wyg)


def _batched_apply(g, f1, f2, omegas, V, rtol=1e-9, chunk=24, block=64):
    """First components of resolvent applications at lam = i omega for
    potentials (V, 0), vectorized over the omega grid.

    Returns an array (2, n_omega, N+1): half 0 is the potential V, half
    1 the zero potential, sharing one stacked ODE sweep and one
    quadrature skeleton.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    rho, D, N = g.nodes, g.D, g.N
    sk = _apply_skeleton(g, float(np.max(omegas)))
    s_int, w_int, edges = sk["s_int"], sk["w_int"], sk["edges"]
    sg, xg, wyg = sk["sg"], sk["xg"], sk["wyg"]

    pts_up = np.unique(np.concatenate([s_int, sg, rho[1:N], W0_POINTS]))
    pts_dn = np.unique(np.concatenate([s_int, sg, rho[1:N], W0_POINTS]))[::-1]
    br = _SweepBranches(omegas, as_potential(V), pts_up, pts_dn, W0_POINTS,
                        rtol=rtol, chunk=chunk)
    w0 = br.w0()
    U0_int, U1_int = br.u0_at(s_int), br.u1_at(s_int)
    U0_sg, U1_sg = br.u0_at(sg), br.u1_at(sg)
    U0_n, U1_n = br.u0_at(rho[1:N]), br.u1_at(rho[1:N])

    E_int = sample_matrix(g, s_int)
    E_sg = sample_matrix(g, sg)
    base = rho * (D @ f1) + 1.5 * f1 + f2
    nw = len(omegas)
    n = N + 1
    out = np.empty((2, nw, n), dtype=complex)

    V1vals = (complex(br.V(1.0)), 0.0 + 0.0j)
    for lo in range(0, nw, block):
        sl = slice(lo, min(lo + block, nw))
        lam = br.lam[sl]  # (nb,)
        nb = len(lam)
        Fn = base[:, None] + lam[None, :] * f1[:, None]  # (n, nb)
        Fv_int = (E_int @ Fn).T  # (nb, n_int)
        Fv_sg = (E_sg @ Fn).T
        F1 = Fn[N, :]
        F1p = D[N, :] @ Fn
        mfac_int = (s_int[None, :] ** 2
                    * (1.0 - s_int[None, :] ** 2) ** (-0.5 + lam[:, None]))
        mfac_sg = (sg[None, :] ** 2
                   * (1.0 + sg[None, :]) ** (-0.5 + lam[:, None])
                   * xg[None, :] ** (0.5 + lam[:, None]))
        sig = 0.5 - lam
        x = X_MATCH
        for h in (0, 1):
            pref = 1.0 / ((1.0 - 2.0 * lam) * w0[h, sl])
            Aint = U0_int[h, sl] * mfac_int * Fv_int * pref[:, None]
            Bint = U1_int[h, sl] * mfac_int * Fv_int * pref[:, None]
            IA = np.zeros((nb, n), dtype=complex)
            for j in range(1, N):
                IA[:, j] = IA[:, j - 1] + Aint[:, edges[j - 1]:edges[j]] @ \
                    w_int[edges[j - 1]:edges[j]]
            seg = mfac_sg * Fv_sg * pref[:, None]
            seg_A = (U0_sg[h, sl] * seg) @ wyg
            seg_B = (U1_sg[h, sl] * seg) @ wyg

            V1 = V1vals[h]
            h1 = (3.0 - 2.0 * lam + V1) / (3.0 - 2.0 * lam)
            c0, c1, c2 = br.c0[h, sl], br.c1[h, sl], br.c2[h, sl]
            v0, v0p = br.v_rout[h, sl], br.vp_rout[h, sl]
            u1v = c0 + c1 * x + c2 * x * x
            u1x = c1 + 2.0 * c2 * x
            utv = x ** sig * (1.0 + h1 * x)
            utx = x ** (sig - 1.0) * (sig + (sig + 1.0) * h1 * x)
            det = u1v * utx - utv * u1x
            alpha = (v0 * utx + utv * v0p) / det
            beta = (-u1v * v0p - v0 * u1x) / det

            q = 2.0 ** (-0.5 + lam)
            g0 = c0 * q * F1
            g1 = q * (c1 * F1 + c0 * (-2.0 * F1 + (0.5 - lam) / 2.0 * F1 - F1p))
            EB = pref * (g0 * x ** (0.5 + lam) / (0.5 + lam)
                         + g1 * x ** (1.5 + lam) / (1.5 + lam))
            k0 = q * F1
            k1 = q * ((h1 - 2.0 + (0.5 - lam) / 2.0) * F1 - F1p)
            Kt = pref * (k0 * x + k1 * x * x / 2.0)
            EA = alpha * EB + beta * Kt

            IA[:, N] = IA[:, N - 1] + seg_A + EA
            IB = np.zeros((nb, n), dtype=complex)
            IB[:, N - 1] = seg_B + EB
            for j in range(N - 2, -1, -1):
                IB[:, j] = IB[:, j + 1] + Bint[:, edges[j]:edges[j + 1]] @ \
                    w_int[edges[j]:edges[j + 1]]

            y1 = np.empty((nb, n), dtype=complex)
            y1[:, 1:N] = U1_n[h, sl] * IA[:, 1:N] + U0_n[h, sl] * IB[:, 1:N]
            y1[:, N] = c0 * IA[:, N]
            y1[:, 0] = (1.0 - 2.0 * lam) * IB[:, 0]
            out[h, sl] = y1
    return out


class LaplaceSweep:
    """Per-omega resolvent differences applied to one fixed state.

    H[:, j] holds [R_L(i omega) f - R_L0(i omega) f]_1 at the nodes; any
    tau then costs one Filon pass.
    """

    def __init__(self, state, omega_max=120.0, domega=0.125, rtol=1e-9,
                 chunk=24):
        self.state = state
        self.omegas = _omega_grid(omega_max, domega)
        Y1 = _batched_apply(state.grid, state.phi1, state.phi2, self.omegas,
                            "linearized", rtol=rtol, chunk=chunk)
        self.H = (Y1[0] - Y1[1]).T  # (n_nodes, n_omega)

    def first_component(self, tau):
        """Reconstructed first component at the nodes at time tau."""
        free = s0_row(self.state, tau)
        pert = np.real(filon_linear(self.omegas, self.H, tau)) / np.pi
        return free + pert


def laplace_semigroup_check(state, tau, omega_max=120.0, domega=0.125,
                            rtol=1e-9, sweep=None):
    """Contour reconstruction of the linearized flow's first component.

    state should lie in the range of (I - P); tau in [0.5, 5].  A
    precomputed LaplaceSweep may be passed to amortize the omega sweep
    over several tau.
    """
    if not 0.5 <= tau <= 5.0:
        raise InvalidArgumentError("tau must lie in [0.5, 5]")
    if sweep is None:
        sweep = LaplaceSweep(state, omega_max=omega_max, domega=domega,
                             rtol=rtol)
    return sweep.first_component(tau)
