"""Hypergeometric route to the scaled Wronskian: 2F1 evaluation, the
closed-form w0(lam) as a Gamma ratio, and the zero-structure scan.

The spectral ODE transforms to a hypergeometric equation with parameters
a = lam/2 - 1, b = lam/2 + 1, c = 1/2, and the connection coefficients
between the rho = 0 and rho = 1 Frobenius bases reduce the scaled
Wronskian to

    w0(lam) = Gamma(lam/2 + 1/4) Gamma(lam/2 + 3/4)
              / (Gamma(lam/2 - 1/2) Gamma(lam/2 + 3/2)).

The overall constant was fixed once by matching the ODE route at the
reference point lam = 0.1 and turns out to be exactly 1.  Zeros of w0
are the poles of the denominator Gammas (lam = 1 - 2n and lam = -3 - 2n)
and never occur for Re lam in [0, 1/3]; poles of w0 are the poles of the
numerator Gammas (lam = -1/2 - 2n and lam = -3/2 - 2n).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gamma as _gamma
from scipy.special import loggamma as _loggamma
from scipy.special import rgamma as _rgamma

from .errors import EvaluationDomainError, InvalidArgumentError, PoleError


@dataclass(frozen=True)
class HypParams:
    """Hypergeometric parameters attached to a spectral point lam."""

    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def a(self):
        return self.lam / 2.0 - 1.0

    @property
    def b(self):
        return self.lam / 2.0 + 1.0

    @property
    def c(self):
        return 0.5 + 0.0j


def _near_nonpos_int(z, tol=1e-12):
    z = complex(z)
    n = round(z.real)
    return n <= 0 and abs(z - n) < tol


def _near_int(z, tol=1e-8):
    z = complex(z)
    return abs(z.imag) < tol and abs(z.real - round(z.real)) < tol


def _series(a, b, c, z, max_terms=700):
    term = 1.0 + 0.0j
    total = term
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= 1e-16 * max(abs(total), 1e-300):
            return total
    raise EvaluationDomainError("hypergeometric series did not converge")


def _connection_raw(a, b, c, z):
    # z -> 1-z connection, valid for c-a-b away from the integers
    s = c - a - b
    t1 = (_gamma(c) * _gamma(s) * _rgamma(c - a) * _rgamma(c - b)
          * _series(a, b, a + b - c + 1.0, 1.0 - z))
    t2 = (_gamma(c) * _gamma(-s) * _rgamma(a) * _rgamma(b)
          * (1.0 - z) ** s * _series(c - a, c - b, s + 1.0, 1.0 - z))
    return t1 + t2


def f21(a, b, c, z):
    """Gauss hypergeometric function on the series-reachable domain.

    Dispatch: direct series for |z| <= 0.6 (or a terminating series when
    a or b is a nonpositive integer), the 1-z connection for z near 1
    (with a +/-1e-6 shift of c averaged to cancel the pole when c-a-b is
    near an integer), the Pfaff map z -> z/(z-1) when that contracts, and
    the Gauss summation at z = 1.  Anything else raises
    EvaluationDomainError.
    """
    a, b, c, z = complex(a), complex(b), complex(c), complex(z)
    if _near_nonpos_int(c):
        raise EvaluationDomainError("c is a nonpositive integer (parameter pole)")
    if z == 0:
        return 1.0 + 0.0j
    if _near_nonpos_int(a) or _near_nonpos_int(b):
        return _series(a, b, c, z)  # terminating polynomial, any z
    if abs(z) <= 0.6:
        return _series(a, b, c, z)
    if z == 1.0:
        if (c - a - b).real <= 0:
            raise EvaluationDomainError("f21 diverges at z = 1 for Re(c-a-b) <= 0")
        return _gamma(c) * _gamma(c - a - b) * _rgamma(c - a) * _rgamma(c - b)
    if abs(1.0 - z) <= 0.6:
        if _near_int(c - a - b):
            e = 1e-6
            return 0.5 * (_connection_raw(a, b, c + e, z)
                          + _connection_raw(a, b, c - e, z))
        return _connection_raw(a, b, c, z)
    w = z / (z - 1.0)
    if abs(w) <= 0.6:
        return (1.0 - z) ** (-a) * _series(a, c - b, c, w)
    raise EvaluationDomainError("z = %r not reachable by the implemented maps" % z)


#: Gamma arguments of w0(lam) as offsets from lam/2
_W0_NUM = (0.25, 0.75)
_W0_DEN = (-0.5, 1.5)


def w0_closed(lam):
    """Closed-form scaled Wronskian (one-point-matched constant: 1).

    Denominator Gamma poles are exact zeros of w0 and return 0;
    numerator Gamma poles are poles of w0 and raise PoleError with the
    offending factor recorded.  Values outside the strip Re lam in
    [0, 1/3] are returned as-is (useful for widened scans) without the
    strip's lower-bound guarantee.
    """
    lam = complex(lam)
    h = lam / 2.0
    for off in _W0_NUM:
        if _near_nonpos_int(h + off):
            raise PoleError("w0 pole at lambda = %r" % lam,
                            side="gamma(lam/2 + %g)" % off)
    for off in _W0_DEN:
        if _near_nonpos_int(h + off):
            return 0.0 + 0.0j
    return complex(np.exp(_loggamma(h + 0.25) + _loggamma(h + 0.75)
                          - _loggamma(h - 0.5) - _loggamma(h + 1.5)))


def _w0_abs_grid(eps, omega):
    """|w0| on a meshgrid, with exact zeros/poles patched in."""
    lam = eps[:, None] + 1j * omega[None, :]
    h = lam / 2.0
    with np.errstate(all="ignore"):
        logw = (_loggamma(h + 0.25) + _loggamma(h + 0.75)
                - _loggamma(h - 0.5) - _loggamma(h + 1.5))
        vals = np.abs(np.exp(logw))

    def pole_mask(offs):
        m = np.zeros(lam.shape, dtype=bool)
        for off in offs:
            z = h + off
            m |= ((np.abs(z.imag) < 1e-12)
                  & (np.abs(z.real - np.round(z.real)) < 1e-12)
                  & (np.round(z.real) <= 0))
        return m

    vals[pole_mask(_W0_DEN)] = 0.0
    vals[pole_mask(_W0_NUM)] = np.inf
    vals[np.isnan(vals)] = np.inf
    return vals


@dataclass
class ZeroScanResult:
    """Grid scan of |w0| with refined minimum."""

    minimum: float
    argmin: complex
    eps_grid: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray


def zero_scan(eps_range, omega_max, eps_step=0.01, omega_step=0.05,
              refine=10):
    """Scan |w0_closed| on a strip grid and refine the smallest values.

    eps_range is (lo, hi) with lo >= 0; omega_max <= 100.  The ``refine``
    smallest grid values seed local Nelder-Mead minimizations of |w0|.
    """
    lo, hi = float(eps_range[0]), float(eps_range[1])
    if not (0.0 <= lo < hi):
        raise InvalidArgumentError("eps_range must satisfy 0 <= lo < hi")
    if not (0.0 < omega_max <= 100.0):
        raise InvalidArgumentError("omega_max must lie in (0, 100]")
    eps = np.arange(lo, hi + 0.5 * eps_step, eps_step)
    omega = np.arange(-omega_max, omega_max + 0.5 * omega_step, omega_step)
    vals = _w0_abs_grid(eps, omega)

    def objective(p):
        # refinement stays inside the scanned rectangle: the reported
        # minimum must describe this strip, not a zero elsewhere.  A
        # large finite penalty keeps the simplex comparisons NaN-free.
        if not (lo <= p[0] <= hi and -omega_max <= p[1] <= omega_max):
            return 1e18
        try:
            return abs(w0_closed(p[0] + 1j * p[1]))
        except PoleError:
            return 1e18

    flat = np.argsort(vals, axis=None)[:refine]
    best_val, best_lam = np.inf, None
    for idx in flat:
        i, j = np.unravel_index(idx, vals.shape)
        res = minimize(objective, [eps[i], omega[j]], method="Nelder-Mead",
                       options=dict(xatol=1e-10, fatol=1e-14, maxiter=400))
        cand = float(res.fun)
        if cand < best_val:
            best_val = cand
            best_lam = complex(res.x[0], res.x[1])
        if vals[i, j] < best_val:
            best_val = float(vals[i, j])
            best_lam = complex(eps[i], omega[j])
    return ZeroScanResult(minimum=best_val, argmin=best_lam,
                          eps_grid=eps, omega_grid=omega, values=vals)
