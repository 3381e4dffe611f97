"""The smoothing weight u, its tail integral v and the kernel U.

With y = X log(x/e) + 1 the support [e^(1-1/X), e] of u maps onto [0, 1]
and log x = 1 + (y - 1)/X, so every integral against u becomes an integral
of the bump f over [0, 1].
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .specfun import EULER_GAMMA, BranchConvention, exp_integral_e1


def _raw_bump(y):
    y = np.asarray(y, dtype=float)
    inside = (y > 0) & (y < 1)
    yy = np.where(inside, y, 0.5)
    return np.where(inside, np.exp(-1.0 / (yy * (1.0 - yy))), 0.0)


_BUMP_MASS = integrate.quad(lambda y: float(_raw_bump(y)), 0.0, 1.0,
                            epsabs=0.0, epsrel=1e-13, limit=200)[0]


def bump(y):
    """Canonical f: c exp(-1/(y(1-y))) on (0, 1), normalized to mass 1."""
    return _raw_bump(y) / _BUMP_MASS


@functools.lru_cache(maxsize=None)
def _gauss_legendre01(order, panels=1):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


@dataclass(frozen=True)
class SmoothingWeight:
    """u(x) = X f(X log(x/e) + 1)/x with the canonical bump f."""

    X: float
    order: int = 64

    def __post_init__(self):
        if not (self.X >= 2 and math.isfinite(self.X)):
            raise DomainError("SmoothingWeight needs finite X >= 2")
        if self.order < 4:
            raise DomainError("quadrature order must be >= 4")

    @property
    def log_X(self):
        return math.log(self.X)

    @property
    def support(self):
        return math.exp(1.0 - 1.0 / self.X), math.e

    def nodes(self, panels=1):
        """(log x, weight) pairs: sum of weight * g(log x) approximates int u(x) g(log x) dx."""
        y, w = _gauss_legendre01(self.order, panels)
        return 1.0 + (y - 1.0) / self.X, w * bump(y)


def weight_u(w: SmoothingWeight, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("u is defined for x > 0")
    y = w.X * (np.log(xa) - 1.0) + 1.0
    val = w.X * bump(y) / xa
    return float(val) if xa.ndim == 0 else val


def _bump_tail(y0):
    # int_{y0}^1 f, by Gauss-Legendre on [y0, 1]
    y0 = np.clip(np.asarray(y0, dtype=float), 0.0, 1.0)
    x, wt = np.polynomial.legendre.leggauss(80)
    yy = y0[..., None] + (1.0 - y0[..., None]) * 0.5 * (x + 1.0)
    return 0.5 * (1.0 - y0) * np.sum(wt * bump(yy), axis=-1)


def weight_v(w: SmoothingWeight, t):
    """v(t) = int_t^inf u(x) dx."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise DomainError("v is defined for t >= 0")
    with np.errstate(divide="ignore"):
        y = np.where(ta > 0, w.X * (np.log(np.where(ta > 0, ta, 1.0)) - 1.0) + 1.0, -np.inf)
    val = np.where(y <= 0, 1.0, np.where(y >= 1, 0.0, _bump_tail(np.clip(y, 0, 1))))
    return float(val) if ta.ndim == 0 else val


def _panels_for(w, zmax):
    # E1(z log x) oscillates |z|/X times over the support
    return max(1, int(math.ceil(zmax / (8.0 * w.X))))


def kernel_U(w: SmoothingWeight, z, conv: BranchConvention = BranchConvention.SYMMETRIC):
    """U(z) = int u(x) E1(z log x) dx.

    z = 0 raises DomainError: exp(-U) vanishes there and callers map it to a
    zero of the hybrid product.
    """
    za = np.asarray(z, dtype=complex)
    zz = np.atleast_1d(za).ravel()
    if np.any(zz == 0):
        raise DomainError("U(0) is infinite (zero-coincidence)")
    lx, wt = w.nodes(_panels_for(w, float(np.abs(zz).max())))
    out = np.empty(zz.shape, dtype=complex)
    step = max(1, 4_000_000 // lx.size)
    for i in range(0, zz.size, step):
        blk = zz[i:i + step]
        out[i:i + step] = exp_integral_e1(blk[:, None] * lx[None, :], conv) @ wt
    if za.ndim == 0:
        return complex(out[0])
    return out.reshape(za.shape)


def log_moment(w: SmoothingWeight):
    """int u(x) log log x dx; near 0, U(z) = -gamma - log z - log_moment + O(z)."""
    lx, wt = w.nodes()
    return float(np.sum(wt * np.log(lx)))


def small_z_constant(w: SmoothingWeight):
    """C with exp(-U(z)) ~ C z as z -> 0."""
    return math.exp(EULER_GAMMA + log_moment(w))


def ci_tail_integral(A):
    """int_A^inf Ci(x) dx = sin A - A Ci(A) for A > 0."""
    from .specfun import cosine_integral_ci

    A = np.asarray(A, dtype=float)
    return np.sin(A) - A * cosine_integral_ci(A)


class CriticalLineKernel:
    """Fast U(iy) for real y via a spline of the smooth part U(iy) + log(iy).

    U(-iy) = conj U(iy), so only y >= 0 is tabulated. Outside [0, y_max] the
    direct quadrature is used.
    """

    def __init__(self, w: SmoothingWeight | None, y_max: float, step: float = 0.02):
        from scipy.interpolate import CubicSpline

        self.weight = w
        self.y_max = float(y_max)
        n = int(math.ceil(self.y_max / step)) + 1
        y = np.linspace(0.0, self.y_max, n)
        y[0] = 1e-300  # placeholder, replaced by the limit below
        g = np.empty(n, dtype=complex)
        yy = y[1:]
        g[1:] = self._direct(1j * yy) + np.log(1j * yy)
        # U(z) + log z -> -gamma - int u log log x as z -> 0
        g[0] = -EULER_GAMMA - (log_moment(w) if w is not None else 0.0)
        y[0] = 0.0
        self._re = CubicSpline(y, g.real)
        self._im = CubicSpline(y, g.imag)

    def _direct(self, z):
        if self.weight is None:
            return exp_integral_e1(z)
        return kernel_U(self.weight, z)

    def __call__(self, y):
        """U(iy) for real y != 0 (vectorised)."""
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        inside = ay <= self.y_max
        out = np.empty(y.shape, dtype=complex)
        ai = ay[inside]
        gi = self._re(ai) + 1j * self._im(ai)
        # log(i|y|) = log|y| + i pi/2
        out[inside] = gi - np.log(ai) - 0.5j * np.pi
        if (~inside).any():
            out[~inside] = self._direct(1j * ay[~inside])
        neg = y < 0
        out[neg] = np.conj(out[neg])
        return out

    def real_part(self, y):
        """Re U(iy), the only part entering |Z| on the critical line."""
        ay = np.abs(np.asarray(y, dtype=float))
        inside = ay <= self.y_max
        out = np.empty(ay.shape)
        out[inside] = self._re(ay[inside]) - np.log(ay[inside])
        if (~inside).any():
            out[~inside] = self._direct(1j * ay[~inside]).real
        return out
