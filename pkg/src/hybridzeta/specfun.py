"""Special functions: complex exponential integral, cosine integral, the
Barnes-G moment ratio and the divisor kernel d_k(p^m).

All routines are vectorised over numpy arrays and pure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
# zeta'(-1) = 1/12 - log(Glaisher's constant)
_ZETA_PRIME_MINUS1 = -0.16542114370045092921

_SERIES_RADIUS = 1.5
_SERIES_LOSS = 5.0  # series also used where |z| + Re z <= this (no cancellation)
_SERIES_CAP = 600.0
_ASYMPTOTIC_RADIUS = 50.0


@dataclass(frozen=True)
class ComplexPoint:
    """s = sigma + i t."""

    sigma: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and math.isfinite(self.t)):
            raise DomainError("ComplexPoint components must be finite")

    @property
    def s(self) -> complex:
        return complex(self.sigma, self.t)

    @classmethod
    def coerce(cls, s):
        if isinstance(s, cls):
            return s
        s = complex(s)
        return cls(s.real, s.imag)


class BranchConvention(enum.Enum):
    """How E1 is evaluated on its branch cut (the negative real axis).

    PRINCIPAL takes the limit from the upper half plane. SYMMETRIC averages
    the two one-sided limits, which removes the +-i*pi jump.
    """

    PRINCIPAL = "principal"
    SYMMETRIC = "symmetric-average"


def _e1_series(z, on_cut, conv):
    r = np.abs(z)
    nterms = int(math.e * float(r.max()) + 40) if z.size else 0
    term = np.ones_like(z)
    acc = np.zeros_like(z)
    for m in range(1, nterms + 1):
        term = term * (-z) / m
        acc += term / m
    logz = np.log(z)
    if on_cut.any():
        # principal branch: approach from above, log(-x) = log x + i*pi
        logz = np.where(on_cut, np.log(r) + 1j * np.pi, logz)
    out = -EULER_GAMMA - logz - acc
    if conv is BranchConvention.SYMMETRIC and on_cut.any():
        out = np.where(on_cut, out.real + 0j, out)
    return out


def _e1_contfrac(z, maxiter=2000, tol=1e-16):
    # modified Lentz on the even contraction
    # E1(z) = e^-z / (z+1 - 1/(z+3 - 4/(z+5 - ...)))
    tiny = 1e-300
    b = z + 1.0
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.arange(z.size)
    for i in range(1, maxiter + 1):
        an = -float(i * i)
        b = b + 2.0
        dd = an * d[active] + b[active]
        dd = np.where(dd == 0, tiny, dd)
        d[active] = 1.0 / dd
        cc = b[active] + an / c[active]
        cc = np.where(cc == 0, tiny, cc)
        c[active] = cc
        delta = c[active] * d[active]
        h[active] *= delta
        done = np.abs(delta - 1.0) < tol
        if done.all():
            break
        active = active[~done]
    return h * np.exp(-z)


def _e1_asymptotic(z, conv, nterms=60):
    acc = np.ones_like(z)
    term = np.ones_like(z)
    frozen = np.zeros(z.shape, dtype=bool)
    prev = np.ones(z.shape)
    for m in range(1, nterms + 1):
        term = term * (-m) / z
        mag = np.abs(term)
        # optimal truncation: stop at the smallest term
        frozen |= mag > prev
        acc = np.where(frozen, acc, acc + term)
        prev = mag
    out = np.exp(-z) / z * acc
    # on the cut itself the expansion is the symmetric average; the principal
    # value carries the -i*pi jump (exponentially small relative to |E1|)
    on_cut = (z.imag == 0) & (z.real < 0)
    if conv is BranchConvention.PRINCIPAL and on_cut.any():
        out = np.where(on_cut, out - 1j * np.pi, out)
    return out


def exp_integral_e1(z, conv: BranchConvention = BranchConvention.PRINCIPAL):
    """Exponential integral E1(z) = int_z^inf e^-w / w dw for complex z.

    Power series where |z| <= 1.5 or |z| + Re z <= 5 (the series cannot
    cancel badly there), continued fraction for moderate |z|, asymptotic
    expansion beyond |z| = 50.

    Raises DomainError at z = 0.
    """
    z_in = np.asarray(z)
    zz = np.atleast_1d(z_in).astype(complex).ravel()
    if np.any(zz == 0):
        raise DomainError("E1 diverges at z = 0")
    if not np.all(np.isfinite(zz)):
        raise DomainError("E1 argument must be finite")
    r = np.abs(zz)
    on_cut = (zz.imag == 0) & (zz.real < 0)
    use_series = (r <= _SERIES_RADIUS) | ((r + zz.real <= _SERIES_LOSS) & (r <= _SERIES_CAP))
    use_asym = ~use_series & (r > _ASYMPTOTIC_RADIUS)
    use_cf = ~use_series & ~use_asym
    out = np.empty_like(zz)
    if use_series.any():
        out[use_series] = _e1_series(zz[use_series], on_cut[use_series], conv)
    if use_cf.any():
        out[use_cf] = _e1_contfrac(zz[use_cf])
    if use_asym.any():
        out[use_asym] = _e1_asymptotic(zz[use_asym], conv)
    if z_in.ndim == 0:
        return complex(out[0])
    return out.reshape(z_in.shape)


def cosine_integral_ci(x):
    """Ci(x) = -int_x^inf cos(w)/w dw for x > 0, via Ci(x) = -Re E1(ix)."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0) or not np.all(np.isfinite(xa)):
        raise DomainError("Ci requires finite x > 0")
    val = -np.real(exp_integral_e1(1j * xa))
    if xa.ndim == 0:
        return float(val)
    return val


def ci_cosine_transform(A: float, n: int) -> float:
    """Closed form of int_0^inf Ci(A t) cos(n t) dt for A > 0, n >= 1."""
    if A <= 0 or n < 1:
        raise DomainError("need A > 0 and n >= 1")
    if A < n:
        return -math.pi / (2 * n)
    if A == n:
        return -math.pi / (4 * n)
    return 0.0


def flat_top_taper(r):
    """C-infinity window equal to 1 on [0, 1/2] and 0 beyond 1."""
    r = np.abs(np.asarray(r, dtype=float))
    y = np.clip(2.0 * (1.0 - r), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
        h1 = np.where(y < 1, np.exp(-1.0 / np.where(y < 1, 1.0 - y, 1.0)), 0.0)
    return h0 / (h0 + h1)


def ci_cosine_transform_quadrature(A: float, n: int, cutoff: float = 2.0e4,
                                   nodes_per_panel: int = 24) -> float:
    """Numerical int_0^inf Ci(A t) cos(n t) dt.

    The conditionally convergent integral is summed with a flat-top taper
    at two cutoffs and Richardson-extrapolated in 1/cutoff.
    """
    if A <= 0 or n < 1:
        raise DomainError("need A > 0 and n >= 1")

    def tapered(R):
        # log singularity at 0: integrate [0, 1] adaptively
        g = lambda t: special.sici(A * t)[1] * math.cos(n * t)  # noqa: E731
        cut = min(1.0, 0.5 / A)
        head = sum(integrate.quad(g, a, b, limit=200, epsabs=1e-13)[0]
                   for a, b in ((0.0, cut), (cut, 1.0)) if b > a)
        panel = math.pi / (2 * max(A, n))
        edges = np.arange(1.0, R + panel, panel)
        xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
        a, b = edges[:-1, None], edges[1:, None]
        t = 0.5 * (b - a) * xg + 0.5 * (b + a)
        f = special.sici(A * t)[1] * np.cos(n * t) * flat_top_taper(t / R)
        return head + float(np.sum(0.5 * (b - a) * wg * f))

    i1 = tapered(cutoff)
    i2 = tapered(2 * cutoff)
    return 2 * i2 - i1


def log_barnes_g1p(z):
    """log G(1+z) for real z > -1 (shift up, then Stirling-type expansion)."""
    z = float(z)
    if z <= -1:
        raise DomainError("log G(1+z) implemented for z > -1")
    shift = max(0, int(math.ceil(20.0 - z)))
    w = z + shift
    # asymptotic expansion of log G(1+w)
    lw = math.log(w)
    val = (0.5 * w * w * lw - 0.75 * w * w + 0.5 * w * math.log(2 * math.pi)
           - lw / 12.0 + _ZETA_PRIME_MINUS1)
    bern = special.bernoulli(24)
    for k in range(1, 11):
        val += bern[2 * k + 2] / (4 * k * (k + 1) * w ** (2 * k))
    # G(1+z+m) = G(1+z) * prod_{j<m} Gamma(1+z+j)
    if shift:
        val -= float(np.sum(special.gammaln(1.0 + z + np.arange(shift))))
    return val


def barnes_ratio(k: float) -> float:
    """G(k+1)^2 / G(2k+1), the CUE moment constant, for k > -1/2."""
    if not k > -0.5:
        raise DomainError("barnes_ratio needs k > -1/2")
    if k == 0:
        return 1.0
    return math.exp(2.0 * log_barnes_g1p(k) - log_barnes_g1p(2.0 * k))


def dk_prime_power(k: float, m: int) -> float:
    """d_k(p^m) = Gamma(m+k) / (m! Gamma(k)); the k -> 0 limit is [m == 0]."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    val = 1.0
    for j in range(m):
        val *= (k + j) / (j + 1)
    return val


def dk_prime_power_series(k: float, mmax: int) -> np.ndarray:
    """Array of d_k(p^m) for m = 0..mmax."""
    out = np.empty(mmax + 1)
    out[0] = 1.0
    for j in range(mmax):
        out[j + 1] = out[j] * (k + j) / (j + 1)
    return out
