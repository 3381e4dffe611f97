"""Prime-side products P_X, P~_X, P*_X, the coefficients alpha_k(n), and the
factors a(k, sigma), F_X(k, sigma) entering the moments of P_X."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .arithmetic import mangoldt_table, sieve
from .errors import DomainError
from .smoothing import SmoothingWeight, weight_v
from .specfun import EULER_GAMMA, ComplexPoint, dk_prime_power_series, exp_integral_e1

_CHUNK = 1 << 22  # elements per (points x terms) block


def _as_X(X_or_w):
    X = X_or_w.X if isinstance(X_or_w, SmoothingWeight) else float(X_or_w)
    if X < 2:
        raise DomainError("need X >= 2")
    return X


def _as_s(s):
    if isinstance(s, ComplexPoint):
        return np.asarray(s.s)
    return np.asarray(s, dtype=complex)


def dirichlet_sum(n, coeffs, s):
    """sum_j coeffs[j] * n[j]^(-s), vectorised over s (chunked)."""
    s = np.asarray(s, dtype=complex)
    flat = np.atleast_1d(s).ravel()
    logn = np.log(np.asarray(n, dtype=float))
    coeffs = np.asarray(coeffs)
    out = np.zeros(flat.shape, dtype=complex)
    step = max(1, _CHUNK // max(1, logn.size))
    for i in range(0, flat.size, step):
        blk = flat[i:i + step]
        out[i:i + step] = np.exp(-np.outer(blk, logn)) @ coeffs
    return out.reshape(s.shape) if s.ndim else complex(out[0])


def critical_line_cos_sum(n, coeffs, t):
    """sum_j coeffs[j] cos(t log n_j) / sqrt(n_j): the real part on sigma = 1/2."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    logn = np.log(np.asarray(n, dtype=float))
    c = np.asarray(coeffs, dtype=float) / np.sqrt(np.asarray(n, dtype=float))
    out = np.zeros(flat.shape)
    step = max(1, _CHUNK // max(1, logn.size))
    for i in range(0, flat.size, step):
        blk = flat[i:i + step]
        out[i:i + step] = np.cos(np.outer(blk, logn)) @ c
    return out.reshape(t.shape) if t.ndim else float(out[0])


def prime_power_terms(X):
    """(n, Lambda(n)/log n) for prime powers n <= X."""
    tab = mangoldt_table(int(math.floor(X)))
    return tab.prime_powers, 1.0 / tab.exponents


def log_p_x(X_or_w, s):
    X = _as_X(X_or_w)
    n, c = prime_power_terms(X)
    return dirichlet_sum(n, c, _as_s(s))


def p_x(X_or_w, s):
    """P_X(s) = exp(sum_{n <= X} Lambda(n) / (n^s log n))."""
    return np.exp(log_p_x(X_or_w, s))


def tilde_weights(w: SmoothingWeight, n):
    return weight_v(w, np.exp(np.log(np.asarray(n, dtype=float)) / w.log_X))


def log_p_x_tilde(w: SmoothingWeight, s):
    n, c = prime_power_terms(w.X)
    return dirichlet_sum(n, c * tilde_weights(w, n), _as_s(s))


def p_x_tilde(w: SmoothingWeight, s):
    """P~_X: each term of P_X weighted by v(e^(log n / log X))."""
    return np.exp(log_p_x_tilde(w, s))


def log_abs_p_x_critical(X_or_w, t, smoothed=False):
    """log |P_X(1/2 + it)| (or of P~_X when smoothed)."""
    if smoothed:
        w = X_or_w
        n, c = prime_power_terms(w.X)
        c = c * tilde_weights(w, n)
    else:
        n, c = prime_power_terms(_as_X(X_or_w))
    return critical_line_cos_sum(n, c, t)


def _split_primes(X):
    ps = sieve(int(math.floor(X))).primes if X >= 2 else np.zeros(0, dtype=np.int64)
    low = ps[ps * ps <= X]
    high = ps[ps * ps > X]
    return low, high


def p_x_star(X, s):
    """P*_X(s) = prod_{p<=X} (1-p^-s)^-1 prod_{sqrt X < p <= X} (1 + p^(-2s)/2)^-1."""
    X = _as_X(X)
    s = _as_s(s)
    ps = sieve(int(math.floor(X))).primes
    _, high = _split_primes(X)
    flat = np.atleast_1d(s).ravel()
    out = np.empty(flat.shape, dtype=complex)
    lp, lh = np.log(ps.astype(float)), np.log(high.astype(float))
    for i, si in enumerate(flat):
        a = np.exp(-si * lp)
        b = np.exp(-2 * si * lh)
        out[i] = np.exp(-np.sum(np.log1p(-a)) - np.sum(np.log1p(0.5 * b)))
    return out.reshape(s.shape) if s.ndim else complex(out[0])


def _series_mul(a, b):
    return np.convolve(a, b)[: len(a)]


def _series_pow(base, k, mmax):
    """(sum_m base[m] x^m)^k for base[0] = 1, via the J.C.P. Miller recurrence."""
    a = np.zeros(mmax + 1)
    a[: min(len(base), mmax + 1)] = base[: mmax + 1]
    out = np.zeros(mmax + 1)
    out[0] = 1.0
    for m in range(1, mmax + 1):
        j = np.arange(1, m + 1)
        out[m] = np.sum((k * j - (m - j)) * a[j] * out[m - j]) / m
    return out


def local_alpha_series(k, mmax, upper):
    """Coefficients of (1-x)^-k, times (1 + x^2/2)^-k when upper is True."""
    base = dk_prime_power_series(k, mmax)
    if not upper:
        return base
    half = np.zeros(mmax + 1)
    half[0] = 1.0
    if mmax >= 2:
        half[2] = 0.5
    return _series_mul(base, _series_pow(half, -k, mmax))


@dataclass(frozen=True)
class DirichletCoefficientTable:
    """alpha_k(n) on X-smooth n <= bound, with sum alpha_k(n) n^-s = P*_X(s)^k."""

    k: float
    X: float
    bound: int
    n: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __getitem__(self, m):
        i = np.searchsorted(self.n, m)
        if i < self.n.size and self.n[i] == m:
            return float(self.values[i])
        return 0.0

    def partial_sum(self, s, B=None):
        keep = self.n <= (B if B is not None else self.bound)
        return dirichlet_sum(self.n[keep], self.values[keep], _as_s(s))


def alpha_coeffs(k: float, X: float, bound: int) -> DirichletCoefficientTable:
    """Per-prime local expansion then multiplicative assembly over S(X)."""
    if bound < 1:
        raise DomainError("bound must be >= 1")
    X = _as_X(X)
    n = np.array([1], dtype=np.int64)
    val = np.array([1.0])
    ps = sieve(int(math.floor(X))).primes
    for p in ps:
        p = int(p)
        if p > bound:
            break
        mmax = int(math.floor(math.log(bound) / math.log(p) + 1e-12))
        while p ** (mmax + 1) <= bound:
            mmax += 1
        while mmax > 0 and p ** mmax > bound:
            mmax -= 1
        loc = local_alpha_series(k, mmax, upper=p * p > X)
        new_n, new_v = [n], [val]
        q = 1
        for m in range(1, mmax + 1):
            q *= p
            sel = n <= bound // q
            new_n.append(n[sel] * q)
            new_v.append(val[sel] * loc[m])
        n = np.concatenate(new_n)
        val = np.concatenate(new_v)
    order = np.argsort(n)
    return DirichletCoefficientTable(float(k), X, int(bound), n[order], val[order])


def alpha_abs_total(k, X, sigma, mmax=200):
    """sum over all of S(X) of |alpha_k(n)| n^-sigma, as a product of local sums."""
    X = _as_X(X)
    low, high = _split_primes(X)
    tot = 0.0
    for group, upper in ((low, False), (high, True)):
        if group.size == 0:
            continue
        loc = np.abs(local_alpha_series(k, mmax, upper))
        x = group.astype(float)[:, None] ** (-sigma * np.arange(mmax + 1)[None, :])
        tot += float(np.sum(np.log(x @ loc)))
    return math.exp(tot)


def _local_log_series(k, jmax):
    # log of (1-x)^{k^2} sum_m d_k(p^m)^2 x^m as a power series in x
    d2 = dk_prime_power_series(k, jmax) ** 2
    logs = np.zeros(jmax + 1)
    # log(sum d2 x^m) via b' = (log a)' a recurrence
    for m in range(1, jmax + 1):
        j = np.arange(1, m)
        logs[m] = (m * d2[m] - np.sum(j * logs[j] * d2[m - j])) / m
    logs[1:] -= k * k / np.arange(1, jmax + 1)
    return logs


def a_factor(k: float, sigma: float = 0.5, tail_cut: int = 100_000,
             mmax: int = 400, jmax: int = 8) -> float:
    """a(k, sigma) = prod_p (1 - p^-2sigma)^(k^2) sum_m d_k(p^m)^2 p^(-2m sigma).

    Primes up to tail_cut are multiplied exactly; beyond it the local factor
    is expanded as 1 + c_2 x^2 + ... in x = p^(-2 sigma) and the prime sums of
    x^j are replaced by E1((2 sigma j - 1) log tail_cut).
    """
    if sigma < 0.5:
        raise DomainError("a(k, sigma) needs sigma >= 1/2")
    if k == 0:
        return 1.0
    ps = sieve(tail_cut).primes.astype(float)
    d2 = dk_prime_power_series(k, mmax) ** 2
    total = 0.0
    # small primes need many terms; split to keep the Vandermonde block small
    for lo, hi, M in ((0, 2000, mmax), (2000, None, 40)):
        blk = ps[(ps > lo) & ((ps <= hi) if hi else True)]
        if blk.size == 0:
            continue
        x = blk ** (-2 * sigma)
        powers = np.cumprod(np.concatenate([np.ones((blk.size, 1)),
                                            np.repeat(x[:, None], M, axis=1)], axis=1), axis=1)
        local = powers @ d2[: M + 1]
        total += float(np.sum(k * k * np.log1p(-x) + np.log(local)))
    ell = _local_log_series(k, jmax)
    Y = math.log(tail_cut)
    for j in range(2, jmax + 1):
        if ell[j] != 0:
            total += ell[j] * float(exp_integral_e1((2 * sigma * j - 1) * Y).real)
    return math.exp(total)


def a_factor_oracle_k2(tail_cut: int = 10**7) -> float:
    """a(2, 1/2) from the closed form local factor 1 - p^-2 (sum (m+1)^2 x^m = (1+x)/(1-x)^3)."""
    ps = sieve(tail_cut).primes.astype(float)
    head = float(np.sum(np.log1p(-ps ** -2.0)))
    # sum_{p > Y} log(1 - p^-2) ~ -E1(log Y)
    return math.exp(head - exp_integral_e1(math.log(tail_cut)).real)


def f_factor(k: float, sigma: float, X: float) -> float:
    """F_X(k, sigma): (e^gamma log X)^(k^2) on sigma = 1/2, else zeta(2 sigma)^(k^2) e^(-k^2 E1((2 sigma - 1) log X))."""
    if not 0.5 <= sigma <= 1.0:
        raise DomainError("F_X(k, sigma) defined for 1/2 <= sigma <= 1")
    if X < 2:
        raise DomainError("need X >= 2")
    if k == 0:
        return 1.0
    k2 = k * k
    if sigma == 0.5:
        return (math.exp(EULER_GAMMA) * math.log(X)) ** k2
    e1 = exp_integral_e1((2 * sigma - 1) * math.log(X)).real
    return float(special.zeta(2 * sigma)) ** k2 * math.exp(-k2 * e1)


def predicted_p_moment(k: float, sigma: float, X: float, tail_cut: int = 100_000) -> float:
    """Main term a(k, sigma) F_X(k, sigma) for the 2k-th moment of |P_X(sigma + it)|."""
    f = f_factor(k, sigma, X)
    if k == 0:
        return 1.0
    return a_factor(k, sigma, tail_cut) * f
