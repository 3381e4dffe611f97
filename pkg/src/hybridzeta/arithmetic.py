"""Prime-side combinatorics: sieving, von Mangoldt, smooth numbers,
Mertens-type products and coprime harmonic sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .specfun import EULER_GAMMA, exp_integral_e1

_DENSE_LIMIT = 10**7
_SEGMENT = 1 << 22


@dataclass(frozen=True)
class PrimeTable:
    limit: int
    primes: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.primes)

    def upto(self, x):
        return self.primes[: np.searchsorted(self.primes, x, side="right")]


def _sieve_dense(limit):
    # odd-only sieve: index i stands for 2i+1
    size = (limit - 1) // 2 + 1
    is_p = np.ones(size, dtype=bool)
    is_p[0] = False
    for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
        if is_p[i]:
            p = 2 * i + 1
            is_p[p * p // 2::p] = False
    odd = 2 * np.nonzero(is_p)[0] + 1
    return np.concatenate(([2], odd)).astype(np.int64)


def _sieve_segmented(limit):
    base = _sieve_dense(math.isqrt(limit) + 1)[1:]
    chunks = [_sieve_dense(min(limit, _DENSE_LIMIT))]
    lo = min(limit, _DENSE_LIMIT) + 1
    if lo % 2 == 0:
        lo += 1
    while lo <= limit:
        hi = min(limit, lo + 2 * _SEGMENT - 1)
        # odd numbers lo, lo+2, ..., <= hi
        n = (hi - lo) // 2 + 1
        seg = np.ones(n, dtype=bool)
        for p in base:
            if p * p > hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            seg[(start - lo) // 2::p] = False
        chunks.append(lo + 2 * np.nonzero(seg)[0])
        lo = hi + 2 if hi % 2 == 1 else hi + 1
    return np.concatenate(chunks).astype(np.int64)


def sieve(limit: int) -> PrimeTable:
    """All primes <= limit, ascending (segmented above 10^7)."""
    limit = int(limit)
    if limit < 2:
        raise DomainError("sieve needs limit >= 2")
    primes = _sieve_dense(limit) if limit <= _DENSE_LIMIT else _sieve_segmented(limit)
    return PrimeTable(limit, primes)


def mangoldt(n: int) -> float:
    """Lambda(n): log p if n is a power of the prime p, else 0."""
    n = int(n)
    if n < 1:
        raise DomainError("mangoldt needs n >= 1")
    if n == 1:
        return 0.0
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
        p += 1
    return math.log(n)


@dataclass(frozen=True)
class MangoldtTable:
    """Lambda(n) for n <= limit, stored as its prime-power support."""

    limit: int
    prime_powers: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)
    exponents: np.ndarray = field(repr=False)

    @property
    def logs(self):
        return np.log(self.primes.astype(float))

    def dense(self):
        if self.limit > _DENSE_LIMIT:
            raise MemoryError("dense Lambda table only up to 10^7")
        out = np.zeros(self.limit + 1)
        out[self.prime_powers] = self.logs
        return out


def mangoldt_table(limit: int, primes: PrimeTable | None = None) -> MangoldtTable:
    if limit < 1:
        raise DomainError("limit must be >= 1")
    if limit < 2:
        e = np.zeros(0, dtype=np.int64)
        return MangoldtTable(int(limit), e, e, e)
    pt = primes if primes is not None and primes.limit >= limit else sieve(limit)
    ps = pt.upto(limit)
    pp, base, expo = [], [], []
    j = 1
    cur = ps.copy()
    while cur.size:
        pp.append(cur)
        base.append(ps[: cur.size])
        expo.append(np.full(cur.size, j))
        j += 1
        nxt = cur * ps[: cur.size]
        keep = nxt <= limit
        # ps is ascending so the surviving prefix is contiguous
        cur = nxt[keep]
    pp = np.concatenate(pp)
    order = np.argsort(pp, kind="stable")
    return MangoldtTable(int(limit), pp[order], np.concatenate(base)[order],
                         np.concatenate(expo)[order])


def chebyshev_psi(x: int) -> float:
    """psi(x) = sum_{n <= x} Lambda(n)."""
    return float(np.sum(mangoldt_table(int(x)).logs))


def smooth_numbers(X: int, bound: int) -> np.ndarray:
    """All n <= bound whose prime factors are all <= X, ascending."""
    if X < 2 or bound < 1:
        raise DomainError("need X >= 2 and bound >= 1")
    out = np.array([1], dtype=np.int64)
    for p in sieve(int(min(X, bound)) if min(X, bound) >= 2 else 2).primes:
        if p > bound:
            break
        new = [out]
        q = int(p)
        while q <= bound:
            m = out[out <= bound // q] * q
            new.append(m)
            q *= int(p)
        out = np.concatenate(new)
    return np.sort(out)


def mertens_product(X: int, exponent: float) -> float:
    """prod_{p <= X} (1 - 1/p)^(-exponent)."""
    if X < 2:
        raise DomainError("need X >= 2")
    ps = sieve(int(X)).primes.astype(float)
    return math.exp(-exponent * float(np.sum(np.log1p(-1.0 / ps))))


def tail_euler_log(X: float, sigma: float) -> float:
    """Asymptotic value -E1((2 sigma - 1) log X) of sum_{p > X} log(1 - p^(-2 sigma))."""
    if not sigma > 0.5:
        raise DomainError("tail_euler_log needs sigma > 1/2")
    if X < 2:
        raise DomainError("need X >= 2")
    return -exp_integral_e1((2 * sigma - 1) * math.log(X)).real


def tail_euler_log_direct(X: int, sigma: float, limit: int = 10**8) -> float:
    """Brute-force sum over X < p <= limit plus the integral tail beyond limit."""
    ps = sieve(limit).primes
    ps = ps[ps > X].astype(float)
    head = float(np.sum(np.log1p(-ps ** (-2 * sigma))))
    return head + tail_euler_log(limit, sigma)


def euler_phi(n: int) -> int:
    n = int(n)
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def coprime_harmonic_sum(a: int, b: int, x: float):
    """Return (exact, asymptotic) for sum_{n <= x, (an, b) = 1} 1/n.

    The asymptotic value is phi(b)/b * log x; their gap is O(log log 2b).
    """
    if math.gcd(a, b) != 1:
        raise DomainError("coprime_harmonic_sum needs gcd(a, b) = 1")
    if b > x:
        raise DomainError("need b <= x")
    n = np.arange(1, int(math.floor(x)) + 1, dtype=np.int64)
    mask = np.gcd(a * n, b) == 1
    exact = float(np.sum(1.0 / n[mask]))
    return exact, euler_phi(b) / b * math.log(x)


def mertens_gamma_log(X: float) -> float:
    """e^gamma log X, the Mertens main term."""
    return math.exp(EULER_GAMMA) * math.log(X)
