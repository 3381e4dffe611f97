"""Reference evaluation of zeta: Riemann-Siegel on the critical line,
Euler-Maclaurin elsewhere, Hardy Z zero finding and zero-table I/O."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

import mpmath
import numpy as np
from scipy import special

from .errors import DomainError, MissedZeroError, ZeroTableFormatError
from .specfun import ComplexPoint

TWO_PI = 2.0 * math.pi
RS_MIN_T = 200.0  # below this the critical line goes through Euler-Maclaurin
_CHUNK = 1 << 21


# ---------------------------------------------------------------- theta

def theta(t):
    """Riemann-Siegel theta: arg Gamma(1/4 + it/2) - (t/2) log pi."""
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    big = at >= 10
    out = np.empty(t.shape)
    if (~big).any():
        ts = at[~big]
        out[~big] = special.loggamma(0.25 + 0.5j * ts).imag - 0.5 * ts * math.log(math.pi)
    if big.any():
        tb = at[big]
        inv = 1.0 / tb
        out[big] = (0.5 * tb * np.log(tb / TWO_PI) - 0.5 * tb - math.pi / 8
                    + inv / 48 + 7 * inv ** 3 / 5760 + 31 * inv ** 5 / 80640
                    + 127 * inv ** 7 / 430080)
    out = np.where(t < 0, -out, out)
    return float(out) if out.ndim == 0 else out


def theta_mp(t):
    """theta at an exact (string or mpf) height, in mpmath."""
    return mpmath.siegeltheta(mpmath.mpf(t))


# ---------------------------------------------------------------- Riemann-Siegel

@functools.lru_cache(maxsize=1)
def _psi_taylor(degree=64):
    # Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) about p = 1/2;
    # with z = p - 1/2 this is cos(2 pi z^2 - 5 pi / 8) / (-cos(2 pi z))
    with mpmath.workdps(100):
        num = mpmath.taylor(lambda z: mpmath.cos(2 * mpmath.pi * z * z - 5 * mpmath.pi / 8), 0, degree)
        den = mpmath.taylor(lambda z: -mpmath.cos(2 * mpmath.pi * z), 0, degree)
        q = []
        for i in range(degree + 1):
            acc = num[i] - mpmath.fsum(q[j] * den[i - j] for j in range(i))
            q.append(acc / den[0])
        return np.array([float(c) for c in q])


def _psi_derivs(z, orders):
    c = _psi_taylor()
    out = {}
    for r in orders:
        cr = np.polynomial.polynomial.polyder(c, r) if r else c
        out[r] = np.polynomial.polynomial.polyval(z, cr)
    return out


def _rs_correction(p, a, terms):
    pi2 = math.pi ** 2
    need = {0, 1, 2, 3, 4, 5, 6, 8, 9, 12}
    d = _psi_derivs(p - 0.5, sorted(need))
    cs = [d[0],
          -d[3] / (96 * pi2),
          d[2] / (64 * pi2) + d[6] / (18432 * pi2 ** 2),
          -d[1] / (64 * pi2) - d[5] / (3840 * pi2 ** 2) - d[9] / (5308416 * pi2 ** 3),
          d[0] / (128 * pi2) + 19 * d[4] / (24576 * pi2 ** 2)
          + 11 * d[8] / (5898240 * pi2 ** 3) + d[12] / (2038431744 * pi2 ** 4)]
    acc = np.zeros_like(p)
    inv = 1.0 / a
    for j in range(min(terms, 4) + 1):
        acc = acc + cs[j] * inv ** j
    return acc


def _rs_main(t, nmax):
    """2 sum_{n<=N(t)} n^-1/2 cos(theta(t) - t log n), chunked over n."""
    th = theta(t)
    a = np.sqrt(t / TWO_PI)
    N = np.floor(a)
    out = np.zeros_like(t)
    for lo in range(1, nmax + 1, 4096):
        n = np.arange(lo, min(nmax, lo + 4095) + 1, dtype=float)
        ph = th[:, None] - t[:, None] * np.log(n)[None, :]
        term = np.cos(ph) / np.sqrt(n)[None, :]
        term = np.where(n[None, :] <= N[:, None], term, 0.0)
        out += term.sum(axis=1)
    return 2.0 * out, a, N


def hardy_z_rs(t, terms: int = 4):
    """Hardy Z(t) by Riemann-Siegel with correction terms C_0..C_terms (terms <= 4)."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    out = np.empty(flat.shape)
    if flat.size:
        nmax = int(math.floor(math.sqrt(flat.max() / TWO_PI)))
        step = max(1, _CHUNK // max(1, min(nmax, 4096)))
        for i in range(0, flat.size, step):
            tb = flat[i:i + step]
            main, a, N = _rs_main(tb, nmax)
            p = a - N
            sign = np.where(N % 2 == 1, 1.0, -1.0)  # (-1)^(N-1)
            out[i:i + step] = main + sign * (tb / TWO_PI) ** -0.25 * _rs_correction(p, a, terms)
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


# ---------------------------------------------------------------- Euler-Maclaurin

@functools.lru_cache(maxsize=4)
def _bernoulli_even(m):
    b = special.bernoulli(2 * m)
    return np.array([b[2 * j] for j in range(1, m + 1)])


def zeta_em(s: complex, terms: int = 30) -> complex:
    """zeta(s) by Euler-Maclaurin summation (any s != 1)."""
    s = complex(s)
    if s == 1:
        raise DomainError("zeta has a pole at s = 1")
    N = int(max(10, abs(s.imag) / math.pi + abs(s.real) + 10))
    n = np.arange(1, N, dtype=float)
    head = np.sum(np.exp(-s * np.log(n)))
    Nf = float(N)
    ns = math.exp(-s.real * math.log(Nf)) * np.exp(-1j * s.imag * math.log(Nf))
    tail = Nf * ns / (s - 1) + 0.5 * ns
    b = _bernoulli_even(terms)
    poch = s  # s (s+1) ... (s+2j-2)
    fact = 2.0  # (2j)!
    powN = ns / Nf  # N^(-s-2j+1)
    for j in range(1, terms + 1):
        term = b[j - 1] / fact * poch * powN
        tail += term
        if abs(term) < 1e-17 * abs(head + tail):
            break
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        powN /= Nf * Nf
    return complex(head + tail)


def hardy_z_em(t):
    t = np.asarray(t, dtype=float)
    vals = np.array([(np.exp(1j * theta(x)) * zeta_em(complex(0.5, x))).real
                     for x in np.atleast_1d(t).ravel()])
    return float(vals[0]) if t.ndim == 0 else vals.reshape(t.shape)


# ---------------------------------------------------------------- public evaluators

def zeta_direct(s, method: str = "auto", rs_terms: int = 4) -> complex:
    """zeta(s). On sigma = 1/2 with t >= 200 Riemann-Siegel is used, else Euler-Maclaurin."""
    p = ComplexPoint.coerce(s)
    if p.sigma == 1 and p.t == 0:
        raise DomainError("zeta has a pole at s = 1")
    if method not in ("auto", "rs", "em"):
        raise DomainError(f"unknown method {method!r}")
    use_rs = method == "rs" or (method == "auto" and p.sigma == 0.5 and abs(p.t) >= RS_MIN_T)
    if use_rs:
        if p.sigma != 0.5:
            raise DomainError("Riemann-Siegel path is for the critical line only")
        at = abs(p.t)
        val = hardy_z_rs(at, rs_terms) * np.exp(-1j * theta(at))
        return complex(val.conjugate() if p.t < 0 else val)
    return zeta_em(p.s)


def zeta_critical(t, rs_terms: int = 4):
    """zeta(1/2 + it) for an array of t > 0 (vectorised)."""
    t = np.asarray(t, dtype=float)
    return hardy_z(t, rs_terms) * np.exp(-1j * theta(t))


def hardy_z(t, rs_terms: int = 4):
    """Z(t) = e^{i theta(t)} zeta(1/2 + it), real for real t."""
    t = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t).ravel()
    out = np.empty(flat.shape)
    hi = flat >= RS_MIN_T
    if hi.any():
        out[hi] = hardy_z_rs(flat[hi], rs_terms)
    if (~hi).any():
        out[~hi] = hardy_z_em(flat[~hi])
    return float(out[0]) if t.ndim == 0 else out.reshape(t.shape)


# ---------------------------------------------------------------- extended height

class HighHeight:
    """Z(base + x) for small offsets x at very large exact heights.

    The phases base * log n mod 2 pi are reduced once in extended precision;
    only x log n is then accumulated in double.
    """

    def __init__(self, base: str, span: float = 10.0, dps: int = 40):
        self.base_str = str(base)
        with mpmath.workdps(dps):
            b = mpmath.mpf(self.base_str)
            self.base = float(b)
            self.nmax = int(mpmath.floor(mpmath.sqrt((b + span) / (2 * mpmath.pi))))
            n = np.arange(1, self.nmax + 1)
            twopi = 2 * mpmath.pi
            ph = np.empty(self.nmax)
            for i, nn in enumerate(n):
                ph[i] = float(mpmath.fmod(b * mpmath.log(int(nn)), twopi))
            self.phase_n = ph
            self.theta0 = float(mpmath.fmod(mpmath.siegeltheta(b), twopi))
        self.log_n = np.log(n.astype(float))
        self.rsqrt_n = 1.0 / np.sqrt(n.astype(float))

    def _dtheta(self, x):
        # theta(b + x) - theta(b) by Taylor expansion in x (|x| << b)
        b = self.base
        return (0.5 * x * math.log(b / TWO_PI) + x * x / (4 * b)
                - x ** 3 / (12 * b * b) - x / (48 * b * b))

    def hardy_z(self, x, rs_terms: int = 4):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        t = self.base + x
        a = np.sqrt(t / TWO_PI)
        N = np.floor(a)
        out = np.zeros(x.shape)
        dth = self._dtheta(x)
        for lo in range(0, self.nmax, 4096):
            sl = slice(lo, min(self.nmax, lo + 4096))
            ph = (self.theta0 - self.phase_n[sl])[None, :] + dth[:, None] - x[:, None] * self.log_n[sl][None, :]
            term = np.cos(ph) * self.rsqrt_n[sl][None, :]
            n = np.arange(sl.start + 1, sl.stop + 1)
            out += np.where(n[None, :] <= N[:, None], term, 0.0).sum(axis=1)
        p = a - N
        sign = np.where(N % 2 == 1, 1.0, -1.0)
        return 2.0 * out + sign * (t / TWO_PI) ** -0.25 * _rs_correction(p, a, rs_terms)

    def prime_phases(self, n):
        """base * log n mod 2 pi for the given integers."""
        with mpmath.workdps(40):
            b = mpmath.mpf(self.base_str)
            return np.array([float(mpmath.fmod(b * mpmath.log(int(m)), 2 * mpmath.pi)) for m in n])


# ---------------------------------------------------------------- zero tables

class Provenance(enum.Enum):
    COMPUTED = "computed"
    INGESTED = "ingested"


@dataclass(frozen=True)
class ZeroTable:
    """Ordinates gamma_n = base + offsets[i], with n = index_offset + i."""

    base_height: float
    offsets: np.ndarray = field(repr=False)
    index_offset: int | None = None
    provenance: Provenance = Provenance.COMPUTED
    base_str: str = "0"

    @property
    def ordinates(self):
        return float(Decimal(self.base_str)) + self.offsets

    def __len__(self):
        return len(self.offsets)

    def validate(self):
        if np.any(np.diff(self.offsets) <= 0):
            raise ZeroTableFormatError("ordinates not strictly increasing")
        return self

    def slice(self, lo, hi):
        """Zeros with lo <= gamma <= hi (absolute heights)."""
        b = float(Decimal(self.base_str))
        i, j = np.searchsorted(self.offsets, [lo - b, hi - b], side="left")
        j = np.searchsorted(self.offsets, hi - b, side="right")
        idx = None if self.index_offset is None else self.index_offset + int(i)
        return ZeroTable(self.base_height, self.offsets[i:j].copy(), idx, self.provenance, self.base_str)

    def rebase(self, base_str: str):
        """Same zeros with offsets measured from a new exact base."""
        shift = float(Decimal(self.base_str) - Decimal(base_str))
        return ZeroTable(float(Decimal(base_str)), self.offsets + shift, self.index_offset,
                         self.provenance, base_str)


def riemann_von_mangoldt(t):
    """Smooth zero count theta(t)/pi + 1."""
    return theta(t) / math.pi + 1.0


def calibrate_index(ordinates):
    """Global index of the first ordinate from theta(gamma_n)/pi + 3/2 ~ n."""
    g = np.asarray(ordinates, dtype=float)
    est = theta(g) / math.pi + 1.5 - np.arange(g.size)
    return int(round(float(np.median(est))))


def _illinois(f, a, b, fa, fb, xtol=1e-10, maxiter=100):
    # vectorised regula falsi with the Illinois modification
    side = np.zeros(a.shape, dtype=int)
    for _ in range(maxiter):
        c = b - fb * (b - a) / (fb - fa)
        c = np.where(np.isfinite(c), c, 0.5 * (a + b))
        fc = f(c)
        left = np.sign(fc) == np.sign(fa)
        # move the endpoint that shares fc's sign
        a = np.where(left, c, a)
        fa_new = np.where(left, fc, fa)
        b = np.where(left, b, c)
        fb_new = np.where(left, fb, fc)
        fb_new = np.where(left & (side == 1), 0.5 * fb_new, fb_new)
        fa_new = np.where(~left & (side == -1), 0.5 * fa_new, fa_new)
        side = np.where(left, 1, -1)
        fa, fb = fa_new, fb_new
        if np.all(np.abs(b - a) < xtol) or np.all(fc == 0):
            break
    return 0.5 * (a + b)


def _scan(zfun, lo, hi, per_gap, height=None):
    height = max(hi if height is None else height, 10.0)
    gap = TWO_PI / max(1.0, math.log(height / TWO_PI))
    h = gap / per_gap
    n = int(math.ceil((hi - lo) / h)) + 1
    grid = np.linspace(lo, hi, n)
    return grid, zfun(grid)


def _brackets(zfun, grid, z, refine=16):
    """Sign-change brackets, plus hidden pairs found near shallow local minima of |Z|."""
    s = np.sign(z)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    lo, hi = list(grid[idx]), list(grid[idx + 1])
    az = np.abs(z)
    cand = np.nonzero((az[1:-1] < az[:-2]) & (az[1:-1] < az[2:])
                      & (s[:-2] == s[1:-1]) & (s[1:-1] == s[2:]))[0] + 1
    for i in cand:
        if az[i] > 0.25 * min(az[i - 1], az[i + 1]) and az[i] > 0.3:
            continue
        fine = np.linspace(grid[i - 1], grid[i + 1], 2 * refine + 1)
        zf = zfun(fine)
        sf = np.sign(zf)
        j = np.nonzero(sf[:-1] * sf[1:] < 0)[0]
        lo += list(fine[j])
        hi += list(fine[j + 1])
    order = np.argsort(lo)
    return np.asarray(lo)[order], np.asarray(hi)[order]


def find_zeros(t_lo: float, t_hi: float, per_gap: int = 8, xtol: float = 1e-10,
               check: bool = True) -> ZeroTable:
    """All sign changes of Z(t) in [t_lo, t_hi], refined to xtol."""
    if not (2 <= t_lo < t_hi):
        raise DomainError("need 2 <= t_lo < t_hi")
    grid, z = _scan(hardy_z, t_lo, t_hi, per_gap)
    a, b = _brackets(hardy_z, grid, z)
    if a.size:
        roots = _illinois(hardy_z, a, b, hardy_z(a), hardy_z(b), xtol=xtol)
    else:
        roots = np.zeros(0)
    roots = np.unique(roots)
    if check:
        expected = riemann_von_mangoldt(t_hi) - riemann_von_mangoldt(t_lo)
        if expected - roots.size > 2 * math.log(t_hi):
            raise MissedZeroError(
                f"found {roots.size} zeros in [{t_lo}, {t_hi}], expected about {expected:.1f}",
                (t_lo, t_hi), int(roots.size), float(expected))
    idx = calibrate_index(roots) if roots.size else None
    return ZeroTable(float(t_lo), roots, idx, Provenance.COMPUTED, "0")


def find_zeros_high(hh: HighHeight, x_lo: float, x_hi: float, per_gap: int = 8,
                    xtol: float = 1e-10) -> ZeroTable:
    """find_zeros at base + [x_lo, x_hi] using extended-precision phases."""
    grid, z = _scan(hh.hardy_z, x_lo, x_hi, per_gap, height=hh.base)
    a, b = _brackets(hh.hardy_z, grid, z)
    roots = _illinois(hh.hardy_z, a, b, hh.hardy_z(a), hh.hardy_z(b), xtol=xtol) if a.size else np.zeros(0)
    roots = np.unique(roots)
    expected = (theta_mp(mpmath.mpf(hh.base_str) + x_hi) - theta_mp(mpmath.mpf(hh.base_str) + x_lo)) / mpmath.pi
    if float(expected) - roots.size > 2 * math.log(hh.base):
        raise MissedZeroError(
            f"found {roots.size} zeros at offsets [{x_lo}, {x_hi}], expected about {float(expected):.1f}",
            (hh.base + x_lo, hh.base + x_hi), int(roots.size), float(expected))
    idx = None
    if roots.size:
        with mpmath.workdps(40):
            b0 = mpmath.mpf(hh.base_str)
            est = [float(theta_mp(b0 + float(r)) / mpmath.pi) + 1.5 - i for i, r in enumerate(roots)]
        idx = int(round(float(np.median(est))))
    return ZeroTable(hh.base, roots, idx, Provenance.COMPUTED, hh.base_str)


def height_of_index(n: int) -> str:
    """Approximate t with theta(t)/pi + 3/2 = n (the expected location of gamma_n)."""
    with mpmath.workdps(40):
        target = mpmath.pi * (mpmath.mpf(n) - mpmath.mpf(1.5))
        # Newton on theta(t) = target, theta'(t) = log(t / 2 pi) / 2
        t = mpmath.mpf(2 * math.pi * n / max(1.0, math.log(max(n, 3))))
        for _ in range(100):
            step = (mpmath.siegeltheta(t) - target) / (mpmath.log(t / (2 * mpmath.pi)) / 2)
            t -= step
            if abs(step) < mpmath.mpf(10) ** -20:
                break
        return mpmath.nstr(t, 30, strip_zeros=False)


def load_zero_table(path, fmt: str = "auto") -> ZeroTable:
    """Read a zero table: plain (one ordinate per line) or offset ('base <decimal>' then offsets).

    Lines starting with '#' and blank lines are ignored.
    """
    if fmt not in ("auto", "plain", "offset"):
        raise DomainError(f"unknown zero-table format {fmt!r}")
    base = Decimal(0)
    base_seen = False
    vals = []
    first_data = True
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if first_data and line.lower().startswith("base"):
                if fmt == "plain":
                    raise ZeroTableFormatError("base header in plain-format file", lineno)
                parts = line.split()
                try:
                    base = Decimal(parts[1])
                except (IndexError, InvalidOperation):
                    raise ZeroTableFormatError(f"bad base header {line!r}", lineno) from None
                base_seen = True
                first_data = False
                continue
            first_data = False
            try:
                v = float(Decimal(line))
            except InvalidOperation:
                raise ZeroTableFormatError(f"cannot parse {line!r}", lineno) from None
            if not math.isfinite(v):
                raise ZeroTableFormatError(f"non-finite value {line!r}", lineno)
            if vals and v <= vals[-1][0]:
                raise ZeroTableFormatError("ordinates not strictly increasing", lineno)
            vals.append((v, lineno))
    if fmt == "offset" and not base_seen:
        raise ZeroTableFormatError("offset format needs a 'base <decimal>' header", 1)
    offsets = np.array([v for v, _ in vals], dtype=float)
    if base_seen:
        base_str = str(base)
    else:
        base_str = "0"
    height = float(base) + (offsets[0] if offsets.size else 0.0)
    idx = calibrate_index(float(base) + offsets) if offsets.size and float(base) < 1e15 else None
    return ZeroTable(height, offsets, idx, Provenance.INGESTED, base_str)


def write_zero_table(table: ZeroTable, path, header_lines=()):
    with open(path, "w", encoding="utf-8") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        if table.base_str != "0":
            fh.write(f"base {table.base_str}\n")
        for v in table.offsets:
            fh.write(f"{v:.12f}\n")
