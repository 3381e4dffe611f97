"""Random-matrix side: the symbol phi(theta) = b(theta) (2 - 2 cos theta)^k,
its Fourier data, Toeplitz determinants, Fisher-Hartwig asymptotics and
Monte-Carlo CUE checks of Heine's identity.

Two routes to log b are kept apart on purpose. The "fourier" route sums the
finite cosine series 2 sum_n (k/n) v(e^(n/log X)) cos(n theta). The
"periodized" route evaluates the defining sum over j of Ci(|theta + 2 pi j|
log y log X) directly, with a flat-top window on |theta + 2 pi j|, and is
only used as an independent check (it is orders of magnitude slower).
"""

from __future__ import annotations

import concurrent.futures as cf
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .errors import DomainError
from .smoothing import SmoothingWeight, weight_v
from .specfun import EULER_GAMMA, barnes_ratio, cosine_integral_ci, flat_top_taper

DEFAULT_J_WINDOW = 160
FFT_POINTS = 1 << 12
_MC_CHUNK = 10_000


@dataclass(frozen=True)
class SymbolSpec:
    """Symbol parameters. weight=None gives the pure Fisher-Hartwig symbol (b = 1)."""

    k: float
    weight: SmoothingWeight | None = None
    j_window: int = DEFAULT_J_WINDOW

    def __post_init__(self):
        if not self.k > -0.5:
            raise DomainError("symbol needs k > -1/2")
        if self.j_window < 1:
            raise DomainError("j_window must be >= 1")

    @property
    def X(self):
        return None if self.weight is None else self.weight.X

    @property
    def pure(self):
        return self.weight is None


@dataclass(frozen=True)
class EigenangleSample:
    """Eigenangles of Haar unitary matrices, shape (batch, N) or (N,)."""

    N: int
    angles: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.angles.shape[-1] != self.N:
            raise DomainError("expected exactly N angles per matrix")


def _theta(theta):
    th = np.asarray(theta, dtype=float)
    if np.any(np.abs(th) > math.pi + 1e-12):
        raise DomainError("theta must lie in (-pi, pi]")
    return th


def _modes(spec):
    """(n, c_n) with c_n = (k/n) v(e^(n/log X)); empty for the pure symbol."""
    if spec.pure or spec.k == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    L = spec.weight.log_X
    n = np.arange(1, int(math.floor(L)) + 2)
    c = spec.k / n * weight_v(spec.weight, np.exp(n / L))
    keep = c != 0
    return n[keep], c[keep]


def fourier_log_b(spec: SymbolSpec, n: int) -> float:
    """n-th Fourier coefficient of log b: 0 for n = 0, (k/n) v(e^(n/log X)) otherwise."""
    n = abs(int(n))
    if n == 0 or spec.pure or spec.k == 0:
        return 0.0
    return spec.k / n * float(weight_v(spec.weight, math.exp(n / spec.weight.log_X)))


def _log_b_fourier(spec, th):
    n, c = _modes(spec)
    if n.size == 0:
        return np.zeros(th.shape)
    return 2.0 * (np.cos(np.multiply.outer(th, n)) @ c)


def _log_b_periodized(spec, th, J=None):
    # direct sum over j, with log|2 sin(theta/2)|^(2k) removed analytically
    if spec.pure or spec.k == 0:
        return np.zeros(th.shape)
    J = spec.j_window if J is None else J
    lx, wt = spec.weight.nodes()
    a = lx * spec.weight.log_X
    R = 2 * math.pi * (J + 0.5)
    j = np.arange(-J - 1, J + 2)
    flat = np.atleast_1d(th).ravel()
    out = np.empty(flat.shape)
    step = max(1, 2048 // j.size)
    for i in range(0, flat.size, step):
        blk = flat[i:i + step]
        x = np.abs(blk[:, None] + 2 * math.pi * j[None, :])
        tap = flat_top_taper(x / R)
        # the j = 0 term needs x > 0; at theta = 0 take the limit
        x0 = x == 0
        xs = np.where(x0, 1.0, x)
        s = np.zeros(blk.shape)
        for ai, wi in zip(a, wt):
            ci = np.where(x0, 0.0, cosine_integral_ci(xs * ai))
            s += wi * np.sum(ci * tap, axis=1)
        # j = 0 at theta = 0: Ci(|theta| a) - log|theta| -> gamma + log a
        z = blk == 0
        bz = np.where(z, 1.0, blk)
        sing = np.where(z, -(EULER_GAMMA * wt.sum() + float(wt @ np.log(a))),
                        np.log(np.abs(2 * np.sin(bz / 2))))
        out[i:i + step] = 2 * spec.k * (s - sing)
    return out.reshape(np.shape(th))


def log_b(spec: SymbolSpec, theta, route: str = "fourier"):
    """log b(theta), by the finite cosine series or the periodized Ci sum."""
    th = _theta(theta)
    if route == "fourier":
        val = _log_b_fourier(spec, th)
    elif route == "periodized":
        val = _log_b_periodized(spec, th)
    else:
        raise DomainError(f"unknown route {route!r}")
    return float(val) if np.ndim(val) == 0 else val


def symbol_phi(spec: SymbolSpec, theta, route: str = "fourier"):
    """phi(theta) = b(theta) (2 - 2 cos theta)^k, with phi(0) = 0 for k > 0."""
    th = _theta(theta)
    lb = np.asarray(log_b(spec, th, route))
    base = 2.0 - 2.0 * np.cos(th)
    if spec.k == 0:
        val = np.exp(lb)
    else:
        with np.errstate(divide="ignore"):
            val = np.where(base > 0, np.exp(lb + spec.k * np.log(np.where(base > 0, base, 1.0))),
                           0.0 if spec.k > 0 else np.inf)
    return float(val) if val.ndim == 0 else val


def b0(spec: SymbolSpec) -> float:
    """b(0) = exp(2 sum_n (log b)_n)."""
    _, c = _modes(spec)
    return math.exp(2.0 * float(np.sum(c)))


def b0_asymptotic(spec: SymbolSpec) -> float:
    """exp(2k (log log X + gamma)), the main term for b(0)."""
    if spec.k == 0:
        return 1.0
    if spec.pure:
        raise DomainError("b0_asymptotic needs a smoothing weight")
    return math.exp(2 * spec.k * (math.log(spec.weight.log_X) + EULER_GAMMA))


def fh_coefficients(k: float, nmax: int) -> np.ndarray:
    """Fourier coefficients of (2 - 2 cos theta)^k for n = 0..nmax."""
    # c_0 = Gamma(2k+1)/Gamma(k+1)^2 and c_{n+1}/c_n = (n - k)/(n + k + 1)
    n = np.arange(nmax)
    steps = np.concatenate(([math.exp(special.gammaln(2 * k + 1) - 2 * special.gammaln(k + 1))],
                            (n - k) / (n + k + 1)))
    return np.cumprod(steps)


def b_fourier(spec: SymbolSpec, points: int = FFT_POINTS) -> np.ndarray:
    """Fourier coefficients b_n, n = -points/2 .. points/2 - 1 (trapezoid/FFT)."""
    th = 2 * math.pi * np.arange(points) / points
    th = np.where(th > math.pi, th - 2 * math.pi, th)
    coef = np.fft.fft(np.exp(_log_b_fourier(spec, th))).real / points
    return np.fft.fftshift(coef)


def symbol_fourier(spec: SymbolSpec, nmax: int, points: int = FFT_POINTS) -> np.ndarray:
    """phi_n for n = -nmax..nmax: binomial coefficients of (2-2cos)^k convolved with b_n."""
    if nmax < 0:
        raise DomainError("nmax must be >= 0")
    c = fh_coefficients(spec.k, nmax + points // 2)
    cfull = np.concatenate([c[:0:-1], c])  # index m + M
    M = c.size - 1
    if spec.pure:
        bc = np.zeros(points)
        bc[points // 2] = 1.0
    else:
        bc = b_fourier(spec, points)
    # b decays fast, so only |j| below a cutoff matters in sum_j b_j c_{n-j}
    mid = points // 2
    keep = np.nonzero(np.abs(bc) > 1e-18 * np.abs(bc).max())[0]
    jlo, jhi = keep.min() - mid, keep.max() - mid
    js = np.arange(jlo, jhi + 1)
    bj = bc[mid + js]
    out = np.empty(2 * nmax + 1)
    for i, n in enumerate(range(-nmax, nmax + 1)):
        out[i] = float(bj @ cfull[n - js + M])
    return out


def toeplitz_det(fourier, N: int) -> float:
    """det[phi_{i-j}] for 1 <= i, j <= N; fourier holds phi_{-(N-1)}..phi_{N-1}."""
    if N < 1:
        raise DomainError("N must be >= 1")
    f = np.asarray(fourier, dtype=float)
    if f.size < 2 * N - 1 or f.size % 2 == 0:
        raise DomainError("need phi_{-(N-1)}..phi_{N-1} (odd length >= 2N-1)")
    mid = f.size // 2
    col = f[mid:mid + N]            # phi_0, phi_1, ...
    row = f[mid::-1][:N]            # phi_0, phi_-1, ...
    sign, logdet = np.linalg.slogdet(linalg.toeplitz(col, row))
    return float(sign * math.exp(logdet))


def symbol_det(spec: SymbolSpec, N: int) -> float:
    return toeplitz_det(symbol_fourier(spec, N - 1), N)


def _cue_angles(rng, N, size):
    z = (rng.standard_normal((size, N, N)) + 1j * rng.standard_normal((size, N, N))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    q = q * (d / np.abs(d))[:, None, :]
    return np.angle(np.linalg.eigvals(q))


def sample_cue(N: int, seed=0, size: int | None = None) -> EigenangleSample:
    """Haar unitary eigenangles by QR of a complex Ginibre matrix with the phase fix."""
    if N < 1:
        raise DomainError("N must be >= 1")
    rng = np.random.default_rng(seed)
    ang = _cue_angles(rng, N, 1 if size is None else size)
    return EigenangleSample(N, ang[0] if size is None else ang)


def _mc_chunk(spec, N, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    ang = _cue_angles(rng, N, size)
    vals = np.prod(symbol_phi(spec, ang), axis=1)
    m = float(vals.mean())
    return size, m, float(np.sum((vals - m) ** 2))


def heine_expectation_mc(spec: SymbolSpec, N: int, samples: int, seed=0, threads: int = 1):
    """Monte-Carlo mean of prod_n phi(theta_n) over CUE(N), with its standard error."""
    from .moments import MomentEstimate

    if N < 1 or samples < 1:
        raise DomainError("need N >= 1 and samples >= 1")
    sizes = [min(_MC_CHUNK, samples - i) for i in range(0, samples, _MC_CHUNK)]
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    if threads > 1:
        with cf.ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda a: _mc_chunk(spec, N, *a), zip(sizes, streams)))
    else:
        parts = [_mc_chunk(spec, N, s, ss) for s, ss in zip(sizes, streams)]
    # Chan et al. pairwise merge, in chunk order
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        tot = n + nb
        d = mb - mean
        mean += d * nb / tot
        m2 += m2b + d * d * n * nb / tot
        n = tot
    var = m2 / (n - 1) if n > 1 else 0.0
    return MomentEstimate(value=mean, stderr=math.sqrt(var / n), k=spec.k, grid=n,
                          prediction=symbol_det(spec, N), prediction_ref="Heine determinant",
                          target="heine")


def fisher_hartwig_prediction(spec: SymbolSpec, N: int, b0_mode: str = "exact") -> float:
    """E exp((N/2 pi) int log b) N^(k^2), E = exp(sum n (log b)_n^2) b(0)^-k G^2(k+1)/G(2k+1).

    The mean of log b vanishes, so the middle factor is 1.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    k = spec.k
    if k == 0:
        return 1.0
    n, c = _modes(spec)
    if b0_mode == "exact":
        lb0 = 2.0 * float(np.sum(c))
    elif b0_mode == "asymptotic":
        lb0 = math.log(b0_asymptotic(spec)) if not spec.pure else 0.0
    else:
        raise DomainError(f"unknown b0_mode {b0_mode!r}")
    logE = float(np.sum(n * c * c)) - k * lb0
    return barnes_ratio(k) * math.exp(logE + k * k * math.log(N))


def fh_main_term(spec: SymbolSpec, N: int) -> float:
    """G^2(k+1)/G(2k+1) (N / (e^gamma log X))^(k^2)."""
    if spec.pure:
        raise DomainError("needs a smoothing weight")
    return barnes_ratio(spec.k) * (N / (math.exp(EULER_GAMMA) * spec.weight.log_X)) ** (spec.k ** 2)


def cue_char_poly_moment(N: int, k: float) -> float:
    """Exact E|Z_N|^(2k) = prod_{j=1}^N Gamma(j) Gamma(j+2k) / Gamma(j+k)^2."""
    if N < 1 or not k > -0.5:
        raise DomainError("need N >= 1 and k > -1/2")
    j = np.arange(1, N + 1, dtype=float)
    return math.exp(float(np.sum(special.gammaln(j) + special.gammaln(j + 2 * k)
                                 - 2 * special.gammaln(j + k))))
