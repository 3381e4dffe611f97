"""The zero-side product Z_X (smoothed and unsmoothed truncated forms) and
the assembled hybrid approximation P_X Z_X."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CoverageError, DomainError
from .euler_side import log_p_x, log_p_x_tilde, prime_power_terms, tilde_weights
from .smoothing import CriticalLineKernel, SmoothingWeight, kernel_U
from .specfun import BranchConvention, ComplexPoint, cosine_integral_ci
from .zeta_eval import TWO_PI, HighHeight, ZeroTable, hardy_z

CI_CLAMP = 1e-12
LOG_FLOOR = -30.0  # factors below exp(-30) are reported as exactly 0
_CHUNK = 1 << 21


class Variant(enum.Enum):
    SMOOTHED = "smoothed"
    UNSMOOTHED = "unsmoothed"


@dataclass(frozen=True)
class HybridConfig:
    """Parameters of the hybrid product.

    The smoothed variant pairs Z_X with P~_X; the unsmoothed (Ci product)
    variant pairs it with P_X, as in the published figures. zero_window
    zeros are kept on each side of t; beyond them a density tail is added
    unless far_tail is off. appendix_compat replaces the moving window by
    the fixed zeros N+1..N+100 with t0 = gamma_(N+40) and no tail.
    """

    X: float
    variant: Variant = Variant.SMOOTHED
    zero_window: int = 50
    far_tail: bool = True
    appendix_compat: bool = False
    strict_coverage: bool = True
    quad_order: int = 64
    weight: SmoothingWeight = field(default=None)

    def __post_init__(self):
        if not self.X >= 2:
            raise DomainError("X must be >= 2")
        if self.zero_window < 1:
            raise DomainError("zero_window must be >= 1")
        if isinstance(self.variant, str):
            object.__setattr__(self, "variant", Variant(self.variant))
        if self.weight is None:
            object.__setattr__(self, "weight", SmoothingWeight(self.X, self.quad_order))
        elif abs(self.weight.X - self.X) > 1e-12 * self.X:
            raise DomainError("weight.X must equal X")

    @property
    def log_X(self):
        return math.log(self.X)

    @property
    def smoothed(self):
        return self.variant is Variant.SMOOTHED


def zero_density(t):
    """Mean number of zeros per unit height near t."""
    return np.log(np.maximum(np.asarray(t, dtype=float), TWO_PI + 1) / TWO_PI) / TWO_PI


@functools.lru_cache(maxsize=16)
def _kernel(X, order, smoothed, y_cap):
    w = SmoothingWeight(X, order) if smoothed else None
    return CriticalLineKernel(w, y_cap)


def _kernel_for(cfg, y_max):
    # bucket the table size so repeated calls share a spline
    cap = float(2 ** math.ceil(math.log2(max(y_max, 16.0) * 1.05)))
    return _kernel(cfg.X, cfg.quad_order, cfg.smoothed, cap)


@functools.lru_cache(maxsize=16)
def _tail_spline(X, order, smoothed, A_lo, A_hi):
    A = np.linspace(A_lo, A_hi, int((A_hi - A_lo) / 0.02) + 2)
    if smoothed:
        lx, wt = SmoothingWeight(X, order).nodes()
        vals = np.zeros_like(A)
        for l, w in zip(lx, wt):
            As = A * l
            vals += w * (np.sin(As) - As * cosine_integral_ci(As)) / l
    else:
        vals = np.sin(A) - A * cosine_integral_ci(A)
    return CubicSpline(A, vals)


def ci_tail(cfg, A):
    """sum over far zeros of Re(-U) per unit density: int_Delta^inf int f Ci(d L s) dd * L."""
    A = np.asarray(A, dtype=float)
    lo = 2.0 ** math.floor(math.log2(max(A.min(), 1e-3)))
    hi = 2.0 ** math.ceil(math.log2(A.max() * 1.01 + 1e-3))
    return _tail_spline(cfg.X, cfg.quad_order, cfg.smoothed, lo, hi)(A)


def _window_indices(cfg, offsets, t_off, anchor=None):
    """Indices (n_points, width) of the zeros used at each t."""
    g = offsets
    if cfg.appendix_compat:
        j0 = int(np.argmin(np.abs(g - anchor))) if anchor is not None else int(np.searchsorted(g, t_off.min()))
        lo, hi = j0 - 39, j0 + 61
        if lo < 0 or hi > g.size:
            raise CoverageError(
                "appendix window needs 39 zeros below and 60 above t0",
                needed=(float(g[max(lo, 0)]), float(g[min(hi, g.size) - 1])))
        return np.broadcast_to(np.arange(lo, hi), (t_off.size, hi - lo)), None
    W = cfg.zero_window
    i0 = np.searchsorted(g, t_off)
    lo = i0 - W
    hi = i0 + W
    if cfg.strict_coverage and (lo.min() < 0 or hi.max() > g.size):
        dens = float(zero_density(abs(t_off).max() if g.size == 0 else max(1.0, abs(g).max())))
        gap = 1.0 / max(dens, 1e-3)
        raise CoverageError(
            f"zero table must hold {W} zeros on each side of every t",
            needed=(float(t_off.min() - 1.2 * W * gap), float(t_off.max() + 1.2 * W * gap)))
    lo = np.clip(lo, 0, g.size)
    hi = np.clip(hi, 0, g.size)
    width = int((hi - lo).max()) if t_off.size else 0
    idx = lo[:, None] + np.arange(width)[None, :]
    valid = idx < hi[:, None]
    return np.where(valid, idx, -1), valid


def log_z_critical(cfg: HybridConfig, zeros: ZeroTable, t_off, height=None,
                   anchor=None, real_only=False):
    """log Z_X(1/2 + it) on the critical line, vectorised.

    t_off and zeros.offsets share the same base; height is the absolute
    height used for the zero density (defaults to base + t_off).
    Returns complex log Z (real when real_only); -inf at tabulated zeros.
    """
    t_off = np.atleast_1d(np.asarray(t_off, dtype=float))
    g = np.asarray(zeros.offsets, dtype=float)
    L = cfg.log_X
    out = np.empty(t_off.shape, dtype=float if real_only else complex)
    step = max(1, _CHUNK // max(1, 2 * cfg.zero_window if not cfg.appendix_compat else 100))
    for i in range(0, t_off.size, step):
        tb = t_off[i:i + step]
        idx, valid = _window_indices(cfg, g, tb, anchor)
        gam = g[np.where(idx < 0, 0, idx)]
        d = tb[:, None] - gam
        y = d * L
        if valid is not None:
            y = np.where(valid, y, np.inf)
        ymax = float(np.max(np.abs(np.where(np.isfinite(y), y, 0.0))))
        K = _kernel_for(cfg, ymax)
        fin = np.isfinite(y)
        yy = np.where(fin, y, 1.0)
        exact = fin & (yy == 0)
        yy = np.where(exact, 1.0, yy)
        if not cfg.smoothed:
            yy = np.where(np.abs(yy) < CI_CLAMP, np.sign(yy) * CI_CLAMP, yy)
        if real_only:
            re_u = np.where(fin, K.real_part(yy), 0.0)
            logz = -re_u.sum(axis=1)
            # a single factor below exp(-30) zeroes the product
            tiny = (-re_u < LOG_FLOOR) if not cfg.smoothed else np.zeros_like(fin)
        else:
            u = np.where(fin, K(yy), 0.0)
            logz = -u.sum(axis=1)
            tiny = (-u.real < LOG_FLOOR) if not cfg.smoothed else np.zeros_like(fin)
        zero_hit = exact.any(axis=1) | (tiny & fin).any(axis=1)
        if cfg.far_tail and not cfg.appendix_compat and valid is not None:
            if height is None:
                h = float(Decimal(zeros.base_str)) + tb
            else:
                h = np.broadcast_to(np.asarray(height, dtype=float), t_off.shape)[i:i + step]
            rho = zero_density(h)
            half_gap = 0.5 / rho
            lo_g = g[np.clip(idx[:, 0], 0, g.size - 1)]
            last = np.where(valid, idx, -1).max(axis=1)
            hi_g = g[np.clip(last, 0, g.size - 1)]
            A_lo = (np.abs(tb - lo_g) + half_gap) * L
            A_hi = (np.abs(hi_g - tb) + half_gap) * L
            logz = logz + rho / L * (ci_tail(cfg, A_lo) + ci_tail(cfg, A_hi))
        if real_only:
            logz = np.where(zero_hit, -np.inf, logz)
        else:
            logz = np.where(zero_hit, -np.inf + 0j, logz)
        out[i:i + step] = logz
    return out


def _coerce_table_point(zeros, s):
    p = ComplexPoint.coerce(s)
    base = float(zeros.ordinates[0] - zeros.offsets[0]) if len(zeros) else 0.0
    return p, base


def z_x_smoothed(cfg: HybridConfig, zeros: ZeroTable, s) -> complex:
    """Z_X(s) = exp(-sum_rho U((s - rho) log X)) over the zero window, plus the far tail."""
    if not cfg.smoothed:
        cfg = _with(cfg, variant=Variant.SMOOTHED)
    p, base = _coerce_table_point(zeros, s)
    t_off = p.t - base
    if p.sigma == 0.5:
        lz = log_z_critical(cfg, zeros, np.array([t_off]))[0]
        return 0j if np.isneginf(lz.real) else complex(np.exp(lz))
    g = np.asarray(zeros.offsets)
    idx, valid = _window_indices(cfg, g, np.array([t_off]))
    gam = g[idx[0][valid[0]]] if valid is not None else g[idx[0]]
    z = (complex(p.sigma - 0.5, 0) + 1j * (t_off - gam)) * cfg.log_X
    total = -np.sum(kernel_U(cfg.weight, z, BranchConvention.SYMMETRIC))
    if cfg.far_tail and valid is not None:
        rho = float(zero_density(abs(p.t)))
        hg = 0.5 / rho
        A_lo = (abs(t_off - gam[0]) + hg) * cfg.log_X
        A_hi = (abs(gam[-1] - t_off) + hg) * cfg.log_X
        total += rho / cfg.log_X * float(ci_tail(cfg, np.array([A_lo]))[0] + ci_tail(cfg, np.array([A_hi]))[0])
    return complex(np.exp(total))


def z_x_unsmoothed(cfg: HybridConfig, zeros: ZeroTable, s) -> float:
    """prod_n exp(Ci(|t - gamma_n| log X)) on the critical line (Ci clamped at 1e-12)."""
    p, base = _coerce_table_point(zeros, s)
    if p.sigma != 0.5:
        raise DomainError("the unsmoothed product is defined on the critical line only")
    if cfg.smoothed:
        cfg = _with(cfg, variant=Variant.UNSMOOTHED)
    lz = log_z_critical(cfg, zeros, np.array([p.t - base]), real_only=True)[0]
    return 0.0 if np.isneginf(lz) else float(np.exp(lz))


def _with(cfg, **kw):
    d = dict(X=cfg.X, variant=cfg.variant, zero_window=cfg.zero_window, far_tail=cfg.far_tail,
             appendix_compat=cfg.appendix_compat, strict_coverage=cfg.strict_coverage,
             quad_order=cfg.quad_order)
    d.update(kw)
    return HybridConfig(**d)


def hybrid_eval(cfg: HybridConfig, zeros: ZeroTable, s) -> complex:
    """P~_X Z_X (smoothed) or P_X Z_X (unsmoothed)."""
    p = ComplexPoint.coerce(s)
    if p.sigma < 0 or abs(p.t) < 2:
        raise DomainError("hybrid formula needs sigma >= 0 and |t| >= 2")
    if cfg.smoothed:
        return complex(np.exp(log_p_x_tilde(cfg.weight, p.s))) * z_x_smoothed(cfg, zeros, p)
    return complex(np.exp(log_p_x(cfg.X, p.s))) * z_x_unsmoothed(cfg, zeros, p)


# ---------------------------------------------------------------- figure data

class Frame:
    """Critical-line evaluation at heights base + x, with exact phases when base is huge."""

    def __init__(self, base_str: str = "0", span: float = 10.0, high_precision=None):
        self.base_str = base_str
        self.base = float(Decimal(base_str))
        if high_precision is None:
            high_precision = self.base > 1e8
        self.hh = HighHeight(base_str, span=span) if high_precision else None

    def abs_zeta(self, x):
        if self.hh is not None:
            return np.abs(self.hh.hardy_z(x))
        return np.abs(hardy_z(self.base + np.asarray(x, dtype=float)))

    def log_abs_p(self, cfg: HybridConfig, x):
        n, c = prime_power_terms(cfg.X)
        if cfg.smoothed:
            c = c * tilde_weights(cfg.weight, n)
        x = np.asarray(x, dtype=float)
        logn = np.log(n.astype(float))
        if self.hh is not None:
            ph0 = self.hh.prime_phases(n)
        else:
            ph0 = np.zeros_like(logn)
            x = self.base + x
        return np.cos(ph0[None, :] + np.outer(x, logn)) @ (c / np.sqrt(n))


def figure_data(cfgs, zeros: ZeroTable, t0, span: float = 5.0, samples: int = 1000,
                frame: Frame | None = None):
    """Columns x, |zeta|, and |P|, |Z|, |P Z| per config at t0 + x, x in [0, span].

    t0 is an offset from the frame base (the zero table must share that base).
    Returns (column names, array of shape (samples, 1 + 3 len(cfgs))).
    """
    if samples < 2:
        raise DomainError("need at least 2 samples")
    frame = frame or Frame()
    if frame.base_str != zeros.base_str:
        zeros = zeros.rebase(frame.base_str)
    x = np.linspace(0.0, span, samples)
    t = t0 + x
    cols = ["x", "abs_zeta"]
    data = [x, frame.abs_zeta(t)]
    height = frame.base + t
    for cfg in cfgs:
        lp = frame.log_abs_p(cfg, t)
        lz = log_z_critical(cfg, zeros, t, height=height, anchor=t0, real_only=True)
        absz = np.where(np.isneginf(lz), 0.0, np.exp(lz))
        absp = np.exp(lp)
        tag = _x_label(cfg.X)
        cols += [f"abs_P@{tag}", f"abs_Z@{tag}", f"abs_PZ@{tag}"]
        data += [absp, absz, absp * absz]
    return cols, np.column_stack(data)


def _x_label(X):
    return f"{X:.6g}"


def local_max_envelope(x, absz, zeros_in_range):
    """For each sample, the max of |zeta| between the two zeros that bracket it."""
    edges = np.concatenate(([-np.inf], np.sort(zeros_in_range), [np.inf]))
    seg = np.searchsorted(edges, x, side="right") - 1
    env = np.zeros_like(absz)
    for k in np.unique(seg):
        m = seg == k
        env[m] = absz[m].max()
    return env


def residual_stats(x, abs_zeta, abs_pz, zeros_in_range, frac=0.05):
    """Median of ||zeta| - |PZ|| / |zeta| over samples with |zeta| >= frac * local max."""
    env = local_max_envelope(x, abs_zeta, zeros_in_range)
    keep = abs_zeta >= frac * env
    rel = np.abs(abs_zeta - abs_pz)[keep] / abs_zeta[keep]
    return float(np.median(rel)), keep
