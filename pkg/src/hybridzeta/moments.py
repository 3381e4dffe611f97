"""Windowed moments (1/T) int_T^2T |f(1/2 + it)|^(2k) dt for f in
{zeta, P_X, Z_X, zeta/P_X}, with the predictions they are compared against.

The window is [T, 2T]; means over [0, T] have the same leading asymptotics.
Integrals use the trapezoid rule with Gregory end corrections on a uniform
grid with a fixed number of points per mean zero gap 2 pi / log T. The error
proxy is |I_h - I_2h|, the change against the half grid.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .euler_side import log_abs_p_x_critical, predicted_p_moment, a_factor
from .specfun import EULER_GAMMA, barnes_ratio
from .zeta_eval import TWO_PI, ZeroTable, find_zeros, hardy_z

TARGETS = ("zeta", "P", "Z", "zeta_over_P")
MIN_DENSITY = 8
_BLOCK = 1 << 16


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    k: float
    grid: int
    prediction: float | None = None
    prediction_ref: str = ""
    target: str = ""
    window: tuple = ()
    X: float | None = None

    @property
    def ratio(self):
        if self.prediction in (None, 0):
            return None
        return self.value / self.prediction

    def as_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["ratio"] = self.ratio
        return d


def moment_grid(T: float, density: float = MIN_DENSITY, window=None):
    """Uniform grid on the window with an even number of intervals."""
    lo, hi = window if window is not None else (T, 2 * T)
    gap = TWO_PI / math.log(hi / TWO_PI)
    n = int(math.ceil((hi - lo) / gap * density))
    n += n % 2
    return np.linspace(lo, hi, n + 1)


_END = np.array([3 / 8, 7 / 6, 23 / 24])


def _mean_end_corrected(vals):
    """Mean over the window by the trapezoid rule with Gregory end weights (O(h^4))."""
    n = vals.size - 1
    if n < 6:
        return (vals.sum() - 0.5 * (vals[0] + vals[-1])) / n
    total = vals[3:-3].sum() + _END @ vals[:3] + _END @ vals[:-4:-1]
    return total / n


def _quadrature_pair(vals):
    """(I_h, I_2h) window means; vals sampled on an even number of intervals."""
    return _mean_end_corrected(vals), _mean_end_corrected(vals[::2])


SECOND_MOMENT_CONSTANT = 2 * EULER_GAMMA - 1


def second_moment_target(T: float, window=None, constant: float = SECOND_MOMENT_CONSTANT) -> float:
    """Mean of log(t / 2 pi) + constant over the window, by quadrature.

    The default constant 2 gamma - 1 is the one in the integrated form
    int_0^T |zeta|^2 = T (log(T/2pi) + 2 gamma - 1) + o(T). Its derivative,
    the mean density of |zeta(1/2 + it)|^2, is log(t/2pi) + 2 gamma, so
    constant = 2 gamma gives the window mean itself.
    """
    lo, hi = window if window is not None else (T, 2 * T)
    val, _ = integrate.quad(lambda t: math.log(t / TWO_PI) + constant, lo, hi,
                            epsabs=0, epsrel=1e-12)
    return val / (hi - lo)


def zeta_moment_prediction(k: float, T: float) -> float:
    """a(k) G^2(k+1)/G(2k+1) (log T)^(k^2)."""
    if not k > -0.5:
        raise DomainError("need k > -1/2")
    if k == 0:
        return 1.0
    return a_factor(k, 0.5) * barnes_ratio(k) * math.log(T) ** (k * k)


def ratio_prediction(k: float, T: float, X: float) -> float:
    """G^2(k+1)/G(2k+1) (log T / (e^gamma log X))^(k^2), the moment of Z_X or zeta/P_X."""
    if not k > -0.5:
        raise DomainError("need k > -1/2")
    return barnes_ratio(k) * (math.log(T) / (math.exp(EULER_GAMMA) * math.log(X))) ** (k * k)


def _prediction(target, k, T, X, window):
    if k == 0:
        return 1.0, "trivial"
    if target == "zeta":
        if k == 1:
            return second_moment_target(T, window), "second moment log(t/2pi) + 2gamma - 1"
        return zeta_moment_prediction(k, T), "a(k) G^2(k+1)/G(2k+1) (log T)^(k^2)"
    if target == "P":
        return predicted_p_moment(k, 0.5, X), "a(k) F_X(k, 1/2)"
    return ratio_prediction(k, T, X), "G^2(k+1)/G(2k+1) (log T / e^gamma log X)^(k^2)"


def _zeros_for(T_lo, T_hi, cfg):
    gap = TWO_PI / math.log(T_hi / TWO_PI)
    margin = 1.5 * cfg.zero_window * gap + 1.0
    return find_zeros(max(2.0, T_lo - margin), T_hi + margin)


def log_abs_values(target, t, X=None, zeros: ZeroTable | None = None, cfg=None):
    """log |f(1/2 + it)| on the grid t (-inf at zeros)."""
    if target not in TARGETS:
        raise DomainError(f"unknown target {target!r}")
    out = np.empty(t.shape)
    for i in range(0, t.size, _BLOCK):
        tb = t[i:i + _BLOCK]
        if target == "P":
            out[i:i + _BLOCK] = log_abs_p_x_critical(X, tb)
            continue
        if target == "Z":
            from .hadamard_side import log_z_critical

            base = float(zeros.ordinates[0] - zeros.offsets[0]) if len(zeros) else 0.0
            out[i:i + _BLOCK] = log_z_critical(cfg, zeros, tb - base, real_only=True)
            continue
        with np.errstate(divide="ignore"):
            lz = np.log(np.abs(hardy_z(tb)))
        if target == "zeta_over_P":
            lz = lz - log_abs_p_x_critical(X, tb)
        out[i:i + _BLOCK] = lz
    return out


def _estimate(logs, k, t, target, T, X, window):
    vals = np.exp(2 * k * logs) if k != 0 else np.ones_like(logs)
    fine, coarse = _quadrature_pair(vals)
    pred, ref = _prediction(target, k, T, X, window)
    err = abs(fine - coarse) if k != 0 else 0.0
    return MomentEstimate(value=float(fine), stderr=float(err), k=k, grid=t.size,
                          prediction=pred, prediction_ref=ref, target=target,
                          window=(float(t[0]), float(t[-1])), X=X)


def empirical_moment(target: str, k: float, T: float, X: float | None = None,
                     density: float = MIN_DENSITY, window=None, zeros=None, cfg=None) -> MomentEstimate:
    """Trapezoid mean of |f(1/2 + it)|^(2k) over [T, 2T] (or the given window)."""
    if T < 100:
        raise DomainError("empirical moments need T >= 100")
    if density < MIN_DENSITY:
        raise DomainError(f"grid density must be >= {MIN_DENSITY} points per mean gap")
    if target not in TARGETS:
        raise DomainError(f"unknown target {target!r}")
    if target != "zeta" and X is None:
        raise DomainError(f"target {target!r} needs X")
    win = window if window is not None else (T, 2 * T)
    t = moment_grid(T, density, win)
    if k == 0:
        return _estimate(np.zeros(t.size), 0.0, t, target, T, X, win)
    if target == "Z":
        from .hadamard_side import HybridConfig

        cfg = cfg if cfg is not None else HybridConfig(X)
        zeros = zeros if zeros is not None else _zeros_for(win[0], win[1], cfg)
    logs = log_abs_values(target, t, X, zeros, cfg)
    return _estimate(logs, k, t, target, T, X, win)


@dataclass(frozen=True)
class SplittingResult:
    ratio: float
    zeta: MomentEstimate
    P: MomentEstimate
    zeta_over_P: MomentEstimate


def splitting_ratio(k: float, T: float, X: float, density: float = MIN_DENSITY,
                    parts: bool = False):
    """M(zeta) / (M(P_X) M(zeta/P_X)); the prediction for this ratio is 1."""
    if T < 100:
        raise DomainError("empirical moments need T >= 100")
    if density < MIN_DENSITY:
        raise DomainError(f"grid density must be >= {MIN_DENSITY} points per mean gap")
    win = (T, 2 * T)
    t = moment_grid(T, density, win)
    if k == 0:
        one = _estimate(np.zeros(t.size), 0.0, t, "zeta", T, X, win)
        res = SplittingResult(1.0, one, one, one)
        return res if parts else 1.0
    lz = log_abs_values("zeta", t)
    lp = log_abs_values("P", t, X)
    mz = _estimate(lz, k, t, "zeta", T, X, win)
    mp = _estimate(lp, k, t, "P", T, X, win)
    mq = _estimate(lz - lp, k, t, "zeta_over_P", T, X, win)
    ratio = mz.value / (mp.value * mq.value)
    res = SplittingResult(ratio, mz, mp, mq)
    return res if parts else ratio


def ratio_moment_check(k: float, T: float, X: float, density: float = MIN_DENSITY,
                      via: str = "zeta_over_P", zeros=None, cfg=None):
    """(empirical moment of zeta/P_X or Z_X, G^2(k+1)/G(2k+1) (log T / e^gamma log X)^(k^2))."""
    if via not in ("zeta_over_P", "Z"):
        raise DomainError("via must be 'zeta_over_P' or 'Z'")
    if k == 0:
        return 1.0, 1.0
    est = empirical_moment(via, k, T, X, density, zeros=zeros, cfg=cfg)
    return est.value, ratio_prediction(k, T, X)
