"""Norm time series, decay-rate fits, and inequality audits along runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .spectral import Field, band_project, lp_norm

__all__ = [
    "NormSeries",
    "FrequencySplit",
    "RateFit",
    "EnergyReport",
    "WeightedReport",
    "check_energy_inequality",
    "frequency_split_series",
    "epsilon_of_time",
    "fit_rate",
    "predicted_rate",
    "compare_to_theorem",
    "weighted_bound_monitor",
]


@dataclass
class NormSeries:
    """Per-time records of a perturbation run.

    Columns: t, x0, x0_dot, ||v||_1, ||v||_2, ||v||_inf, ||v||_p for the
    configured p list, ||v'||_2, the |x|-weighted L2 norm, and the running
    sup of ||v||_inf.
    """

    p_list: tuple = ()
    t: list = field(default_factory=list)
    x0: list = field(default_factory=list)
    x0_dot: list = field(default_factory=list)
    l1: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    linf: list = field(default_factory=list)
    lp: dict = field(default_factory=dict)
    dv_l2: list = field(default_factory=list)
    weighted: list = field(default_factory=list)
    m_sup: list = field(default_factory=list)

    def __post_init__(self):
        self.p_list = tuple(float(p) for p in self.p_list)
        for p in self.p_list:
            self.lp.setdefault(p, [])

    def append(self, t, x0, x0_dot, l1, l2, linf, lp_values, dv_l2, weighted):
        if self.t and t <= self.t[-1]:
            raise ValueError("times must be strictly increasing")
        self.t.append(float(t))
        self.x0.append(float(x0))
        self.x0_dot.append(float(x0_dot))
        self.l1.append(float(l1))
        self.l2.append(float(l2))
        self.linf.append(float(linf))
        for p, v in zip(self.p_list, lp_values):
            self.lp[p].append(float(v))
        self.dv_l2.append(float(dv_l2))
        self.weighted.append(float(weighted))
        running = self.m_sup[-1] if self.m_sup else 0.0
        self.m_sup.append(max(running, float(linf)))

    def column(self, name: str) -> np.ndarray:
        if name.startswith("lp:"):
            return np.asarray(self.lp[float(name[3:])])
        return np.asarray(getattr(self, name), dtype=float)

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class EnergyReport:
    c_fit: float
    violations: int
    steps_used: int


def check_energy_inequality(series: NormSeries,
                            floor: float = 1e-12) -> EnergyReport:
    """Fit the constant in d/dt ||v||_2^2 <= -C ||v'||_2^2 along a series.

    C_fit is the minimum over recorded steps of the decay-to-gradient
    ratio (trapezoidal ||v'||^2 between records); violations count steps
    where ||v||_2^2 actually increased beyond 1e-10 relative.
    """
    t = series.column("t")
    e = series.column("l2") ** 2
    d = series.column("dv_l2") ** 2
    if len(t) < 2:
        raise ValueError("series too short")
    de = np.diff(e)
    dt = np.diff(t)
    grad = 0.5 * (d[1:] + d[:-1])
    usable = grad > floor
    if np.count_nonzero(usable) < 10:
        raise ValueError("series too short: fewer than 10 usable steps")
    ratios = (-de[usable] / dt[usable]) / grad[usable]
    # absolute floor keeps roundoff wiggles of a decayed field from
    # counting as energy-inequality violations
    violations = int(np.sum(de > 1e-10 * e[:-1] + 1e-13 * e[0]))
    return EnergyReport(c_fit=float(np.min(ratios)),
                        violations=violations,
                        steps_used=int(np.count_nonzero(usable)))


@dataclass(frozen=True)
class FrequencySplit:
    """Low/high-frequency energy split I(t) = I_low(t) + I_high(t) at a
    cutoff eps (ordinary frequency units)."""

    eps_freq: float
    t: np.ndarray
    i_low: np.ndarray
    i_high: np.ndarray
    parseval_defect: float
    bernstein_slack: float   # max of I_low - 2*eps*||v||_1^2 (<= 0 when the bound holds)
    eps_opt: np.ndarray | None = None


def epsilon_of_time(t: float, c1: float) -> float:
    """Solve exp(-c1*eps^2*t) = eps for eps in (0,1)."""
    if t <= 0.0 or c1 <= 0.0:
        raise ValueError("need positive time and constant")

    def f(eps):
        return c1 * eps * eps * t + np.log(eps)

    return brentq(f, 1e-300, 1.0 - 1e-15)


def frequency_split_series(snapshots: Sequence[tuple[float, Field]],
                           eps_freq: float,
                           c1: float | None = None) -> FrequencySplit:
    """Band-split energies along stored snapshots.

    Also evaluates the band-limited bound I_low <= 2*eps*||v||_1^2 (the
    interval (-eps, eps) has measure 2*eps) and, when c1 is given, the
    crossover frequency solving exp(-c1*eps^2*t) = eps per time.
    """
    if not snapshots:
        raise ValueError("no snapshots available")
    ts, lows, highs, slack = [], [], [], -np.inf
    for t, f in snapshots:
        low, high = band_project(f, eps_freq)
        il = lp_norm(low, 2) ** 2
        ih = lp_norm(high, 2) ** 2
        total = lp_norm(f, 2) ** 2
        defect = abs(total - il - ih) / max(total, 1e-300)
        slack = max(slack, il - 2.0 * eps_freq * lp_norm(f, 1) ** 2)
        ts.append(t)
        lows.append(il)
        highs.append(ih)
    parseval = max(
        abs(lp_norm(band_project(f, eps_freq)[0], 2) ** 2
            + lp_norm(band_project(f, eps_freq)[1], 2) ** 2
            - lp_norm(f, 2) ** 2) / max(lp_norm(f, 2) ** 2, 1e-300)
        for _, f in snapshots
    )
    eps_opt = None
    if c1 is not None:
        eps_opt = np.array([epsilon_of_time(t, c1) if t > 0 else np.nan
                            for t in ts])
    return FrequencySplit(eps_freq=float(eps_freq), t=np.asarray(ts),
                          i_low=np.asarray(lows), i_high=np.asarray(highs),
                          parseval_defect=float(parseval),
                          bernstein_slack=float(slack), eps_opt=eps_opt)


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay exponent of norm ~ A * (ln t)^beta * t^exponent."""

    window: tuple[float, float]
    exponent: float
    beta: float
    amplitude: float
    r_squared: float


def fit_rate(times, values, window: tuple[float, float],
             beta: float = 0.0) -> RateFit:
    """Fit ln(value) - beta*ln(ln t) = ln A + exponent * ln t on a window."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    if beta != 0.0 and lo < 2.0:
        raise ValueError("log-corrected fits need window start >= 2")
    mask = (t >= lo) & (t <= hi)
    if np.count_nonzero(mask) < 8:
        raise ValueError("window must contain at least 8 samples")
    if np.any(v[mask] <= 0.0):
        raise ValueError("values must be positive inside the window")
    x = np.log(t[mask])
    y = np.log(v[mask])
    if beta != 0.0:
        y = y - beta * np.log(np.log(t[mask]))
    design = np.column_stack([np.ones_like(x), x])
    coeff, *_ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coeff
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(window=(float(lo), float(hi)),
                   exponent=float(coeff[1]), beta=float(beta),
                   amplitude=float(np.exp(coeff[0])), r_squared=r2)


def predicted_rate(model: str, p: float, delta: float = 0.05):
    """(rate, beta) such that the claimed bound is norm <= C*(ln t)^beta / t^rate.

    kdvb: 1/2 at p=2; (1-1/p)-delta for 1<p<2; 1/p for p>2 (no log).
    frac_odd: (1-1/p)/2 with matching log power for 1<p<=2;
    7/24 - 1/(12p) with matching log power for 2<p<=inf;
    p='derivative' gives the gradient bound (ln t / t)^{1/3}.
    """
    if p == "derivative":
        return (1.0 / 3.0, 1.0 / 3.0) if model == "frac_odd" else (None, None)
    p = float(p)
    if model == "kdvb":
        if p == 2.0:
            return 0.5, 0.0
        if 1.0 < p < 2.0:
            return (1.0 - 1.0 / p) - delta, 0.0
        if p > 2.0 and np.isfinite(p):
            return 1.0 / p, 0.0
        return None, None
    if model == "frac_odd":
        if 1.0 < p <= 2.0:
            r = 0.5 * (1.0 - 1.0 / p)
            return r, r
        if p > 2.0:
            q = 0.0 if np.isinf(p) else 1.0 / p
            r = 7.0 / 24.0 - q / 12.0
            return r, r
        return None, None
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class TheoremVerdict:
    p: object
    rate: float
    beta: float
    envelope_start: float
    envelope_sup: float
    ratio: float
    satisfied: bool
    fitted_exponent: float


def compare_to_theorem(series: NormSeries, model: str,
                       p_list: Sequence, window: tuple[float, float],
                       delta: float = 0.05,
                       envelope_factor: float = 2.0) -> list[TheoremVerdict]:
    """Envelope verdicts: norm(t) * t^rate / (ln t)^beta must stay within
    `envelope_factor` of its value at the window start.

    The claimed bounds are one-sided with unspecified constants, so
    boundedness of the compensated norm is the checkable statement; the
    fitted exponent is reported as data alongside.
    """
    t = series.column("t")
    verdicts = []
    for p in p_list:
        rate, beta = predicted_rate(model, p, delta)
        if rate is None:
            continue
        if p == "derivative":
            norm = series.column("dv_l2")
        elif p == 1.0:
            norm = series.column("l1")
        elif p == 2.0:
            norm = series.column("l2")
        elif np.isinf(float(p)):
            norm = series.column("linf")
        else:
            norm = series.column(f"lp:{float(p)}")
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
        if np.count_nonzero(mask) < 2:
            raise ValueError("window contains too few records")
        tt = t[mask]
        comp = norm[mask] * tt ** rate
        if beta != 0.0:
            comp = comp / np.log(tt) ** beta
        start = float(comp[0])
        sup = float(np.max(comp))
        ratio = sup / start if start > 0 else np.inf
        fit = fit_rate(t, np.maximum(norm, 1e-300), window, beta=beta)
        verdicts.append(TheoremVerdict(
            p=p, rate=float(rate), beta=float(beta),
            envelope_start=start, envelope_sup=sup, ratio=float(ratio),
            satisfied=bool(ratio <= envelope_factor),
            fitted_exponent=fit.exponent,
        ))
    return verdicts


@dataclass(frozen=True)
class WeightedReport:
    sup_weighted_sq: float   # sup_t of the weighted energy integral v^2 |x|
    cumulative_l2_sq: float  # integral of ||v||_2^2 dt (left Riemann sum)
    growth_flag: bool        # weighted energy exceeded 3x its initial value
    chain_ok: bool           # t*||v(t)||^2 <= cumulative integral at all t


def weighted_bound_monitor(series: NormSeries) -> WeightedReport:
    """Audit the weighted-energy bound and the chain t*||v(t)||^2 <= int ||v||^2."""
    t = series.column("t")
    wsq = series.column("weighted") ** 2
    l2sq = series.column("l2") ** 2
    dt = np.diff(t)
    cumulative = np.concatenate([[0.0], np.cumsum(l2sq[:-1] * dt)])
    chain = (t - t[0]) * l2sq <= cumulative + 1e-10 * (1.0 + cumulative)
    initial = wsq[0] if wsq.size else 0.0
    return WeightedReport(
        sup_weighted_sq=float(np.max(wsq, initial=0.0)),
        cumulative_l2_sq=float(cumulative[-1] if cumulative.size else 0.0),
        growth_flag=bool(np.max(wsq, initial=0.0) > 3.0 * initial + 1e-300),
        chain_ok=bool(np.all(chain)),
    )
