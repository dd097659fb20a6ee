"""Shared randomized property trials and slow independent oracles.

Each trial function draws its data from the supplied generator and
returns True when the inequality holds at the stated tolerance; suites
run them for a fixed number of trials and report the failure count.
"""

import numpy as np

from frontlab import (Field, apply_multiplier, band_project,
                      kernel_positivity_check, lp_norm, make_grid)
from frontlab.spectral import dealias_mask

GRID = make_grid(1024, 80.0)


def random_field(rng, band=None, localized=False):
    n = GRID.n
    coeffs = np.zeros(n, dtype=complex)
    top = band if band is not None else n // 2 - 1
    m = rng.integers(4, top)
    amps = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    coeffs[1:m + 1] = amps
    coeffs[-m:] = np.conj(coeffs[1:m + 1][::-1])
    values = np.fft.ifft(coeffs).real
    if localized:
        values = values * np.exp(-((GRID.x / (GRID.length / 8.0)) ** 2))
    peak = np.max(np.abs(values))
    return Field(GRID, values / peak if peak > 0 else values)


def parseval_trial(rng):
    f = random_field(rng)
    fhat = np.fft.fft(f.values)
    direct = GRID.h * np.sum(f.values ** 2)
    spectral = (GRID.h / GRID.n) * np.sum(np.abs(fhat) ** 2)
    return abs(direct - spectral) <= 1e-12 * direct


def bernstein_trial(rng):
    """Band-limited norms against the interval-measure bound |A|^(1/p-1/q)."""
    f = random_field(rng)
    eps = float(rng.uniform(0.05, 0.5))
    low, _ = band_project(f, eps)
    measure = 2.0 * eps
    ok = True
    for p, q in ((1.0, 2.0), (2.0, np.inf), (1.0, np.inf)):
        bound = measure ** (1.0 / p - (0.0 if q == np.inf else 1.0 / q)) \
            * lp_norm(f, p)
        ok &= bound - lp_norm(low, q) >= -1e-10
    return ok


def log_convexity_trial(rng):
    f = random_field(rng)
    p = float(rng.uniform(1.0, 2.5))
    r = float(rng.uniform(p + 0.5, 12.0))
    theta = float(rng.uniform(0.05, 0.95))
    q = 1.0 / (theta / p + (1.0 - theta) / r)
    lhs = lp_norm(f, q)
    rhs = lp_norm(f, p) ** theta * lp_norm(f, r) ** (1.0 - theta)
    return lhs <= rhs * (1.0 + 1e-12)


def agmon_trial(rng):
    f = random_field(rng, band=GRID.n // 4, localized=True)
    fhat = np.fft.fft(f.values)
    df = np.fft.ifft(1j * GRID.k * fhat).real
    dnorm = np.sqrt(GRID.h * np.sum(df ** 2))
    return lp_norm(f, np.inf) ** 2 <= 1.05 * dnorm * lp_norm(f, 2)


def diffusive_positivity_trial(rng):
    """<(-d2/dx2)^alpha f, f|f|^(p-2)> >= 0 for diffusive orders alpha <= 1."""
    f = random_field(rng, band=GRID.n // 3 - 2)
    ok = True
    for alpha in (0.3, 0.5, 1.0):
        frac = apply_multiplier(f, -(-(np.abs(GRID.k) ** (2.0 * alpha))))
        for p in (2, 3, 4):
            form = GRID.h * np.sum(frac.values * f.values
                                   * np.abs(f.values) ** (p - 2))
            ok &= form >= -1e-10
    return ok


def kernel_trial(rng):
    t = float(rng.uniform(0.3, 3.0))
    ok = True
    for alpha in (0.3, 0.5, 1.0):
        ok &= kernel_positivity_check(alpha, t).positive
    ok &= not kernel_positivity_check(1.5, t).positive
    return ok


def hermitian_real_output_trial(rng):
    """Hermitian symbols return real fields through the transform path."""
    f = random_field(rng, band=GRID.n // 4, localized=True)
    k = GRID.k
    symbols = (1j * k ** 3, -np.abs(k), 1j * np.sign(k), -k ** 2 + 1j * k * np.abs(k))
    ok = True
    for sym in symbols:
        sym = sym.astype(complex)
        if GRID.n % 2 == 0:
            sym[GRID.n // 2] = sym[GRID.n // 2].real
        out = np.fft.ifft(sym * np.fft.fft(f.values))
        # roundoff model: residue ~ eps * max|sym| * field scale
        scale = (1.0 + np.max(np.abs(sym))) * np.max(np.abs(f.values))
        ok &= np.max(np.abs(out.imag)) <= 1e-12 * scale
    return ok


def run_trials(trial, n_trials=100, seed=2024):
    rng = np.random.default_rng(seed)
    return sum(0 if trial(rng) else 1 for _ in range(n_trials))


PROPERTY_SUITES = {
    "parseval": parseval_trial,
    "bernstein": bernstein_trial,
    "log_convexity": log_convexity_trial,
    "agmon": agmon_trial,
    "diffusive_positivity": diffusive_positivity_trial,
    "kernel_positivity": kernel_trial,
    "hermitian_real_output": hermitian_real_output_trial,
}
