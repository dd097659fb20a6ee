"""Time integration of the modulated perturbation equation.

The field v rides in the front's co-moving frame:

    v_t = v_xx + L[v] + x0'(t) * (v_x + phi') - phi'*v - phi*v' - v*v',
    x0'(t) = -gamma * <phi', v>,

so the translation x0(t) is selected dynamically and v stays decaying,
which is what makes a periodic box usable for a heteroclinic problem.
The modulation sign is fixed by the energy identity

    d/dt ||v||^2 / 2 = <v, L v> - [ ||v'||^2 + <phi'/2, v^2> + gamma*<phi', v>^2 ],

whose bracket is the quadratic form of the modulated operator
-(d/dx)^2 + phi'/2 + gamma <phi',.> phi'; with the opposite sign the
translation mode feeds energy back and the norm grows.
The diagonal linear symbol -k^2 + l(k) carries all the stiffness and is
integrated exactly (ETDRK4, Cox & Matthews 2002; coefficients evaluated
by a series/direct split instead of contour averages so complex symbols
are handled uniformly); the front terms stay explicit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from .diagnostics import NormSeries
from .fronts import FrontProfile, ref_profile
from .spectral import Field, Grid, dealias_mask, lp_norm, weighted_l2
from .symbols import MultiplierSpec

__all__ = [
    "StabilityError",
    "PerturbationState",
    "StepperConfig",
    "Trajectory",
    "rhs_perturbation",
    "make_stepper",
    "step",
    "evolve",
    "cole_hopf_exact",
    "make_perturbation",
]

BOUNDARY_FRACTION = 0.05
BOUNDARY_TOL = 1e-6


class StabilityError(RuntimeError):
    pass


@dataclass(frozen=True)
class PerturbationState:
    v: Field
    x0: float = 0.0
    t: float = 0.0
    x0_dot_last: float = 0.0


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = "etdrk4"          # etdrk4 | imex2
    gamma: float = 1.1
    dealias: bool = True
    record_every: int = 10          # series record cadence, in steps
    snapshot_every: int = 0         # field snapshot cadence, 0 disables
    p_list: tuple = (1.5, 3.0, 4.0)

    def __post_init__(self):
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("time step and horizon must be positive")
        if self.scheme not in ("etdrk4", "imex2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.gamma <= 1.0:
            raise ValueError("modulation gain must exceed 1 for endpoints (1,-1)")


def boundary_contamination(values: np.ndarray) -> float:
    """max |v| on the outer 5% of the box relative to max |v| overall."""
    n = values.size
    edge = max(1, int(BOUNDARY_FRACTION * n / 2))
    outer = max(np.max(np.abs(values[:edge])), np.max(np.abs(values[-edge:])))
    peak = np.max(np.abs(values))
    return float(outer / peak) if peak > 0 else 0.0


# ---------------------------------------------------------------------------
# Right-hand side


class _Workspace:
    """Precomputed grid/front data shared by rhs evaluations."""

    def __init__(self, front: FrontProfile, spec: MultiplierSpec,
                 gamma: float, dealias: bool,
                 disable: tuple = ()):
        spec.require_admissible()
        grid = front.grid
        self.grid = grid
        self.gamma = gamma
        self.h = grid.h
        self.ik = 1j * grid.k
        if grid.n % 2 == 0:
            self.ik = self.ik.copy()
            self.ik[grid.n // 2] = 0.0
        self.lin = -grid.k ** 2 + spec.values(grid.k)
        self.phi = front.phi.values
        self.dphi = front.phi_prime.values
        self.mask = dealias_mask(grid.n) if dealias else np.ones(grid.n, bool)
        self.front_terms = "front" not in disable
        self.nonlinear = "nonlinear" not in disable
        self.modulation = "modulation" not in disable
        if "laplacian" in disable:
            self.lin = self.lin + grid.k ** 2  # symbol-only linear part
        self.k_max = grid.k_max

    def nonlinear_hat(self, vhat: np.ndarray) -> tuple[np.ndarray, float]:
        v = np.fft.ifft(vhat).real
        vx = np.fft.ifft(self.ik * vhat).real
        x0_dot = 0.0
        payload = np.zeros_like(v)
        if self.modulation:
            x0_dot = -self.gamma * self.h * float(self.dphi @ v)
            payload += x0_dot * (vx + self.dphi)
        if self.front_terms:
            # divergence form -(phi*v)': phi*v decays at the box seam even
            # though phi itself jumps there, and parity stays exact for odd v
            payload -= np.fft.ifft(self.ik * np.fft.fft(self.phi * v)).real
        if self.nonlinear:
            payload -= v * vx
        out = np.fft.fft(payload)
        out[~self.mask] = 0.0
        return out, x0_dot


def rhs_perturbation(state: PerturbationState, front: FrontProfile,
                     spec: MultiplierSpec, gamma: float = 1.1,
                     dealias: bool = True) -> tuple[Field, float]:
    """Full tendency of the perturbation equation and the translation speed.

    The quadratic term v*v' is dealiased by the two-thirds rule; all other
    terms are evaluated pseudo-spectrally as sampled products.
    """
    ws = _Workspace(front, spec, gamma, dealias)
    vhat = np.fft.fft(state.v.values)
    v = state.v.values
    vx = np.fft.ifft(ws.ik * vhat).real
    x0_dot = -gamma * ws.h * float(ws.dphi @ v)
    quad_hat = np.fft.fft(v * vx)
    if dealias:
        quad_hat[~ws.mask] = 0.0
    quad = np.fft.ifft(quad_hat).real
    linear = np.fft.ifft(ws.lin * vhat).real
    advect = np.fft.ifft(ws.ik * np.fft.fft(ws.phi * v)).real  # (phi*v)'
    tendency = linear + x0_dot * (vx + ws.dphi) - advect - quad
    return Field(state.v.grid, tendency), x0_dot


# ---------------------------------------------------------------------------
# Steppers on the augmented spectral state [v_hat, x0]


def _phi1(z):
    return _phi_series(z, 1)


def _phi_series(z, order):
    """phi-functions phi_1, phi_2, phi_3 with a Taylor branch near 0."""
    import math

    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zb = z[~small]
    if order == 1:
        out[~small] = (np.exp(zb) - 1.0) / zb
    elif order == 2:
        out[~small] = (np.exp(zb) - 1.0 - zb) / zb ** 2
    else:
        out[~small] = (np.exp(zb) - 1.0 - zb - 0.5 * zb ** 2) / zb ** 3
    zs = z[small]
    acc = np.zeros_like(zs)
    coeff = np.ones_like(zs)
    for j in range(14):  # sum_{j>=0} z^j / (j + order)!
        acc = acc + coeff / math.factorial(j + order)
        coeff = coeff * zs
    out[small] = acc
    return out


class _EtdRk4:
    """Cox-Matthews ETDRK4 for z' = L z + N(z) with diagonal L."""

    order = 4

    def __init__(self, lin: np.ndarray, dt: float):
        c = lin * dt
        half = 0.5 * c
        self.dt = dt
        self.e_full = np.exp(c)
        self.e_half = np.exp(half)
        self.q = 0.5 * dt * _phi1(half)
        p1, p2, p3 = _phi_series(c, 1), _phi_series(c, 2), _phi_series(c, 3)
        self.f1 = dt * (p1 - 3.0 * p2 + 4.0 * p3)
        self.f2 = dt * (2.0 * p2 - 4.0 * p3)
        self.f3 = dt * (4.0 * p3 - p2)

    def advance(self, z, nonlin):
        n0, aux = nonlin(z)
        a = self.e_half * z + self.q * n0
        n1, _ = nonlin(a)
        b = self.e_half * z + self.q * n1
        n2, _ = nonlin(b)
        cc = self.e_half * a + self.q * (2.0 * n2 - n0)
        n3, _ = nonlin(cc)
        out = self.e_full * z + self.f1 * n0 + self.f2 * (n1 + n2) + self.f3 * n3
        return out, aux


class _Imex2:
    """Two-stage second-order IMEX (ARS(2,2,2)); the diagonal implicit
    solves are divisions."""

    order = 2

    def __init__(self, lin: np.ndarray, dt: float):
        g = 1.0 - 1.0 / np.sqrt(2.0)
        self.dt = dt
        self.g = g
        self.delta = 1.0 - 1.0 / (2.0 * g)
        self.solve = 1.0 / (1.0 - dt * g * lin)
        self.lin = lin

    def advance(self, z, nonlin):
        dt, g, d = self.dt, self.g, self.delta
        n0, aux = nonlin(z)
        u1 = self.solve * (z + dt * g * n0)
        n1, _ = nonlin(u1)
        u2 = self.solve * (
            z + dt * (d * n0 + (1.0 - d) * n1) + dt * (1.0 - g) * self.lin * u1
        )
        return u2, aux


def make_stepper(ws: _Workspace, config: StepperConfig):
    lin = np.concatenate([ws.lin, [0.0]])  # x0 carries no linear part
    cls = _EtdRk4 if config.scheme == "etdrk4" else _Imex2
    stepper = cls(lin, config.dt)

    n = ws.grid.n

    def nonlin(z):
        payload, x0_dot = ws.nonlinear_hat(z[:n])
        return np.concatenate([payload, [x0_dot]]), x0_dot

    return stepper, nonlin


def step(state: PerturbationState, front: FrontProfile, spec: MultiplierSpec,
         config: StepperConfig) -> PerturbationState:
    """Advance a single time step (convenience wrapper around evolve's core)."""
    ws = _Workspace(front, spec, config.gamma, config.dealias)
    stepper, nonlin = make_stepper(ws, config)
    z = np.concatenate([np.fft.fft(state.v.values), [state.x0]])
    _guard_cfl(state.v.values, config.dt, ws.k_max)
    z, x0_dot = stepper.advance(z, nonlin)
    v = np.fft.ifft(z[:-1]).real
    if not np.all(np.isfinite(v)):
        raise StabilityError(f"non-finite field at t={state.t + config.dt:g}")
    return PerturbationState(v=Field(state.v.grid, v), x0=float(z[-1].real),
                             t=state.t + config.dt, x0_dot_last=x0_dot)


def _guard_cfl(values: np.ndarray, dt: float, k_max: float):
    advect = dt * float(np.max(np.abs(values))) * k_max
    if advect > 1.0:
        raise StabilityError(
            f"advective step limit exceeded: dt*max|v|*k_max = {advect:.3g} > 1"
        )


@dataclass
class Trajectory:
    series: NormSeries
    snapshots: list
    x0_final: float
    monotonicity_violations: int
    max_uptick: float
    boundary_warnings: int
    aborted: bool = False


def evolve(v0: Field, front: FrontProfile, spec: MultiplierSpec,
           config: StepperConfig, certificate=None,
           disable: tuple = (), on_record=None) -> Trajectory:
    """Run the perturbation equation to t_end with per-step audits.

    Checks along the way: the advective step guard, non-finite aborts,
    per-step monotonicity of ||v||_2 (violations beyond 1e-10 relative are
    counted, the run continues), and boundary contamination of the
    decaying field (warning).  `disable` can switch off 'front',
    'nonlinear', 'modulation' or 'laplacian' terms for calibration runs.
    """
    grid = v0.grid
    if grid is not front.grid and grid != front.grid:
        raise ValueError("perturbation and front live on different grids")
    spec.require_admissible()
    if certificate is not None and not getattr(certificate, "satisfied", False):
        warnings.warn("front certificate does not verify the one-eigenvalue "
                      "condition; decay guarantees may not apply")
    if certificate is None and not disable:
        warnings.warn("evolving without a spectral certificate for the front")

    weighted0 = weighted_l2(v0)
    l2_0 = lp_norm(v0, 2)
    if l2_0 > 0 and weighted0 > 10.0 * l2_0:
        warnings.warn("initial data is weakly localized: weighted norm "
                      f"{weighted0:.3g} exceeds 10x the L2 norm {l2_0:.3g}")

    ws = _Workspace(front, spec, config.gamma, config.dealias, disable)
    stepper, nonlin = make_stepper(ws, config)
    n = grid.n
    vhat = np.fft.fft(v0.values)
    if config.dealias:
        vhat[~ws.mask] = 0.0
    z = np.concatenate([vhat, [0.0 + 0.0j]])  # x0(0) = 0

    series = NormSeries(p_list=config.p_list)
    snapshots = []
    nsteps = int(round(config.t_end / config.dt))
    l2_scale = grid.h / n  # Parseval: ||v||_2^2 = (h/n) * sum |v_hat|^2

    def record(t, x0, x0_dot):
        v = np.fft.ifft(z[:n]).real
        f = Field(grid, v)
        vhat_local = z[:n]
        dv = np.sqrt(l2_scale * float(np.sum(np.abs(grid.k * vhat_local) ** 2)))
        lp_vals = [lp_norm(f, p) for p in config.p_list]
        series.append(t, x0, x0_dot, lp_norm(f, 1), lp_norm(f, 2),
                      lp_norm(f, np.inf), lp_vals, dv, weighted_l2(f))
        if on_record is not None:
            on_record(t, f, series)
        return f

    boundary_warnings = 0
    if boundary_contamination(v0.values) > BOUNDARY_TOL:
        boundary_warnings += 1
        warnings.warn("initial data does not decay at the box edge")

    record(0.0, 0.0, 0.0)
    if config.snapshot_every:
        snapshots.append((0.0, Field(grid, np.fft.ifft(z[:n]).real)))

    prev_l2sq = l2_scale * float(np.sum(np.abs(z[:n]) ** 2))
    # relative slack per step, with an absolute floor so that roundoff
    # wiggles of a fully decayed field (10+ orders below the initial
    # energy) do not count as monotonicity violations
    l2sq_floor = 1e-13 * prev_l2sq
    vinf0 = float(np.max(np.abs(v0.values)))
    violations = 0
    max_uptick = 0.0
    aborted = False
    vinf = vinf0

    for istep in range(1, nsteps + 1):
        _guard_cfl_cached(vinf, config.dt, ws.k_max)
        z, x0_dot = stepper.advance(z, nonlin)
        if config.dealias:
            z[:n][~ws.mask] = 0.0
        t = istep * config.dt

        l2sq = l2_scale * float(np.sum(np.abs(z[:n]) ** 2))
        if not np.isfinite(l2sq):
            aborted = True
            break
        if l2sq - prev_l2sq > 1e-10 * prev_l2sq + l2sq_floor:
            violations += 1
            max_uptick = max(max_uptick, l2sq / prev_l2sq - 1.0)
        prev_l2sq = l2sq

        if istep % config.record_every == 0 or istep == nsteps:
            f = record(t, float(z[-1].real), x0_dot)
            vinf = float(np.max(np.abs(f.values)))
            if vinf <= 1e-10 * vinf0:
                continue  # fully decayed; edge ratios are roundoff noise
            contamination = boundary_contamination(f.values)
            if contamination > BOUNDARY_TOL and boundary_warnings == 0:
                boundary_warnings += 1
                warnings.warn(
                    f"boundary contamination {contamination:.2e} at t={t:g}"
                )
            elif contamination > BOUNDARY_TOL:
                boundary_warnings += 1
            if config.snapshot_every and istep % config.snapshot_every == 0:
                snapshots.append((t, f))

    if aborted:
        err = StabilityError(
            f"non-finite solution at t={istep * config.dt:g}; "
            f"last good state at t={series.t[-1]:g}"
        )
        err.partial = Trajectory(series=series, snapshots=snapshots,
                                 x0_final=float(series.x0[-1]),
                                 monotonicity_violations=violations,
                                 max_uptick=max_uptick,
                                 boundary_warnings=boundary_warnings,
                                 aborted=True)
        raise err
    return Trajectory(series=series, snapshots=snapshots,
                      x0_final=float(z[-1].real),
                      monotonicity_violations=violations,
                      max_uptick=max_uptick,
                      boundary_warnings=boundary_warnings)


def _guard_cfl_cached(vinf: float, dt: float, k_max: float):
    if dt * vinf * k_max > 1.0:
        raise StabilityError(
            f"advective step limit exceeded: dt*max|v|*k_max = "
            f"{dt * vinf * k_max:.3g} > 1"
        )


# ---------------------------------------------------------------------------
# Exact pure-Burgers solution via the heat substitution


def cole_hopf_exact(u0: Field, t: float, query=None):
    """Exact solution of u_t - u_xx + u*u_x = 0 from heteroclinic data.

    With w0 = exp(-(1/2) * int_0^x u0), the solution is

        u(t,x) = [int ((x-y)/t) e^{-H/2} dy] / [int e^{-H/2} dy],
        H(x,y) = int_0^y u0 + (x-y)^2 / (2t),

    evaluated by composite Gauss-Legendre panels with the max of -H/2
    factored out (w0 grows like e^{|x|/2} for front-like data).  The
    integrand is truncated where it falls 1e-18 below its peak.
    """
    if t <= 0.0:
        raise ValueError("time must be positive")
    grid = u0.grid
    x_query = grid.x if query is None else np.atleast_1d(np.asarray(query, float))

    # split u0 = c0 + lam0 * ref + w with decaying w; the reference part
    # integrates in closed form, w by spectral antiderivative
    edge = max(4, grid.n // 128)
    u_minus = float(np.mean(u0.values[:edge]))
    u_plus = float(np.mean(u0.values[-edge:]))
    lam0 = 0.5 * (u_minus - u_plus)
    c0 = 0.5 * (u_minus + u_plus)
    w = u0.values - c0 - lam0 * ref_profile(grid.x)

    upsample = 16
    nf = upsample * grid.n
    what = np.fft.fft(w)
    pad = np.zeros(nf, dtype=complex)
    half = grid.n // 2
    pad[:half] = what[:half]
    pad[-half:] = what[-half:]
    w_fine = np.fft.ifft(pad).real * upsample
    xf = -0.5 * grid.length + (grid.length / nf) * np.arange(nf)

    mean_w = float(np.mean(w))
    kf = 2.0 * np.pi * np.fft.fftfreq(nf, d=grid.length / nf)
    wt_hat = np.fft.fft(w_fine - mean_w)
    anti = np.zeros(nf, dtype=complex)
    anti[1:] = wt_hat[1:] / (1j * kf[1:])
    wt_anti = np.fft.ifft(anti).real
    spline = CubicSpline(xf, wt_anti)
    wt_anti0 = float(spline(0.0))

    def u0_antiderivative(y):
        yc = np.clip(y, xf[0], xf[-1])
        core = spline(yc) - wt_anti0 + mean_w * yc
        return c0 * y - 2.0 * lam0 * np.log(np.cosh(0.5 * y)) + core

    def solve(n_panels):
        reach = np.sqrt(2.0 * t * np.log(1e18)) + 2.0 * t * (abs(c0) + abs(lam0)) + 6.0
        qx, qw = leggauss(16)
        edges = np.linspace(-reach, reach, n_panels + 1)
        mids = 0.5 * (edges[1:] + edges[:-1])
        halfw = 0.5 * (edges[1:] - edges[:-1])
        offsets = (mids[:, None] + halfw[:, None] * qx[None, :]).ravel()
        wts = (halfw[:, None] * qw[None, :]).ravel()

        y = x_query[:, None] + offsets[None, :]
        h_exp = u0_antiderivative(y) + (x_query[:, None] - y) ** 2 / (2.0 * t)
        h_exp *= -0.5
        h_exp -= np.max(h_exp, axis=1, keepdims=True)
        weight = np.exp(h_exp) * wts[None, :]
        num = np.sum(((x_query[:, None] - y) / t) * weight, axis=1)
        den = np.sum(weight, axis=1)
        return num / den

    n_panels = max(24, int(np.ceil((np.sqrt(2.0 * t * np.log(1e18)) + 6.0))))
    coarse = solve(n_panels)
    fine = solve(int(1.5 * n_panels) + 2)
    if np.max(np.abs(coarse - fine)) > 5e-7:
        raise RuntimeError("quadrature did not converge for the exact solution")
    if query is None:
        return Field(grid, fine)
    return fine


# ---------------------------------------------------------------------------
# Initial perturbations


def make_perturbation(kind: str, amplitude: float, width: float,
                      grid: Grid, seed: int = 0) -> Field:
    """Canned initial data; odd kinds are antisymmetrized exactly on the grid.

    gaussian                 a * exp(-(x/w)^2)
    odd_gaussian_derivative  -a * x * exp(-(x/w)^2)
    odd_sine_packet          a * sin(x/w) * exp(-(x/(3w))^2)
    random_bandlimited       seeded low-mode noise under a decaying envelope
    """
    if amplitude <= 0.0 or width <= 0.0:
        raise ValueError("amplitude and width must be positive")
    x = grid.x
    if kind == "gaussian":
        values = amplitude * np.exp(-((x / width) ** 2))
    elif kind == "odd_gaussian_derivative":
        values = -amplitude * x * np.exp(-((x / width) ** 2))
    elif kind == "odd_sine_packet":
        values = amplitude * np.sin(x / width) * np.exp(-((x / (3.0 * width)) ** 2))
    elif kind == "random_bandlimited":
        rng = np.random.default_rng(seed)
        modes = max(4, int(grid.length / (2.0 * np.pi * width)) + 4)
        coeffs = np.zeros(grid.n, dtype=complex)
        amps = rng.standard_normal(modes) + 1j * rng.standard_normal(modes)
        taper = np.exp(-np.linspace(0.0, 3.0, modes) ** 2)
        coeffs[1:modes + 1] = amps * taper
        coeffs[-modes:] = np.conj(coeffs[1:modes + 1][::-1])
        raw = np.fft.ifft(coeffs).real
        raw *= np.exp(-((x / (grid.length / 8.0)) ** 2))
        peak = np.max(np.abs(raw))
        values = amplitude * raw / peak if peak > 0 else raw
    else:
        raise ValueError(f"unknown perturbation kind {kind!r}")
    if kind.startswith("odd"):
        values = 0.5 * (values - np.concatenate([[values[0]], values[1:][::-1]]))
        values[0] = 0.0
    return Field(grid, values)
