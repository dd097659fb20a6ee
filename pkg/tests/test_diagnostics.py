import numpy as np
import pytest

from frontlab import (Field, NormSeries, check_energy_inequality,
                      compare_to_theorem, epsilon_of_time, fit_rate,
                      frequency_split_series, lp_norm, make_grid,
                      predicted_rate, weighted_bound_monitor)


def synthetic_series(times, l2, p_list=(), dv=None, l1=None, weighted=None):
    s = NormSeries(p_list=p_list)
    dv = dv if dv is not None else l2
    l1 = l1 if l1 is not None else l2
    weighted = weighted if weighted is not None else l2
    for i, t in enumerate(times):
        s.append(t, 0.0, 0.0, l1[i], l2[i], l2[i],
                 [l2[i]] * len(p_list), dv[i], weighted[i])
    return s


# ---------------------------------------------------------------------------
# Rate fitting


def test_fit_exact_power_law():
    t = np.geomspace(1.0, 100.0, 60)
    fit = fit_rate(t, t ** -0.5, (1.0, 100.0))
    assert fit.exponent == pytest.approx(-0.5, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_exact_log_corrected():
    t = np.geomspace(2.5, 500.0, 80)
    y = (np.log(t) / t) ** 0.25
    fit = fit_rate(t, y, (2.5, 500.0), beta=0.25)
    assert fit.exponent == pytest.approx(-0.25, abs=1e-10)


@pytest.mark.parametrize("exponent", [-2.0, -1.3, -0.5, -0.1, 0.0])
def test_fit_exactness_across_exponents(exponent):
    t = np.geomspace(3.0, 300.0, 50)
    fit = fit_rate(t, 2.7 * t ** exponent, (3.0, 300.0))
    assert fit.exponent == pytest.approx(exponent, abs=1e-10)


def test_fit_with_multiplicative_noise():
    rng = np.random.default_rng(5)
    t = np.geomspace(10.0, 100.0, 120)
    y = t ** -0.5 * (1.0 + 0.01 * rng.standard_normal(t.size))
    fit = fit_rate(t, y, (10.0, 100.0))
    assert fit.exponent == pytest.approx(-0.5, abs=0.02)


def test_fit_validation():
    t = np.geomspace(1.0, 100.0, 40)
    with pytest.raises(ValueError, match="8 samples"):
        fit_rate(t, t ** -1.0, (90.0, 100.0))
    with pytest.raises(ValueError, match="positive"):
        fit_rate(t, t - 50.0, (1.0, 100.0))
    with pytest.raises(ValueError, match="window start"):
        fit_rate(t, t ** -1.0, (1.0, 100.0), beta=0.5)


# ---------------------------------------------------------------------------
# Energy audit


def test_energy_inequality_synthetic_heat():
    t = np.linspace(0.0, 2.0, 201)
    e = np.exp(-2.0 * t)        # ||v||^2 with ||v'||^2 = ||v||^2
    s = synthetic_series(t, np.sqrt(e), dv=np.sqrt(e))
    rep = check_energy_inequality(s)
    assert rep.violations == 0
    assert rep.c_fit == pytest.approx(2.0, rel=1e-3)


def test_energy_inequality_needs_usable_steps():
    t = np.linspace(0.0, 1.0, 30)
    zero = np.zeros_like(t)
    s = synthetic_series(t, zero, dv=zero)
    with pytest.raises(ValueError, match="too short"):
        check_energy_inequality(s)


def test_energy_inequality_counts_violations():
    t = np.linspace(0.0, 1.0, 40)
    l2 = 1.0 + 0.01 * np.sin(20.0 * t)  # oscillating energy
    s = synthetic_series(t, l2, dv=np.ones_like(t))
    rep = check_energy_inequality(s)
    assert rep.violations > 0


# ---------------------------------------------------------------------------
# Frequency split


def make_snapshots():
    g = make_grid(512, 80.0)
    rng = np.random.default_rng(9)
    snaps = []
    for i, t in enumerate(np.linspace(0.5, 5.0, 6)):
        decay = np.exp(-0.3 * t)
        vals = decay * np.exp(-((g.x - 2.0 * np.sin(i)) / 3.0) ** 2)
        snaps.append((float(t), Field(g, vals)))
    return snaps


def test_frequency_split_parseval_and_bernstein():
    snaps = make_snapshots()
    split = frequency_split_series(snaps, 0.1)
    assert split.parseval_defect <= 1e-12
    total = np.array([lp_norm(f, 2) ** 2 for _, f in snaps])
    assert np.max(np.abs(split.i_low + split.i_high - total)) <= 1e-12 * total.max()
    assert split.bernstein_slack <= 0.0


def test_frequency_split_requires_snapshots():
    with pytest.raises(ValueError):
        frequency_split_series([], 0.1)


def test_epsilon_of_time_solves_fixed_point():
    for t, c1 in ((10.0, 1.0), (1000.0, 0.3)):
        eps = epsilon_of_time(t, c1)
        assert np.exp(-c1 * eps * eps * t) == pytest.approx(eps, rel=1e-10)


def test_epsilon_of_time_asymptote():
    """eps(t) * sqrt(t / ln t) approaches a constant (within 10%)."""
    ts = np.geomspace(1e2, 1e4, 25)
    vals = np.array([epsilon_of_time(t, 1.0) * np.sqrt(t / np.log(t))
                     for t in ts])
    assert np.max(vals) / np.min(vals) <= 1.10


def test_frequency_split_eps_opt_column():
    snaps = make_snapshots()
    split = frequency_split_series(snaps, 0.1, c1=1.0)
    assert split.eps_opt is not None
    assert np.all(np.isfinite(split.eps_opt))


# ---------------------------------------------------------------------------
# Theorem comparison


def test_predicted_rate_table():
    assert predicted_rate("kdvb", 2.0) == (0.5, 0.0)
    assert predicted_rate("kdvb", 4.0) == (0.25, 0.0)
    rate, beta = predicted_rate("kdvb", 1.5, delta=0.05)
    assert rate == pytest.approx(1.0 / 3.0 - 0.05)
    assert beta == 0.0
    rate, beta = predicted_rate("frac_odd", 2.0)
    assert rate == beta == 0.25
    rate, beta = predicted_rate("frac_odd", np.inf)
    assert rate == pytest.approx(7.0 / 24.0)
    assert beta == pytest.approx(7.0 / 24.0)
    rate, beta = predicted_rate("frac_odd", "derivative")
    assert rate == beta == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        predicted_rate("airy", 2.0)


def test_compare_to_theorem_envelopes():
    t = np.geomspace(2.0, 400.0, 120)
    good = 3.0 * t ** -0.6          # decays faster than 1/2
    s = synthetic_series(t, good, p_list=(4.0,))
    verdicts = compare_to_theorem(s, "kdvb", [2.0, 4.0], (10.0, 400.0))
    assert all(v.satisfied for v in verdicts)

    bad = 0.3 * t ** -0.2           # slower than the claimed 1/2
    s_bad = synthetic_series(t, bad, p_list=(4.0,))
    verdicts = compare_to_theorem(s_bad, "kdvb", [2.0], (10.0, 400.0))
    assert not verdicts[0].satisfied
    assert verdicts[0].fitted_exponent == pytest.approx(-0.2, abs=1e-8)


def test_compare_to_theorem_log_correction():
    t = np.geomspace(2.5, 400.0, 100)
    series = synthetic_series(t, (np.log(t) / t) ** 0.25,
                              dv=(np.log(t) / t) ** (1.0 / 3.0))
    verdicts = compare_to_theorem(series, "frac_odd", [2.0, "derivative"],
                                  (10.0, 400.0))
    for v in verdicts:
        assert v.satisfied
        assert v.ratio <= 1.0 + 1e-9


# ---------------------------------------------------------------------------
# Weighted bound monitor


def test_weighted_monitor_zero_field():
    t = np.linspace(0.0, 1.0, 20)
    zero = np.zeros_like(t)
    s = synthetic_series(t, zero, dv=zero, weighted=zero)
    rep = weighted_bound_monitor(s)
    assert rep.sup_weighted_sq == 0.0
    assert rep.cumulative_l2_sq == 0.0
    assert not rep.growth_flag


def test_weighted_monitor_chain_for_monotone_series():
    """t * ||v(t)||^2 <= int_0^t ||v||^2 holds exactly for non-increasing
    norms with left Riemann sums."""
    t = np.linspace(0.0, 50.0, 400)
    l2 = 1.0 / np.sqrt(1.0 + t)
    s = synthetic_series(t, l2, weighted=l2)
    rep = weighted_bound_monitor(s)
    assert rep.chain_ok
    assert not rep.growth_flag


def test_weighted_monitor_growth_flag():
    t = np.linspace(0.0, 1.0, 30)
    w = 1.0 + 4.0 * t
    s = synthetic_series(t, np.ones_like(t), weighted=w)
    assert weighted_bound_monitor(s).growth_flag


def test_norm_series_validation():
    s = NormSeries()
    s.append(0.0, 0, 0, 1, 1, 1, [], 1, 1)
    with pytest.raises(ValueError):
        s.append(0.0, 0, 0, 1, 1, 1, [], 1, 1)
    assert s.m_sup == [1.0]


# ---------------------------------------------------------------------------
# Frequency-split inequality along a real run


@pytest.fixture(scope="module")
def frac_odd_short_run():
    import warnings
    from frontlab import (StepperConfig, certify_front, evolve,
                          front_for_operator, make_perturbation, preset)

    grid = make_grid(1024, 80.0)
    spec = preset("frac", terms=[(1.0, 0.5)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        front = front_for_operator(spec, grid)
        cert = certify_front(front)
        v0 = make_perturbation("odd_gaussian_derivative", 0.6, 2.0, grid)
        cfg = StepperConfig(dt=2e-3, t_end=30.0, record_every=25,
                            snapshot_every=500)
        traj = evolve(v0, front, spec, cfg, certificate=cert)
    return traj, lp_norm(v0, 1)


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_frequency_split_groenwall_chain(frac_odd_short_run, eps):
    """I_high(t) <= I(0) exp(-C_fit (2 pi eps)^2 t) + max_{s<=t} I_low(s),
    with C_fit taken from the energy audit of the same run."""
    traj, _ = frac_odd_short_run
    c_fit = check_energy_inequality(traj.series).c_fit
    split = frequency_split_series(traj.snapshots, eps)
    i0 = split.i_low[0] + split.i_high[0]
    k_eps = 2.0 * np.pi * eps
    running_low = np.maximum.accumulate(split.i_low)
    bound = i0 * np.exp(-c_fit * k_eps ** 2 * split.t) + running_low
    slack = split.i_high - bound
    assert np.max(slack) <= 1e-12 * i0


def test_low_band_bounded_by_initial_mass(frac_odd_short_run):
    """Odd fractional run: I_low(t) <= 2 eps ||v0||_1^2 via L1 contraction."""
    traj, l1_0 = frac_odd_short_run
    for eps in (0.05, 0.1, 0.2):
        split = frequency_split_series(traj.snapshots, eps)
        assert np.max(split.i_low) <= 2.0 * eps * l1_0 ** 2 * (1.0 + 1e-8)
        assert split.bernstein_slack <= 1e-12
