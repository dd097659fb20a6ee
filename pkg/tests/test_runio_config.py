import numpy as np
import pytest

from frontlab import Field, NormSeries, RunConfig, make_grid, preset
from frontlab.config import operator_from_config
from frontlab.runio import (read_certificate, read_field_binary,
                            read_field_csv, read_profile, read_series_csv,
                            write_certificate, write_field_binary,
                            write_field_csv, write_profile, write_series_csv)


@pytest.fixture
def sample_field():
    g = make_grid(64, 16.0)
    rng = np.random.default_rng(0)
    return Field(g, rng.standard_normal(g.n))


def test_field_csv_round_trip(tmp_path, sample_field):
    path = tmp_path / "field.csv"
    write_field_csv(path, sample_field)
    again = read_field_csv(path)
    assert again.grid == sample_field.grid
    assert np.array_equal(again.values, sample_field.values)


def test_field_binary_round_trip(tmp_path, sample_field):
    path = tmp_path / "field.fbin"
    write_field_binary(path, sample_field)
    again = read_field_binary(path)
    assert again.grid == sample_field.grid
    assert np.array_equal(again.values, sample_field.values)
    # header layout: int64 count, float64 length, little endian
    raw = path.read_bytes()
    assert len(raw) == 16 + 8 * sample_field.grid.n
    assert int.from_bytes(raw[:8], "little") == sample_field.grid.n


def test_field_binary_truncation_detected(tmp_path, sample_field):
    path = tmp_path / "field.fbin"
    write_field_binary(path, sample_field)
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(ValueError, match="truncated"):
        read_field_binary(path)


def test_profile_round_trip(tmp_path, burgers_front):
    base = tmp_path / "prof"
    write_profile(base, burgers_front)
    again = read_profile(base)
    assert np.array_equal(again.phi.values, burgers_front.phi.values)
    assert np.array_equal(again.phi_prime.values, burgers_front.phi_prime.values)
    assert again.endpoints == burgers_front.endpoints
    assert again.residual_sup == burgers_front.residual_sup
    assert again.method == burgers_front.method
    assert again.operator.is_zero


def test_profile_round_trip_with_params(tmp_path, kdvb_front):
    base = tmp_path / "prof"
    write_profile(base, kdvb_front)
    again = read_profile(base)
    assert again.operator.params["nu"] == pytest.approx(-6.0 / 25.0)
    ks = np.linspace(-10, 10, 41)
    assert np.max(np.abs(again.operator.values(ks)
                         - kdvb_front.operator.values(ks))) <= 1e-13


def test_certificate_round_trip(tmp_path, burgers_cert):
    path = tmp_path / "cert.json"
    write_certificate(path, burgers_cert)
    assert read_certificate(path) == burgers_cert


def test_series_round_trip(tmp_path):
    s = NormSeries(p_list=(1.5, 4.0))
    rng = np.random.default_rng(1)
    for i in range(12):
        s.append(0.1 * i, rng.random(), rng.random(), 1.0 + i, 2.0 + i,
                 3.0 + i, [4.0 + i, 5.0 + i], 6.0 + i, 7.0 + i)
    path = tmp_path / "series.csv"
    write_series_csv(path, s)
    again = read_series_csv(path)
    assert again.p_list == (1.5, 4.0)
    for name in ("t", "x0", "x0_dot", "l1", "l2", "linf", "dv_l2",
                 "weighted", "m_sup"):
        assert np.array_equal(again.column(name), s.column(name))
    assert np.array_equal(again.column("lp:4.0"), s.column("lp:4.0"))


def test_config_ini_round_trip():
    cfg = RunConfig(preset="frac", terms=((1.0, 0.5), (0.25, 0.75)),
                    n=2048, length=160.0, kind="odd_gaussian_derivative",
                    amplitude=0.35, seed=7, dt=1e-3, t_end=12.5,
                    p_list=(1.5, 3.0), model="frac_odd",
                    fit_window=(5.0, 12.5), directory="runs/frac")
    text = cfg.to_ini()
    again = RunConfig.from_ini(text)
    assert again == cfg
    # canonical text is a fixed point
    assert again.to_ini() == text


def test_config_snapshot_round_trip():
    cfg = RunConfig(preset="kdvb", nu=-0.24, snapshot_every=100)
    assert RunConfig.from_snapshot(cfg.snapshot()) == cfg


def test_operator_from_config_variants():
    assert operator_from_config(RunConfig(preset="burgers")).is_zero
    spec = operator_from_config(RunConfig(preset="kdvb", nu=0.3))
    assert spec.params["nu"] == 0.3
    spec = operator_from_config(RunConfig(expression="i*sgn(k)"))
    assert spec.values(2.0) == pytest.approx(1j)
    spec = operator_from_config(RunConfig(preset="frac", terms=((1.0, 0.5),)))
    assert spec.values(2.0) == pytest.approx(-2.0)
