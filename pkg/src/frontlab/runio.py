"""Serialization: fields, profiles, certificates, series, run directories.

Floats are written with repr (shortest round-trip form), so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .certify import SpectralCertificate
from .diagnostics import NormSeries
from .fronts import FrontProfile, HypothesisReport
from .spectral import Field, make_grid
from .symbols import MultiplierSpec, spec_from_text

__all__ = [
    "write_field_csv", "read_field_csv",
    "write_field_binary", "read_field_binary",
    "write_profile", "read_profile",
    "write_certificate", "read_certificate",
    "write_sweep_csv",
    "write_series_csv", "read_series_csv",
    "RunWriter",
]

_BIN_HEADER = struct.Struct("<qd")


def write_field_csv(path, field: Field):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(field.grid.x, field.values):
            writer.writerow([repr(float(x)), repr(float(v))])


def read_field_csv(path) -> Field:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    x, values = data[:, 0], data[:, 1]
    n = x.size
    h = x[1] - x[0]
    grid = make_grid(n, float(n * h))
    return Field(grid, values)


def write_field_binary(path, field: Field):
    with open(path, "wb") as fh:
        fh.write(_BIN_HEADER.pack(field.grid.n, field.grid.length))
        fh.write(field.values.astype("<f8").tobytes())


def read_field_binary(path) -> Field:
    with open(path, "rb") as fh:
        n, length = _BIN_HEADER.unpack(fh.read(_BIN_HEADER.size))
        values = np.frombuffer(fh.read(8 * n), dtype="<f8")
    if values.size != n:
        raise ValueError("truncated field file")
    return Field(make_grid(n, length), values.copy())


def write_profile(base, profile: FrontProfile):
    """Persist a front as <base>.csv (x, phi, phi') plus a <base>.json sidecar."""
    base = Path(base)
    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "phi", "phi_prime"])
        for x, p, dp in zip(profile.grid.x, profile.phi.values,
                            profile.phi_prime.values):
            writer.writerow([repr(float(x)), repr(float(p)), repr(float(dp))])
    sidecar = {
        "operator": profile.operator.text,
        "label": profile.operator.label,
        "params": _jsonable(profile.operator.params),
        "endpoints": list(profile.endpoints),
        "residual_sup": _float_or_nan(profile.residual_sup),
        "method": profile.method,
        "exact": profile.exact,
        "grid": {"n": profile.grid.n, "length": profile.grid.length},
        "hypothesis": asdict(profile.hypothesis),
    }
    with open(base.with_suffix(".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_profile(base) -> FrontProfile:
    base = Path(base)
    with open(base.with_suffix(".json")) as fh:
        meta = json.load(fh)
    with open(base.with_suffix(".csv"), newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b), float(c)] for a, b, c in rows[1:]])
    grid = make_grid(meta["grid"]["n"], meta["grid"]["length"])
    spec = spec_from_text(meta["operator"], meta["label"])
    if meta.get("params"):
        spec = MultiplierSpec(expr=spec.expr, label=spec.label,
                              admissibility=spec.admissibility,
                              params=_params_from_json(meta["params"]))
    return FrontProfile(
        grid=grid,
        phi=Field(grid, data[:, 1]),
        phi_prime=Field(grid, data[:, 2]),
        endpoints=tuple(meta["endpoints"]),
        operator=spec,
        residual_sup=meta["residual_sup"] if meta["residual_sup"] is not None
        else float("nan"),
        hypothesis=HypothesisReport(**meta["hypothesis"]),
        method=meta["method"],
        exact=meta.get("exact", True),
    )


def _jsonable(params: dict):
    out = {}
    for key, value in params.items():
        if key == "terms":
            out[key] = [list(t) for t in value]
        else:
            out[key] = value
    return out


def _params_from_json(raw: dict):
    out = dict(raw)
    if "terms" in out:
        out["terms"] = [tuple(t) for t in out["terms"]]
    return out


def _float_or_nan(x):
    x = float(x)
    return None if np.isnan(x) else x


def write_certificate(path, cert: SpectralCertificate):
    with open(path, "w") as fh:
        fh.write(cert.to_json())
        fh.write("\n")


def read_certificate(path) -> SpectralCertificate:
    with open(path) as fh:
        return SpectralCertificate.from_json(fh.read())


def write_sweep_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["nu", "satisfied", "min_count", "argmin_eps", "error"])
        for r in rows:
            writer.writerow([repr(r.nu), int(r.satisfied), r.min_count,
                             repr(r.argmin_eps), r.error])


def _series_header(series: NormSeries):
    return (["t", "x0", "x0_dot", "l1", "l2", "linf"]
            + [f"lp_{p:g}" for p in series.p_list]
            + ["dv_l2", "weighted", "m_sup"])


def write_series_csv(path, series: NormSeries):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_series_header(series))
        for i in range(len(series)):
            row = [series.t[i], series.x0[i], series.x0_dot[i],
                   series.l1[i], series.l2[i], series.linf[i]]
            row += [series.lp[p][i] for p in series.p_list]
            row += [series.dv_l2[i], series.weighted[i], series.m_sup[i]]
            writer.writerow([repr(float(v)) for v in row])


def read_series_csv(path) -> NormSeries:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    p_list = tuple(float(name[3:]) for name in header if name.startswith("lp_"))
    series = NormSeries(p_list=p_list)
    for row in rows[1:]:
        vals = [float(v) for v in row]
        base = 6
        series.append(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5],
                      vals[base:base + len(p_list)],
                      vals[base + len(p_list)], vals[base + len(p_list) + 1])
    return series


class RunWriter:
    """Materializes a run directory:

    config.snapshot   JSON image of the configuration
    profile.csv/json  the front used
    certificate.json  its spectral certificate (when computed)
    series.csv        norm time series
    fields/t_<stamp>.csv  field snapshots
    meta.json         versions, grid, flags, summaries
    """

    def __init__(self, directory):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / "fields").mkdir(exist_ok=True)
        self.meta = {}

    def write_config_snapshot(self, payload: dict):
        with open(self.dir / "config.snapshot", "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_front(self, profile: FrontProfile):
        write_profile(self.dir / "profile", profile)

    def write_certificate(self, cert: SpectralCertificate):
        write_certificate(self.dir / "certificate.json", cert)

    def write_snapshot(self, t: float, field: Field):
        write_field_csv(self.dir / "fields" / f"t_{t:014.6f}.csv", field)

    def write_series(self, series: NormSeries):
        write_series_csv(self.dir / "series.csv", series)

    def finalize(self, **meta):
        self.meta.update(meta)
        with open(self.dir / "meta.json", "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
