"""Run configuration: flat INI-style text with [section] headers.

Every key mirrors a CLI flag; a config round-trips bit-identically
through to_ini/from_ini once in canonical form.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass

from .symbols import MultiplierSpec, preset, spec_from_text

__all__ = ["RunConfig", "operator_from_config"]


@dataclass
class RunConfig:
    # operator
    preset: str = "burgers"
    nu: float | None = None
    terms: tuple = ()            # ((a, alpha), ...) for the fractional preset
    expression: str = ""         # overrides preset when nonempty
    # grid
    n: int = 1024
    length: float = 80.0
    # front
    front_method: str = "auto"   # auto|closed_form|shooting|newton
    front_tol: float = 1e-8
    # certificate
    eps_samples: tuple = (0.01, 0.05, 0.1, 0.2, 0.4, 0.8)
    fd_points: int = 2000
    # perturbation
    kind: str = "gaussian"
    amplitude: float = 0.5
    width: float = 1.0
    seed: int = 0
    # stepper
    scheme: str = "etdrk4"
    dt: float = 2e-3
    gamma: float = 1.1
    dealias: bool = True
    t_end: float = 50.0
    record_every: int = 25
    snapshot_every: int = 0
    # diagnostics
    p_list: tuple = (1.5, 3.0, 4.0)
    fit_window: tuple = ()       # empty -> (t_end/4, t_end)
    delta: float = 0.05
    model: str = ""              # kdvb|frac_odd|empty
    # output
    directory: str = "run"

    def window(self) -> tuple[float, float]:
        if self.fit_window:
            return tuple(self.fit_window)
        return (self.t_end / 4.0, self.t_end)

    # -- serialization ----------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["operator"] = {}
        if self.expression:
            cp["operator"]["expression"] = self.expression
        else:
            cp["operator"]["preset"] = self.preset
            if self.nu is not None:
                cp["operator"]["nu"] = repr(self.nu)
            if self.terms:
                cp["operator"]["terms"] = ",".join(
                    f"{a!r}:{al!r}" for a, al in self.terms)
        cp["grid"] = {"n": str(self.n), "length": repr(self.length)}
        cp["front"] = {"method": self.front_method, "tol": repr(self.front_tol)}
        cp["certificate"] = {
            "eps": ",".join(repr(e) for e in self.eps_samples),
            "fd_points": str(self.fd_points),
        }
        cp["perturbation"] = {
            "kind": self.kind,
            "amplitude": repr(self.amplitude),
            "width": repr(self.width),
            "seed": str(self.seed),
        }
        cp["stepper"] = {
            "scheme": self.scheme,
            "dt": repr(self.dt),
            "gamma": repr(self.gamma),
            "dealias": "true" if self.dealias else "false",
            "t_end": repr(self.t_end),
            "record_every": str(self.record_every),
            "snapshot_every": str(self.snapshot_every),
        }
        cp["diagnostics"] = {
            "p_list": ",".join(repr(p) for p in self.p_list),
            "delta": repr(self.delta),
        }
        if self.fit_window:
            cp["diagnostics"]["fit_window"] = ",".join(
                repr(w) for w in self.fit_window)
        if self.model:
            cp["diagnostics"]["model"] = self.model
        cp["output"] = {"directory": self.directory}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @staticmethod
    def from_ini(text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        cfg = RunConfig()
        op = cp["operator"] if cp.has_section("operator") else {}
        cfg.expression = op.get("expression", "")
        cfg.preset = op.get("preset", cfg.preset)
        cfg.nu = float(op["nu"]) if "nu" in op else None
        if "terms" in op:
            cfg.terms = tuple(
                tuple(float(x) for x in pair.split(":"))
                for pair in op["terms"].split(",") if pair
            )
        if cp.has_section("grid"):
            cfg.n = cp.getint("grid", "n", fallback=cfg.n)
            cfg.length = cp.getfloat("grid", "length", fallback=cfg.length)
        if cp.has_section("front"):
            cfg.front_method = cp.get("front", "method", fallback=cfg.front_method)
            cfg.front_tol = cp.getfloat("front", "tol", fallback=cfg.front_tol)
        if cp.has_section("certificate"):
            if cp.get("certificate", "eps", fallback=""):
                cfg.eps_samples = tuple(
                    float(e) for e in cp.get("certificate", "eps").split(","))
            cfg.fd_points = cp.getint("certificate", "fd_points",
                                      fallback=cfg.fd_points)
        if cp.has_section("perturbation"):
            sec = cp["perturbation"]
            cfg.kind = sec.get("kind", cfg.kind)
            cfg.amplitude = float(sec.get("amplitude", cfg.amplitude))
            cfg.width = float(sec.get("width", cfg.width))
            cfg.seed = int(sec.get("seed", cfg.seed))
        if cp.has_section("stepper"):
            sec = cp["stepper"]
            cfg.scheme = sec.get("scheme", cfg.scheme)
            cfg.dt = float(sec.get("dt", cfg.dt))
            cfg.gamma = float(sec.get("gamma", cfg.gamma))
            cfg.dealias = sec.get("dealias", "true").lower() in ("true", "1", "yes")
            cfg.t_end = float(sec.get("t_end", cfg.t_end))
            cfg.record_every = int(sec.get("record_every", cfg.record_every))
            cfg.snapshot_every = int(sec.get("snapshot_every", cfg.snapshot_every))
        if cp.has_section("diagnostics"):
            sec = cp["diagnostics"]
            if sec.get("p_list", ""):
                cfg.p_list = tuple(float(p) for p in sec["p_list"].split(","))
            cfg.delta = float(sec.get("delta", cfg.delta))
            if sec.get("fit_window", ""):
                cfg.fit_window = tuple(
                    float(w) for w in sec["fit_window"].split(","))
            cfg.model = sec.get("model", cfg.model)
        if cp.has_section("output"):
            cfg.directory = cp.get("output", "directory", fallback=cfg.directory)
        return cfg

    def snapshot(self) -> dict:
        payload = asdict(self)
        payload["terms"] = [list(t) for t in self.terms]
        payload["eps_samples"] = list(self.eps_samples)
        payload["p_list"] = list(self.p_list)
        payload["fit_window"] = list(self.fit_window)
        return payload

    @staticmethod
    def from_snapshot(payload: dict) -> "RunConfig":
        data = dict(payload)
        data["terms"] = tuple(tuple(t) for t in data.get("terms", ()))
        data["eps_samples"] = tuple(data.get("eps_samples", ()))
        data["p_list"] = tuple(data.get("p_list", ()))
        data["fit_window"] = tuple(data.get("fit_window", ()))
        return RunConfig(**data)


def operator_from_config(cfg: RunConfig) -> MultiplierSpec:
    if cfg.expression:
        return spec_from_text(cfg.expression)
    if cfg.preset == "kdvb":
        return preset("kdvb", nu=cfg.nu)
    if cfg.preset == "frac":
        return preset("frac", terms=list(cfg.terms))
    return preset(cfg.preset)
