"""Command-line pipeline: front -> certify -> simulate -> oracle -> rates.

Exit codes: 0 success, 1 usage or input error, 2 certification or
verification failure, 3 numerical instability.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .certify import (CertificationError, certify_front, sweep_nu,
                      DEFAULT_EPS_SAMPLES)
from .config import RunConfig, operator_from_config
from .diagnostics import (check_energy_inequality, compare_to_theorem,
                          fit_rate, predicted_rate, weighted_bound_monitor)
from .evolution import (StabilityError, StepperConfig, cole_hopf_exact, evolve,
                     make_perturbation)
from .fronts import (FrontError, closed_form_burgers, front_for_operator,
                     newton_front, shoot_local_front)
from .runio import (RunWriter, read_profile, read_series_csv, write_profile,
                    write_certificate, write_sweep_csv)
from .spectral import Field, lp_norm, make_grid, trig_interpolate
from .symbols import SymbolError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CERTIFICATION = 2
EXIT_INSTABILITY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_operator_flags(p):
    p.add_argument("--preset", default=None,
                   help="burgers | kdvb | bo | hilbert | frac")
    p.add_argument("--nu", type=float, default=None, help="kdvb coefficient")
    p.add_argument("--terms", default=None,
                   help="fractional terms a:alpha[,a:alpha...]")
    p.add_argument("--operator", default=None, dest="expression",
                   help="symbol expression l(k), e.g. '-0.1*(i*k)^3'")
    p.add_argument("--n", type=int, default=1024, help="grid points (power of two)")
    p.add_argument("--length", type=float, default=80.0, help="domain length")


def _config_from_args(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = RunConfig.from_ini(Path(args.config).read_text())
    else:
        cfg = RunConfig()
    for name in ("preset", "nu", "expression"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "terms", None):
        cfg.terms = tuple(tuple(float(x) for x in pair.split(":"))
                          for pair in args.terms.split(","))
    if getattr(args, "n", None):
        cfg.n = args.n
    if getattr(args, "length", None):
        cfg.length = args.length
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.directory = args.out
    return cfg


def _solve_front(cfg: RunConfig, method: str | None = None):
    spec = operator_from_config(cfg)
    grid = make_grid(cfg.n, cfg.length)
    method = method or cfg.front_method
    if method == "closed_form":
        return closed_form_burgers(grid)
    if method == "shooting":
        if cfg.nu is None:
            raise FrontError("shooting requires the kdvb preset with --nu")
        return shoot_local_front(cfg.nu, grid, tol=cfg.front_tol)
    if method == "newton":
        return newton_front(spec, grid, tol=cfg.front_tol)
    return front_for_operator(spec, grid, tol=cfg.front_tol)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_front(args) -> int:
    cfg = _config_from_args(args)
    cfg.front_tol = args.tol
    front = _solve_front(cfg, args.method)
    base = Path(args.out or "profile")
    write_profile(base, front)
    hyp = front.hypothesis
    monotone = float(np.max(front.phi_prime.values)) <= 1e-10
    print(f"operator      {front.operator.label}")
    print(f"method        {front.method}")
    print(f"residual_sup  {front.residual_sup:.3e}")
    print(f"endpoints     ({front.endpoints[0]:g}, {front.endpoints[1]:g})")
    print(f"monotone      {monotone}")
    print(f"|phi'|_2      {hyp.phi_prime_l2:.6f}")
    print(f"|phi''|_2     {hyp.phi_second_l2:.6f}")
    print(f"first moment  {hyp.first_moment:.6f} (tail share {hyp.tail_fraction:.2e})")
    print(f"edge |phi'|   {hyp.edge_derivative:.2e}")
    print(f"saved         {base}.csv, {base}.json")
    return EXIT_OK


def _parse_sweep_range(text: str) -> list[float]:
    start, stop, step = (float(x) for x in text.split(":"))
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def cmd_certify(args) -> int:
    eps = tuple(float(e) for e in args.eps.split(",")) if args.eps \
        else DEFAULT_EPS_SAMPLES
    if args.sweep_nu:
        values = _parse_sweep_range(args.sweep_nu)
        rows, threshold = sweep_nu(values, eps_samples=eps, m=args.fd_points,
                                   threads=args.threads)
        out = Path(args.out or "sweep.csv")
        write_sweep_csv(out, rows)
        for r in rows:
            note = f"  [{r.error}]" if r.error else ""
            print(f"nu={r.nu:8.3f}  satisfied={str(r.satisfied):5s} "
                  f"min_count={r.min_count}  argmin_eps={r.argmin_eps:g}{note}")
        print(f"threshold estimate: largest satisfied |nu| = {threshold:g}")
        print(f"saved {out}")
        return EXIT_OK if any(not r.error for r in rows) else EXIT_USAGE

    if args.profile:
        try:
            front = read_profile(args.profile)
        except FileNotFoundError:
            print(f"profile not found: {args.profile}", file=sys.stderr)
            return EXIT_USAGE
    else:
        cfg = _config_from_args(args)
        front = _solve_front(cfg)
    try:
        cert = certify_front(front, eps_samples=eps, m=args.fd_points)
    except CertificationError as exc:
        print(f"unresolved certificate: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    out = Path(args.out or "certificate.json")
    write_certificate(out, cert)
    for e, c, flag in zip(cert.eps_samples, cert.counts, cert.near_zero_flags):
        mark = "  (near-zero eigenvalue)" if flag else ""
        ref = "  [reference]" if e == 0.0 else ""
        print(f"eps={e:4.2f}  negative eigenvalues: {c}{mark}{ref}")
    print(f"satisfied: {cert.satisfied}  (saved {out})")
    return EXIT_OK if cert.satisfied else EXIT_CERTIFICATION


def _run_pipeline(cfg: RunConfig) -> tuple[int, dict]:
    spec = operator_from_config(cfg)
    grid = make_grid(cfg.n, cfg.length)
    front = _solve_front(cfg)
    cert = None
    try:
        cert = certify_front(front, eps_samples=cfg.eps_samples, m=cfg.fd_points)
    except CertificationError as exc:
        print(f"warning: certificate unresolved ({exc})", file=sys.stderr)
    v0 = make_perturbation(cfg.kind, cfg.amplitude, cfg.width, grid, cfg.seed)
    stepper_cfg = StepperConfig(
        dt=cfg.dt, t_end=cfg.t_end, scheme=cfg.scheme, gamma=cfg.gamma,
        dealias=cfg.dealias, record_every=cfg.record_every,
        snapshot_every=cfg.snapshot_every, p_list=cfg.p_list,
    )
    writer = RunWriter(cfg.directory)
    writer.write_config_snapshot(cfg.snapshot())
    writer.write_front(front)
    if cert is not None:
        writer.write_certificate(cert)

    status = EXIT_OK
    try:
        traj = evolve(v0, front, spec, stepper_cfg, certificate=cert)
    except StabilityError as exc:
        print(f"instability abort: {exc}", file=sys.stderr)
        traj = getattr(exc, "partial", None)
        status = EXIT_INSTABILITY
    summary = {}
    if traj is not None:
        writer.write_series(traj.series)
        for t, f in traj.snapshots:
            writer.write_snapshot(t, f)
        summary = {
            "monotonicity_violations": traj.monotonicity_violations,
            "max_relative_uptick": traj.max_uptick,
            "boundary_warnings": traj.boundary_warnings,
            "x0_final": traj.x0_final,
            "l2_initial": traj.series.l2[0],
            "l2_final": traj.series.l2[-1],
            "aborted": traj.aborted,
        }
        try:
            energy = check_energy_inequality(traj.series)
            summary["energy_c_fit"] = energy.c_fit
            summary["energy_violations"] = energy.violations
        except ValueError:
            pass
        weighted = weighted_bound_monitor(traj.series)
        summary["weighted_sup_sq"] = weighted.sup_weighted_sq
        summary["cumulative_l2_sq"] = weighted.cumulative_l2_sq
    writer.finalize(
        version=__version__,
        operator=spec.label,
        grid={"n": grid.n, "length": grid.length},
        certificate_satisfied=None if cert is None else cert.satisfied,
        front_residual=front.residual_sup,
        summary=summary,
        model=cfg.model,
        p_list=list(cfg.p_list),
        fit_window=list(cfg.window()),
        delta=cfg.delta,
    )
    return status, summary


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    status, summary = _run_pipeline(cfg)
    if summary:
        print(f"run directory          {cfg.directory}")
        print(f"monotonicity           {summary['monotonicity_violations']} violations "
              f"(max uptick {summary['max_relative_uptick']:.2e})")
        if "energy_c_fit" in summary:
            print(f"energy inequality      C_fit = {summary['energy_c_fit']:.4f}, "
                  f"{summary['energy_violations']} violations")
        print(f"||v||_2                {summary['l2_initial']:.6g} -> "
              f"{summary['l2_final']:.6g}")
        print(f"x0(t_end)              {summary['x0_final']:.6g}")
    return status


def cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    spec = operator_from_config(cfg)
    if not spec.is_zero:
        print("the exact solution applies to the pure Burgers case only "
              "(operator must be 0)", file=sys.stderr)
        return EXIT_USAGE
    grid = make_grid(cfg.n, cfg.length)
    front = _solve_front(cfg, "closed_form")
    v0 = make_perturbation(cfg.kind, cfg.amplitude, cfg.width, grid, cfg.seed)
    u0 = Field(grid, front.phi.values + v0.values)
    times = sorted(float(t) for t in args.times.split(","))
    worst = 0.0
    for t in times:
        steps = max(1, int(round(t / cfg.dt)))
        run_cfg = StepperConfig(dt=t / steps, t_end=t, scheme=cfg.scheme,
                                gamma=cfg.gamma, dealias=cfg.dealias,
                                record_every=steps, snapshot_every=steps,
                                p_list=())
        traj = evolve(v0, front, spec, run_cfg)
        _, vf = traj.snapshots[-1]
        y = grid.x - traj.x0_final
        u_num = front.phi_at(y) + trig_interpolate(grid, vf.values, y)
        exact = cole_hopf_exact(u0, t)
        err = float(np.max(np.abs(u_num - exact.values)))
        worst = max(worst, err)
        print(f"t={t:g}  sup discrepancy {err:.3e}")
    if worst > args.threshold:
        print(f"discrepancy {worst:.3e} exceeds threshold {args.threshold:g}",
              file=sys.stderr)
        return EXIT_CERTIFICATION
    return EXIT_OK


def cmd_rates(args) -> int:
    run_dir = Path(args.run)
    series_path = run_dir / "series.csv"
    if not series_path.exists():
        print(f"missing series: {series_path}", file=sys.stderr)
        return EXIT_USAGE
    series = read_series_csv(series_path)
    meta = {}
    meta_path = run_dir / "meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    model = args.model or meta.get("model") or ""
    if not model:
        print("no theorem model given (use --model kdvb|frac_odd)",
              file=sys.stderr)
        return EXIT_USAGE
    p_list = ([_parse_p(p) for p in args.p_list.split(",")] if args.p_list
              else meta.get("p_list", [2.0]) + (["derivative"]
                                                if model == "frac_odd" else []))
    if 2.0 not in [p for p in p_list if p != "derivative"]:
        p_list = [2.0] + p_list
    window = (tuple(float(w) for w in args.window.split(","))
              if args.window else tuple(meta.get("fit_window",
                                                 (series.t[-1] / 4, series.t[-1]))))
    delta = args.delta if args.delta is not None else meta.get("delta", 0.05)
    verdicts = compare_to_theorem(series, model, p_list, window, delta=delta)
    print(f"model {model}, window [{window[0]:g}, {window[1]:g}], delta {delta:g}")
    print(f"{'p':>12} {'rate':>7} {'beta':>6} {'envelope':>9} {'fitted':>8}  verdict")
    for v in verdicts:
        print(f"{str(v.p):>12} {v.rate:7.4f} {v.beta:6.3f} {v.ratio:9.3f} "
              f"{v.fitted_exponent:8.3f}  "
              f"{'bound satisfied' if v.satisfied else 'VIOLATED'}")
    out = run_dir / "verdicts.csv"
    with open(out, "w") as fh:
        fh.write("p,rate,beta,envelope_ratio,fitted_exponent,satisfied\n")
        for v in verdicts:
            fh.write(f"{v.p},{v.rate!r},{v.beta!r},{v.ratio!r},"
                     f"{v.fitted_exponent!r},{int(v.satisfied)}\n")
    if args.svg:
        from .svgplot import write_loglog_svg
        t = series.column("t")
        mask = t > 0
        curves, guides = [], []
        for v in verdicts:
            if v.p == "derivative":
                norm = series.column("dv_l2")
            elif v.p == 2.0:
                norm = series.column("l2")
            elif np.isinf(float(v.p)):
                norm = series.column("linf")
            else:
                norm = series.column(f"lp:{float(v.p)}")
            curves.append((f"p={v.p}", t[mask], norm[mask]))
            i0 = np.argmin(np.abs(t - window[0]))
            guides.append((f"slope -{v.rate:g}", -v.rate, t[i0],
                           max(norm[i0], 1e-300)))
        write_loglog_svg(args.svg, curves, guides,
                         title=f"decay vs predictions ({model})")
        print(f"saved {args.svg}")
    print(f"saved {out}")
    return EXIT_OK if all(v.satisfied for v in verdicts) else EXIT_CERTIFICATION


def _parse_p(text: str):
    text = text.strip()
    if text == "derivative":
        return "derivative"
    if text in ("inf", "oo"):
        return np.inf
    return float(text)


_OVERRIDE_MAP = {
    "operator.preset": "preset", "operator.nu": "nu",
    "operator.terms": "terms", "operator.expression": "expression",
    "grid.n": "n", "grid.length": "length",
    "front.method": "front_method", "front.tol": "front_tol",
    "perturbation.kind": "kind", "perturbation.amplitude": "amplitude",
    "perturbation.width": "width", "perturbation.seed": "seed",
    "stepper.scheme": "scheme", "stepper.dt": "dt", "stepper.gamma": "gamma",
    "stepper.t_end": "t_end", "stepper.record_every": "record_every",
    "stepper.snapshot_every": "snapshot_every",
    "diagnostics.delta": "delta", "diagnostics.model": "model",
}


def _simulate_worker(snapshot: dict) -> tuple[str, int, dict]:
    cfg = RunConfig.from_snapshot(snapshot)
    status, summary = _run_pipeline(cfg)
    return cfg.directory, status, summary


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    key, _, values = args.set.partition("=")
    attr = _OVERRIDE_MAP.get(key.strip())
    if attr is None:
        print(f"unknown sweep key {key!r}", file=sys.stderr)
        return EXIT_USAGE
    base_dir = Path(args.out or "sweep_runs")
    current = getattr(cfg, attr)
    jobs = []
    for raw in values.split(","):
        raw = raw.strip()
        if isinstance(current, bool):
            value = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float) or current is None:
            value = float(raw)
        else:
            value = raw
        sub = RunConfig.from_snapshot(cfg.snapshot())
        setattr(sub, attr, value)
        sub.directory = str(base_dir / f"{attr}_{raw}")
        jobs.append(sub.snapshot())

    results = []
    if args.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(args.threads) as pool:
            results = list(pool.map(_simulate_worker, jobs))
    else:
        results = [_simulate_worker(j) for j in jobs]

    base_dir.mkdir(parents=True, exist_ok=True)
    with open(base_dir / "summary.csv", "w") as fh:
        fh.write("directory,status,monotonicity_violations,l2_final\n")
        for directory, status, summary in results:
            fh.write(f"{directory},{status},"
                     f"{summary.get('monotonicity_violations', '')},"
                     f"{summary.get('l2_final', '')}\n")
    worst = max((status for _, status, _ in results), default=0)
    print(f"{len(results)} runs under {base_dir} (worst exit {worst})")
    return worst


def main(argv=None) -> int:
    parser = _Parser(prog="frontlab",
                     description="Front construction, certification, and "
                                 "perturbation dynamics for dispersive-"
                                 "diffusive Burgers equations")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("front", help="solve a steady front profile")
    _add_operator_flags(p)
    p.add_argument("--method", default=None,
                   choices=["auto", "closed_form", "shooting", "newton"])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None, help="output base path")
    p.set_defaults(func=cmd_front)

    p = sub.add_parser("certify", help="count negative eigenvalues of the "
                                       "front's Schrodinger operators")
    _add_operator_flags(p)
    p.add_argument("--profile", default=None, help="existing profile base path")
    p.add_argument("--eps", default=None, help="comma list of eps samples")
    p.add_argument("--fd-points", type=int, default=2000)
    p.add_argument("--sweep-nu", default=None, metavar="START:STOP:STEP")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="evolve a perturbation and persist "
                                        "the run directory")
    p.add_argument("--config", required=True, help="INI configuration file")
    p.add_argument("--out", default=None, help="override output directory")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="compare the solver against the exact "
                                      "pure-Burgers solution")
    _add_operator_flags(p)
    p.add_argument("--config", default=None)
    p.add_argument("--times", default="1.0", help="comma list of times")
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("rates", help="fit decay exponents and check them "
                                     "against the predicted bounds")
    p.add_argument("--run", required=True, help="run directory")
    p.add_argument("--model", default=None, choices=["kdvb", "frac_odd"])
    p.add_argument("--p-list", default=None,
                   help="comma list of p values (also: inf, derivative)")
    p.add_argument("--window", default=None, help="fit window t_min,t_max")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--svg", default=None, help="write a log-log SVG plot")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sweep", help="run simulate over a list of parameter "
                                     "values, one directory per run")
    p.add_argument("--config", required=True)
    p.add_argument("--set", required=True, metavar="SECTION.KEY=V1,V2,...")
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SymbolError, FrontError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StabilityError as exc:
        print(f"instability: {exc}", file=sys.stderr)
        return EXIT_INSTABILITY


if __name__ == "__main__":
    sys.exit(main())
