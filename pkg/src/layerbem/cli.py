"""Command-line experiment harness.

Subcommands: cases, solve, radial-sweep, optimize, adapt.  Each run writes
delimited CSV outputs, a key=value manifest that fully reconstructs the run,
and rendered figures alongside the CSVs.  All numbers are serialized with 17
significant digits so repeated runs diff byte-identically.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .adapt import AdaptSchedule, adapt_loop
from .analytic import (LayerConfig, eval_analytic, solve_mode_coefficients,
                       sound_hard_coefficients)
from .cases import CASES, CaseSpec, get_case
from .errors import boundary_l2_error, default_radii, radial_l2_error
from .search import SearchSchedule, find_optimal_M
from .solver import classify_points, eval_field, solve_config
from . import plots


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_manifest(out: Path, command: str, args: argparse.Namespace,
                   outputs: list[str]) -> Path:
    path = out / f"{command.replace('-', '_')}_manifest.txt"
    skip = {"func", "out"}
    with open(path, "w") as f:
        f.write(f"command={command}\n")
        f.write(f"tool_version={__version__}\n")
        f.write("determinism=seedless; reruns are byte-identical\n")
        for key, val in sorted(vars(args).items()):
            if key in skip or val is None:
                continue
            if isinstance(val, (list, tuple)):
                val = " ".join(_fmt(v) for v in val)
            f.write(f"{key}={_fmt(val)}\n")
        for o in outputs:
            f.write(f"output={o}\n")
    return path


def _resolve_config(args) -> tuple[LayerConfig, str]:
    if args.case:
        spec = get_case(args.case)
        cfg = spec.config(star_a=args.star_a, star_n=args.star_n)
        return cfg, spec.name
    if not args.k or not args.r:
        raise SystemExit("either --case or both --k and --r are required")
    radii = tuple(args.r)
    if args.star_a is not None:
        from .geometry import InterfaceCurve
        n = args.star_n if args.star_n is not None else 10
        curves = tuple(InterfaceCurve(radius=v, amplitude=args.star_a,
                                      lobes=n) for v in radii)
        return LayerConfig(tuple(args.k), radii, curves=curves), "custom"
    return LayerConfig(tuple(args.k), radii), "custom"


def _default_ms(config: LayerConfig, args) -> list[int]:
    if args.M:
        if len(args.M) != len(config.radii):
            raise SystemExit("need one --M entry per interface")
        return list(args.M)
    from .search import general_rule_estimate
    return list(general_rule_estimate(config, 6.0))


def _coeffs_or_none(config: LayerConfig, sound_hard: bool):
    if not config.is_circular:
        return None
    if sound_hard:
        return sound_hard_coefficients(config)
    return solve_mode_coefficients(config)


def cmd_cases(args) -> int:
    print(f"{'name':8s} {'k':>22s} {'r':>14s} {'beta':>24s}")
    for name in sorted(CASES):
        c = CASES[name]
        k = "(" + ", ".join(_fmt(v) for v in c.wavenumbers) + ")"
        r = "(" + ", ".join(_fmt(v) for v in c.radii) + ")"
        b = "(" + ", ".join(f"{v:.6g}" for v in c.betas) + ")"
        print(f"{name:8s} {k:>22s} {r:>14s} {b:>24s}")
    print(f"{len(CASES)} cases")
    return 0


def cmd_solve(args) -> int:
    config, name = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    Ms = _default_ms(config, args)
    coeffs = _coeffs_or_none(config, args.sound_hard)
    traces = solve_config(config, Ms, sound_hard=args.sound_hard)

    rows = []
    for i, g in enumerate(traces.system.grids):
        for m, th in enumerate(g.thetas):
            u = traces.u_traces[i][m]
            dn = traces.dn_traces[i][m]
            rows.append((i, th, u.real, u.imag, dn.real, dn.imag))
    write_csv(out / "traces.csv",
              ["interface", "theta", "re_u", "im_u", "re_dnu", "im_dnu"],
              rows)

    summary = []
    for i in range(len(config.radii)):
        if coeffs is not None:
            abs_err = boundary_l2_error(traces, coeffs, i)
            rel_err = boundary_l2_error(traces, coeffs, i, relative=True)
        else:
            abs_err = rel_err = float("nan")
        summary.append((name, i, Ms[i], abs_err, rel_err))
    write_csv(out / "boundary.csv",
              ["case", "interface", "M", "boundary_error_abs",
               "boundary_error"],
              summary)

    r_nodes = np.linspace(0.05 * config.radii[-1], 2.0 * config.radii[0],
                          args.field_n)
    t_nodes = 2.0 * np.pi * np.arange(args.field_n) / args.field_n
    rg, tg = np.meshgrid(r_nodes, t_nodes, indexing="ij")
    pts = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1).reshape(-1, 2)
    layer = classify_points(config, pts)
    u = eval_field(traces, pts, warn_close=False)
    field_rows = []
    header = ["r", "theta", "x", "y", "layer", "re_u", "im_u"]
    if coeffs is not None:
        ua = eval_analytic(coeffs, config, rg.ravel(), tg.ravel())
        header += ["re_u_ana", "im_u_ana"]
    for idx in range(len(pts)):
        row = [rg.ravel()[idx], tg.ravel()[idx], pts[idx, 0], pts[idx, 1],
               int(layer[idx]), u[idx].real, u[idx].imag]
        if coeffs is not None:
            row += [ua[idx].real, ua[idx].imag]
        field_rows.append(tuple(row))
    write_csv(out / "field.csv", header, field_rows)

    plots.plot_field(r_nodes, t_nodes, u.reshape(rg.shape), config.radii,
                     out / "field.png")
    outputs = ["traces.csv", "boundary.csv", "field.csv", "field.png"]
    write_manifest(out, "solve", args, outputs)
    for row in summary:
        print(f"{row[0]} interface {row[1]} M={row[2]} "
              f"error={_fmt(row[3])} (relative {_fmt(row[4])})")
    return 0


def cmd_radial_sweep(args) -> int:
    config, name = _resolve_config(args)
    if not config.is_circular:
        raise SystemExit("radial-sweep requires a circular configuration")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    Ms = _default_ms(config, args)
    coeffs = _coeffs_or_none(config, False)
    traces = solve_config(config, Ms)
    radii = (np.asarray(args.radii) if args.radii
             else default_radii(config, per_layer=args.per_layer))
    rows = []
    for r in radii:
        rep = radial_l2_error(traces, coeffs, float(r), band=args.band)
        layer = config.layer_of_radius(float(r))
        rows.append((name, float(r), layer, rep.value, rep.excluded_band,
                     rep.skipped))
    write_csv(out / "radial.csv",
              ["case", "r", "layer", "error", "excluded_band", "skipped"],
              rows)
    plots.plot_radial_errors(
        [(r, e, s) for _, r, _, e, _, s in rows], config.radii,
        out / "radial.png", target=args.eps)
    write_manifest(out, "radial-sweep", args, ["radial.csv", "radial.png"])
    done = [e for *_, e, _, s in rows if not s]
    print(f"{name}: {len(rows)} radii, {len(rows) - len(done)} skipped, "
          f"max error {_fmt(max(done))}")
    return 0


def cmd_optimize(args) -> int:
    config, name = _resolve_config(args)
    if not config.is_circular:
        raise SystemExit("optimize requires a circular configuration")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    coeffs = _coeffs_or_none(config, args.sound_hard)
    schedule = SearchSchedule(m_start=args.m_start, delta_m=args.delta_m,
                              eps=args.eps, m_cap=args.m_cap)
    result = find_optimal_M(config, coeffs, schedule,
                            sound_hard=args.sound_hard)
    write_csv(out / "optimal.csv",
              ["case", "interface", "M_tar", "error", "N_ppw"],
              [(name, i, result.M_tar[i], result.errors[i], result.nppw[i])
               for i in range(len(result.M_tar))])
    write_csv(out / "search_trace.csv",
              ["step"]
              + [f"M_{i}" for i in range(len(result.M_tar))]
              + [f"error_{i}" for i in range(len(result.M_tar))],
              [(s, *ms, *es) for s, (ms, es) in enumerate(result.trace)])
    plots.plot_search_trace(result.trace, out / "search.png")
    write_manifest(out, "optimize", args,
                   ["optimal.csv", "search_trace.csv", "search.png"])
    for i, m in enumerate(result.M_tar):
        print(f"{name} interface {i}: M_tar={m} error={_fmt(result.errors[i])} "
              f"N_ppw={result.nppw[i]:.2f}")
    return 0


def cmd_adapt(args) -> int:
    config, name = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    coeffs = _coeffs_or_none(config, False)
    if args.variant == "ana" and coeffs is None:
        raise SystemExit("variant 'ana' requires a circular configuration")
    schedule = AdaptSchedule(
        n0=args.n0, growth=args.growth, max_iterations=args.iterations,
        remesh_count=args.remesh, p=args.p, exponents=args.exponents,
        ep_target=args.ep_target, boundary_eps=args.boundary_eps,
        band=args.band if args.band is not None else 0.15,
    )
    state = adapt_loop(config, args.variant, schedule, coeffs=coeffs)
    n_if = len(config.radii)
    write_csv(out / "adapt.csv",
              ["case", "iteration", "complexity"]
              + [f"M_{i}" for i in range(n_if)]
              + ["E_p", "boundary_error", "refined", "dropped"],
              [(name, it.index, it.complexity, *it.Ms, it.ep,
                float("nan") if it.boundary_error is None
                else it.boundary_error, it.refined, it.dropped)
               for it in state.iterations])
    plots.plot_adapt_history({f"ADAPT-{args.variant.upper()}": state},
                             out / "adapt.png")
    outputs = ["adapt.csv", "adapt.png"]
    if args.dump_metric:
        from .adapt import (boundary_point_counts, build_sample_grids,
                            optimal_metric, _field_evaluator, _recover_all)
        evaluate, _ = _field_evaluator(config, args.variant, coeffs,
                                       state.final_Ms)
        grids = build_sample_grids(config, state.final_Ms, schedule.band,
                                   schedule.sample_ppw)
        hess, pts, w, layers, _ = _recover_all(config, evaluate, grids,
                                               schedule)
        metric = optimal_metric(hess, w, pts,
                                state.iterations[-1].complexity,
                                schedule.p, schedule.exponents, layers)
        write_csv(out / "metric.csv",
                  ["x", "y", "layer", "Txx", "Txy", "Tyy"],
                  [(p[0], p[1], int(l), t[0, 0], t[0, 1], t[1, 1])
                   for p, l, t in zip(metric.points, metric.layers,
                                      metric.tensors)])
        outputs.append("metric.csv")
    write_manifest(out, "adapt", args, outputs)
    last = state.iterations[-1]
    print(f"{name} ADAPT-{args.variant.upper()}: {len(state.iterations)} "
          f"iterations, stop={state.stop_reason}, final N={last.complexity:g} "
          f"M={last.Ms} E_p={_fmt(last.ep)}")
    return 0


def _add_config_flags(p):
    p.add_argument("--case", help="built-in case name (see 'cases')")
    p.add_argument("--k", type=float, nargs="+",
                   help="wavenumbers, outermost first")
    p.add_argument("--r", type=float, nargs="+",
                   help="interface radii, strictly decreasing")
    p.add_argument("--star-a", type=float, default=None,
                   help="star-shape amplitude for every interface")
    p.add_argument("--star-n", type=int, default=None,
                   help="number of star lobes (default 10 when --star-a set)")
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="layerbem",
        description="Multilayer Helmholtz scattering experiments",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cases", help="list built-in cases")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("solve", help="solve and export traces and field")
    _add_config_flags(p)
    p.add_argument("--M", type=int, nargs="+", help="points per interface")
    p.add_argument("--sound-hard", action="store_true")
    p.add_argument("--field-n", type=int, default=80,
                   help="polar field grid resolution")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("radial-sweep", help="ring errors against the series")
    _add_config_flags(p)
    p.add_argument("--M", type=int, nargs="+")
    p.add_argument("--radii", type=float, nargs="+")
    p.add_argument("--per-layer", type=int, default=60)
    p.add_argument("--band", type=float, default=None,
                   help="override exclusion half-width")
    p.add_argument("--eps", type=float, default=None,
                   help="target line drawn on the figure")
    p.set_defaults(func=cmd_radial_sweep)

    p = sub.add_parser("optimize", help="search minimal per-interface counts")
    _add_config_flags(p)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--m-start", type=int, default=16)
    p.add_argument("--delta-m", type=int, default=2)
    p.add_argument("--m-cap", type=int, default=1024)
    p.add_argument("--sound-hard", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("adapt", help="metric-based adaptation loop")
    _add_config_flags(p)
    p.add_argument("--variant", choices=("ana", "bie"), default="bie")
    p.add_argument("--exponents", choices=("paper", "2d"), default="paper")
    p.add_argument("--n0", type=float, default=400.0)
    p.add_argument("--growth", type=float, default=1.3)
    p.add_argument("--iterations", type=int, default=14)
    p.add_argument("--remesh", type=int, default=1,
                   help="re-mesh passes at constant complexity")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--ep-target", type=float, default=None)
    p.add_argument("--boundary-eps", type=float, default=None)
    p.add_argument("--band", type=float, default=None)
    p.add_argument("--dump-metric", action="store_true")
    p.set_defaults(func=cmd_adapt)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
