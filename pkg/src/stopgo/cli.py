"""Command-line driver: run scenarios, emit CSV profiles, manifests and figures."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import boundary_layer, harness
from .model_core import ModelError, ModelParams, check_subcharacteristic, make_diagram


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--diagram", default="lw",
                        help="'lw' or a CSV file of (rho, F) samples")
    parser.add_argument("--H", type=float, default=None, help="look-ahead exponent")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="relaxation time (inf disables relaxation)")
    parser.add_argument("--cells", type=int, default=None, help="number of cells")
    parser.add_argument("--cfl", type=float, default=None, help="CFL number in (0, 1]")
    parser.add_argument("--t-end", type=float, default=None, help="final time")
    parser.add_argument("--scheme", default=None,
                        choices=["relaxation", "relaxed", "lxf", "godunov"])
    parser.add_argument("--no-plot", action="store_true",
                        help="emit data files only, skip figures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stopgo",
        description="Two-velocity relaxation solver for traffic flow")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("riemann", help="run a Riemann-problem scenario")
    p.add_argument("--scenario", default="riemann-shock")
    _add_common(p)

    p = sub.add_parser("bvp", help="run a boundary-layer scenario")
    p.add_argument("--scenario", default="bvp-layers")
    _add_common(p)

    p = sub.add_parser("compare-schemes", help="Lax-Friedrichs vs relaxed vs Godunov")
    p.add_argument("--scenario", default="scheme-compare-shock")
    _add_common(p)

    p = sub.add_parser("cluster", help="jam-cluster limit scenario")
    p.add_argument("--scenario", default="cluster")
    _add_common(p)

    p = sub.add_parser("layer", help="resolve a wall layer and integrate its profile")
    p.add_argument("--side", choices=["left", "right"], required=True)
    p.add_argument("--g", type=float, required=True,
                   help="prescribed invariant (z on the left, rho - q on the right)")
    p.add_argument("--rho-b", type=float, required=True, help="interior density")
    _add_common(p)

    p = sub.add_parser("check-subchar", help="audit a diagram against the frozen speeds")
    p.add_argument("--samples", type=int, default=1000)
    _add_common(p)

    sub.add_parser("list", help="list built-in scenarios")
    return parser


def _load_diagram(name: str):
    if name == "lw":
        return make_diagram(), "lw"
    return harness.load_diagram_csv(name), name


def _emit_all(reports, args, diagram_name, comparison_exact=None):
    out = Path(args.out)
    for rep in reports:
        harness.emit_report(rep, out, diagram_name=diagram_name, plot=not args.no_plot)
        print(rep.summary_line())
    if not args.no_plot and len(reports) > 1:
        from .plots import plot_comparison
        png = out / f"{reports[0].scenario}__comparison.png"
        plot_comparison(reports, png, exact=comparison_exact)
        print(f"comparison figure: {png}")


def _cmd_scenario(args) -> int:
    diagram, diagram_name = _load_diagram(args.diagram)
    reports = harness.run_scenario(
        args.scenario, diagram=diagram, scheme=args.scheme, H=args.H,
        epsilon=args.epsilon, n_cells=args.cells, cfl=args.cfl, t_end=args.t_end)
    sc = harness.get_scenario(args.scenario)
    ref = sc.reference(diagram)
    exact = harness.riemann_reference(ref) if ref is not None else None
    _emit_all(reports, args, diagram_name, comparison_exact=exact)
    return 0


def _cmd_layer(args) -> int:
    diagram, _ = _load_diagram(args.diagram)
    params = ModelParams(H=args.H if args.H is not None else 1.0)
    if args.side == "left":
        res = boundary_layer.resolve_left_boundary(diagram, params, args.g, args.rho_b)
    else:
        res = boundary_layer.resolve_right_boundary(diagram, params, args.g, args.rho_b)
    print(f"{res.side} wall: {res.case} flow, rho_wall={res.rho_wall:.6g}, "
          f"rho_K={res.rho_K:.6g}, C={res.C:.6g}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if res.C > 0.0:
        profile = boundary_layer.integrate_layer(diagram, params, res.C,
                                                 res.rho_wall, args.side)
        csv = harness.write_profile_csv(
            out / f"layer_{args.side}.csv", profile.x, profile.rho,
            [res.C] * len(profile.x))
        print(f"layer profile: {csv}")
        if not args.no_plot:
            from .plots import plot_layer
            fp = boundary_layer.layer_fixed_points(diagram, min(res.C, diagram.max_flux))
            png = plot_layer(profile, out / f"layer_{args.side}.png", fp)
            print(f"layer figure: {png}")
    else:
        print("zero throughput: the layer is the constant vacuum state")
    return 0


def _cmd_check_subchar(args) -> int:
    diagram, _ = _load_diagram(args.diagram)
    params = ModelParams(H=args.H if args.H is not None else 1.0)
    audit = check_subcharacteristic(diagram, params, n_samples=args.samples)
    print(audit)
    return 0 if audit.passed else 1


def _cmd_list(_args) -> int:
    for sc in harness.builtin_scenarios():
        print(f"{sc.name:28s} {sc.description}")
    return 0


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command in ("riemann", "bvp", "compare-schemes", "cluster"):
            return _cmd_scenario(args)
        if args.command == "layer":
            return _cmd_layer(args)
        if args.command == "check-subchar":
            return _cmd_check_subchar(args)
        if args.command == "list":
            return _cmd_list(args)
        parser.error(f"unknown command {args.command!r}")
    except (ModelError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
