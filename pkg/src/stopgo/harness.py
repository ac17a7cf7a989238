"""Built-in experiment registry, error metrics and file emission.

Every study from the reference experiments is available as a named
scenario that runs end to end on a desk machine: the two Riemann problems,
the epsilon and look-ahead sweeps, the boundary-layer comparison, the
scheme comparison and the jam-cluster limit.  Runs emit one CSV profile,
one JSON manifest and (optionally) one rendered figure each.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model_core import FundamentalDiagram, MacroState, ModelParams, make_diagram
from .riemann import (
    ClusterFan,
    LwrFan,
    solve_riemann_cluster,
    solve_riemann_lwr,
)
from .schemes import BoundarySpec, GridSolution, run_simulation

X_LO, X_HI, X_JUMP = 0.0, 1.0, 0.5


@dataclass(frozen=True)
class Scenario:
    """A self-contained experiment: initial data, boundaries and sweeps."""

    name: str
    description: str
    kind: str                                  # "riemann" | "bvp" | "cluster" | "compare"
    left: MacroState | None = None
    right: MacroState | None = None
    g2_left: float | None = None               # bvp only
    g1_right: float | None = None
    schemes: tuple = ("relaxation",)
    h_values: tuple = (1.0,)
    eps_values: tuple = (0.1,)
    t_end: float = 0.4
    n_cells: int = 1000
    cfl: float = 1.0

    def boundary_spec(self) -> BoundarySpec:
        if self.kind == "bvp":
            return BoundarySpec.prescribed(g2=self.g2_left, g1=self.g1_right)
        return BoundarySpec.outflow()

    def initial_grid(self, params: ModelParams,
                     diagram: FundamentalDiagram,
                     n_cells: int | None = None) -> GridSolution:
        n = n_cells or self.n_cells
        x = X_LO + (np.arange(n) + 0.5) * (X_HI - X_LO) / n
        left_of_jump = x < X_JUMP
        rho = np.where(left_of_jump, self.left.rho, self.right.rho)
        if self.kind == "bvp":
            # interior starts in equilibrium; the walls drive the layers
            q = np.asarray(diagram.flux(rho), dtype=float)
        else:
            q = np.where(left_of_jump, self.left.q, self.right.q)
        return GridSolution(X_LO, X_HI, n, rho, q, 0.0, params, diagram)

    def reference(self, diagram: FundamentalDiagram):
        """Exact solution this scenario is compared against, if one exists."""
        if self.kind == "cluster":
            return solve_riemann_cluster(self.left, self.right)
        if self.kind in ("riemann", "compare"):
            return solve_riemann_lwr(diagram, self.left.rho, self.right.rho)
        return None


def builtin_scenarios() -> list[Scenario]:
    """The experiment registry; every entry runs with no external data."""
    rare = dict(left=MacroState(0.99, 0.0), right=MacroState(0.0, 0.0))
    shock = dict(left=MacroState(0.3, 0.0), right=MacroState(0.99, 0.0))
    return [
        Scenario("riemann-rarefaction",
                 "kinetic Riemann problem whose limit is a rarefaction",
                 "riemann", **rare),
        Scenario("riemann-shock",
                 "kinetic Riemann problem whose limit is a backward shock",
                 "riemann", **shock),
        Scenario("eps-sweep-rarefaction",
                 "relaxation limit on the rarefaction problem",
                 "riemann", **rare, eps_values=(0.5, 0.1, 0.01, 0.001)),
        Scenario("eps-sweep-shock",
                 "relaxation limit on the shock problem",
                 "riemann", **shock, eps_values=(0.5, 0.1, 0.01, 0.001)),
        Scenario("H-sweep-rarefaction",
                 "look-ahead sweep on the rarefaction problem",
                 "riemann", **rare, h_values=(1.0, 1.5, 2.0, 5.0)),
        Scenario("H-sweep-shock",
                 "look-ahead sweep on the shock problem",
                 "riemann", **shock, h_values=(1.0, 1.5, 2.0, 5.0)),
        Scenario("bvp-layers-outgoing",
                 "outgoing layers at both walls over a 0.9/0.2 interior",
                 "bvp", left=MacroState(0.9, 0.09), right=MacroState(0.2, 0.16),
                 g2_left=0.3, g1_right=0.3, eps_values=(0.1, 0.01, 0.001)),
        Scenario("bvp-layers",
                 "transonic left layer (g2=0.75) and ingoing right wall (g1=0.8) "
                 "over a 0.2/0.9 interior",
                 "bvp", left=MacroState(0.2, 0.16), right=MacroState(0.9, 0.09),
                 g2_left=0.75, g1_right=0.8, eps_values=(0.1, 0.01, 0.001)),
        Scenario("scheme-compare-rarefaction",
                 "Lax-Friedrichs vs relaxed vs Godunov on the rarefaction",
                 "compare", **rare, schemes=("lxf", "relaxed", "godunov")),
        Scenario("scheme-compare-shock",
                 "Lax-Friedrichs vs relaxed vs Godunov on the shock",
                 "compare", **shock, schemes=("lxf", "relaxed", "godunov")),
        Scenario("cluster",
                 "jam formation: constrained H -> 0 limit",
                 "cluster", left=MacroState(0.7, 0.7), right=MacroState(0.7, 0.2),
                 h_values=(1.0, 0.5, 0.1), eps_values=(math.inf,), t_end=0.2),
        Scenario("cluster-linear",
                 "free H -> 0 limit (no jam forms)",
                 "cluster", left=MacroState(0.7, 0.3), right=MacroState(0.7, 0.2),
                 h_values=(1.0, 0.5, 0.1), eps_values=(math.inf,), t_end=0.2),
    ]


def get_scenario(name: str) -> Scenario:
    for sc in builtin_scenarios():
        if sc.name == name:
            return sc
    known = ", ".join(s.name for s in builtin_scenarios())
    raise KeyError(f"unknown scenario {name!r}; known: {known}")


def l1_error(x, values, reference, t: float) -> float:
    """Cell-weighted L1 distance sum |v_i - ref(x_i, t)| dx."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.shape != values.shape or x.size < 2:
        raise ValueError("profile coordinates and values must match (>= 2 cells)")
    dx = x[1] - x[0]
    return float(np.sum(np.abs(values - reference(x, t))) * dx)


def linf_error(x, values, reference, t: float) -> float:
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if x.shape != values.shape:
        raise ValueError("profile coordinates and values must match")
    return float(np.max(np.abs(values - reference(x, t))))


def riemann_reference(fan, x_jump: float = X_JUMP):
    """Adapt a self-similar fan into a (x, t) -> rho callable."""
    if isinstance(fan, LwrFan):
        return lambda x, t: fan.profile(x, t, x_jump)
    if isinstance(fan, (ClusterFan,)) or hasattr(fan, "profile"):
        return lambda x, t: fan.profile(x, t, x_jump)[0]
    raise TypeError(f"cannot adapt {type(fan).__name__} as a reference")


def front_position(x, values, level: float) -> float:
    """Locate the unique crossing of a monotone front through `level`."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    sign = np.sign(values - level)
    crossings = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    on_level = np.flatnonzero(sign == 0)
    if len(on_level) == 1 and len(crossings) == 0:
        return float(x[on_level[0]])
    if len(crossings) != 1:
        raise ValueError(f"profile crosses level {level} {len(crossings)} times; "
                         "need exactly one monotone front")
    i = crossings[0]
    w = (level - values[i]) / (values[i + 1] - values[i])
    return float(x[i] + w * (x[i + 1] - x[i]))


@dataclass
class RunReport:
    """Everything one run produced: final profile, metrics and timing."""

    scenario: str
    scheme: str
    H: float
    epsilon: float
    n_cells: int
    cfl: float
    t_end: float
    x: np.ndarray
    rho: np.ndarray
    q: np.ndarray
    z: np.ndarray | None
    bc: BoundarySpec
    l1: float | None = None
    linf: float | None = None
    front: float | None = None
    runtime_s: float = 0.0
    n_steps: int = 0
    dt_min: float = 0.0
    dt_max: float = 0.0
    outputs: list = field(default_factory=list)

    @property
    def label(self) -> str:
        bits = [self.scheme]
        if self.scheme == "relaxation":
            bits.append(f"H={self.H:g}")
            bits.append("eps=inf" if math.isinf(self.epsilon) else f"eps={self.epsilon:g}")
        return " ".join(bits)

    def summary_line(self) -> str:
        parts = [f"{self.scenario}: {self.label}",
                 f"cells={self.n_cells}", f"t={self.t_end:g}",
                 f"steps={self.n_steps}", f"runtime={self.runtime_s:.2f}s"]
        if self.l1 is not None:
            parts.append(f"L1={self.l1:.4e}")
        if self.front is not None:
            parts.append(f"front={self.front:.4f}")
        return "  ".join(parts)


def execute(scenario: Scenario, scheme: str, H: float, epsilon: float,
            diagram: FundamentalDiagram | None = None,
            n_cells: int | None = None, cfl: float | None = None,
            t_end: float | None = None, front_level: float | None = None) -> RunReport:
    """Run one (scheme, H, epsilon) combination of a scenario."""
    diagram = diagram or make_diagram()
    n = n_cells or scenario.n_cells
    cfl = cfl if cfl is not None else scenario.cfl
    t_end = t_end if t_end is not None else scenario.t_end
    params = ModelParams(H=H, epsilon=epsilon)
    grid = scenario.initial_grid(params, diagram, n)
    bc = scenario.boundary_spec()
    final, log = run_simulation(grid, bc, scheme, t_end, cfl)

    x = final.centers()
    kinetic = scheme == "relaxation"
    report = RunReport(
        scenario=scenario.name, scheme=scheme, H=H, epsilon=epsilon,
        n_cells=n, cfl=cfl, t_end=t_end, x=x, rho=final.rho, q=final.q,
        z=final.z() if kinetic else None, bc=bc,
        runtime_s=log.runtime_s, n_steps=log.n_steps,
        dt_min=float(min(log.dts)) if log.dts else 0.0,
        dt_max=float(max(log.dts)) if log.dts else 0.0,
    )
    ref = scenario.reference(diagram)
    if ref is not None:
        ref_fn = riemann_reference(ref)
        report.l1 = l1_error(x, final.rho, ref_fn, t_end)
        report.linf = linf_error(x, final.rho, ref_fn, t_end)
    if front_level is not None:
        report.front = front_position(x, final.rho, front_level)
    return report


def run_scenario(name: str, diagram: FundamentalDiagram | None = None,
                 scheme: str | None = None, H: float | None = None,
                 epsilon: float | None = None, n_cells: int | None = None,
                 cfl: float | None = None, t_end: float | None = None) -> list[RunReport]:
    """Run a named scenario, sweeping whatever it sweeps (CLI overrides win)."""
    sc = get_scenario(name)
    schemes = (scheme,) if scheme else sc.schemes
    hs = (H,) if H is not None else sc.h_values
    eps = (epsilon,) if epsilon is not None else sc.eps_values
    reports = []
    for s in schemes:
        for h in hs:
            for e in eps:
                reports.append(execute(sc, s, h, e, diagram=diagram,
                                       n_cells=n_cells, cfl=cfl, t_end=t_end))
    return reports


# ---------------------------------------------------------------------------
# file emission

CSV_FORMAT = "%.12g"


def write_profile_csv(path, x, rho, q, z=None) -> Path:
    """Delimited profile: `x,rho,q[,z]`, one row per cell, 12 significant digits."""
    path = Path(path)
    cols = [x, rho, q] + ([z] if z is not None else [])
    header = "x,rho,q,z" if z is not None else "x,rho,q"
    rows = np.column_stack(cols)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(CSV_FORMAT % v for v in row) + "\n")
    return path


def read_profile_csv(path):
    """Parse a profile written by write_profile_csv into a dict of columns."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(names)}


def _bc_to_json(bc: BoundarySpec) -> dict:
    return {"left": {"kind": bc.left.kind, "value": bc.left.value},
            "right": {"kind": bc.right.kind, "value": bc.right.value}}


def write_manifest(path, report: RunReport, diagram_name: str = "lw",
                   seed: int | None = None) -> Path:
    """Record everything needed to reproduce a run bit-identically."""
    path = Path(path)
    doc = {
        "scenario": report.scenario,
        "scheme": report.scheme,
        "H": report.H,
        "epsilon": "inf" if math.isinf(report.epsilon) else report.epsilon,
        "cells": report.n_cells,
        "cfl": report.cfl,
        "t_end": report.t_end,
        "bc": _bc_to_json(report.bc),
        "seed": seed,
        "diagram": diagram_name,
        "outputs": [str(p) for p in report.outputs],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def replay_manifest(path, diagram: FundamentalDiagram | None = None) -> RunReport:
    """Re-run the combination recorded in a manifest."""
    doc = json.loads(Path(path).read_text())
    eps = math.inf if doc["epsilon"] == "inf" else float(doc["epsilon"])
    return execute(get_scenario(doc["scenario"]), doc["scheme"], float(doc["H"]),
                   eps, diagram=diagram, n_cells=int(doc["cells"]),
                   cfl=float(doc["cfl"]), t_end=float(doc["t_end"]))


def run_tag(report: RunReport) -> str:
    eps = "inf" if math.isinf(report.epsilon) else f"{report.epsilon:g}"
    tag = f"{report.scenario}__{report.scheme}"
    if report.scheme == "relaxation":
        tag += f"__H{report.H:g}__eps{eps}"
    return tag.replace(".", "p")


def emit_report(report: RunReport, out_dir, diagram_name: str = "lw",
                plot: bool = True) -> list[Path]:
    """Write CSV + manifest (+ figure) for one run and return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tag = run_tag(report)
    csv_path = write_profile_csv(out_dir / f"{tag}.csv", report.x, report.rho,
                                 report.q, report.z)
    report.outputs.append(csv_path)
    if plot:
        from .plots import plot_profile
        png = plot_profile(report, out_dir / f"{tag}.png")
        report.outputs.append(png)
    manifest = write_manifest(out_dir / f"{tag}.manifest.json", report,
                              diagram_name=diagram_name)
    report.outputs.append(manifest)
    return list(report.outputs)


def load_diagram_csv(path) -> FundamentalDiagram:
    """Build a diagram from two-column (rho, F) samples.

    Samples are interpolated with a monotonicity-preserving cubic (PCHIP),
    then validated like any custom diagram.
    """
    from scipy.interpolate import PchipInterpolator

    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("diagram file must have two columns: rho, F")
    rho, f = data[:, 0], data[:, 1]
    order = np.argsort(rho)
    spline = PchipInterpolator(rho[order], f[order])
    return make_diagram(kind="custom", flux=spline, deriv=spline.derivative())
