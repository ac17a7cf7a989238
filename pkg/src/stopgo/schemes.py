"""Uniform-grid finite-volume steppers for the two-speed model and its limits.

The kinetic scheme splits the conservative system into a Godunov advection
step in (rho, z) and a pointwise implicit relaxation step; because every
slow wave has nonpositive speed the Godunov interface state is simply the
middle state of the local Riemann fan.  The relaxed scheme, Lax-Friedrichs
and exact-Riemann Godunov act on the scalar limit equation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .model_core import (
    FundamentalDiagram,
    MacroState,
    ModelError,
    ModelParams,
    SingularityError,
    equilibrium_z,
    to_conservative,
)
from .riemann import middle_flux_h1, solve_middle_rho

KINETIC_SCHEMES = ("relaxation",)
SCALAR_SCHEMES = ("relaxed", "lxf", "godunov")


class CFLError(ModelError):
    """A time step exceeded the stability bound."""


@dataclass(frozen=True)
class EdgeCondition:
    kind: str                    # "outflow" | "periodic" | "prescribed_g2" | "prescribed_g1"
    value: float | None = None


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary data for a grid: ghost-cell recipe for each side.

    The left side may prescribe the incoming fast invariant g2 = z, the
    right side the incoming slow invariant g1 = rho - q; outflow copies the
    edge cell and periodic wraps (both sides or neither).
    """

    left: EdgeCondition = EdgeCondition("outflow")
    right: EdgeCondition = EdgeCondition("outflow")

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ValueError("periodic boundaries must be set on both sides")
        if self.left.kind not in ("outflow", "periodic", "prescribed_g2"):
            raise ValueError(f"invalid left boundary {self.left.kind!r}")
        if self.right.kind not in ("outflow", "periodic", "prescribed_g1"):
            raise ValueError(f"invalid right boundary {self.right.kind!r}")

    @classmethod
    def outflow(cls):
        return cls()

    @classmethod
    def periodic(cls):
        return cls(EdgeCondition("periodic"), EdgeCondition("periodic"))

    @classmethod
    def prescribed(cls, g2: float | None = None, g1: float | None = None):
        left = EdgeCondition("prescribed_g2", g2) if g2 is not None else EdgeCondition("outflow")
        right = EdgeCondition("prescribed_g1", g1) if g1 is not None else EdgeCondition("outflow")
        return cls(left, right)

    @property
    def is_periodic(self) -> bool:
        return self.left.kind == "periodic"


@dataclass
class GridSolution:
    """Cell averages of (rho, q) on a uniform grid, plus run metadata."""

    x_lo: float
    x_hi: float
    n_cells: int
    rho: np.ndarray
    q: np.ndarray
    t: float
    params: ModelParams
    diagram: FundamentalDiagram

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        if self.rho.shape != (self.n_cells,) or self.q.shape != (self.n_cells,):
            raise ValueError("rho and q must have one entry per cell")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    def centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n_cells) + 0.5) * self.dx

    def z(self) -> np.ndarray:
        H = self.params.H
        return H * self.q / (1.0 - self.rho) ** H

    def replace(self, rho, q, t) -> "GridSolution":
        return GridSolution(self.x_lo, self.x_hi, self.n_cells, rho, q, t,
                            self.params, self.diagram)


def godunov_flux_system(left: MacroState, right: MacroState,
                        params: ModelParams) -> tuple[float, float]:
    """Godunov interface flux of the conservative system: (q_M, z_L).

    No wave classification is needed: slow speeds are <= 0 and the fast
    contact has speed 1, so the interface always sees the middle state.
    """
    z_l = to_conservative(left, params).z
    b = right.rho - right.q
    if params.H == 1.0:
        q_m = middle_flux_h1(left.rho, left.q, right.rho, right.q)
    else:
        rho_m = solve_middle_rho(z_l, b, params.H)
        q_m = z_l * (1.0 - rho_m) ** params.H / params.H
    return q_m, z_l


def apply_boundary(sol: GridSolution, bc: BoundarySpec,
                   params: ModelParams) -> tuple[MacroState, MacroState]:
    """Ghost states for both sides of the grid.

    A prescribed side fixes its incoming invariant and carries the outgoing
    one from the adjacent interior cell, reusing the middle-state kernel.
    """
    rho_g, q_g = _ghost_values(sol.rho, sol.q, bc, params)
    return (MacroState(float(rho_g[0]), float(q_g[0])),
            MacroState(float(rho_g[1]), float(q_g[1])))


def _ghost_values(rho, q, bc: BoundarySpec, params: ModelParams):
    """(rho, q) for the [left, right] ghost cells as arrays of length 2."""
    H = params.H
    if bc.is_periodic:
        return (np.array([rho[-1], rho[0]]), np.array([q[-1], q[0]]))

    if bc.left.kind == "outflow":
        rho_l, q_l = rho[0], q[0]
    else:
        g2 = bc.left.value
        b = rho[0] - q[0]
        if H == 1.0:
            q_l = g2 * (1.0 - b) / (1.0 + g2)
        else:
            rho_m = solve_middle_rho(g2, b, H)
            q_l = g2 * (1.0 - rho_m) ** H / H
        rho_l = q_l + b

    if bc.right.kind == "outflow":
        rho_r, q_r = rho[-1], q[-1]
    else:
        g1 = bc.right.value
        z_carried = H * q[-1] / (1.0 - rho[-1]) ** H
        if H == 1.0:
            q_r = z_carried * (1.0 - g1) / (1.0 + z_carried)
        else:
            rho_m = solve_middle_rho(z_carried, g1, H)
            q_r = z_carried * (1.0 - rho_m) ** H / H
        rho_r = q_r + g1

    return (np.array([rho_l, rho_r]), np.array([q_l, q_r]))


def _interface_flux_system(rho_e, q_e, params: ModelParams):
    """Vectorized Godunov fluxes on an extended array: (flux_rho, flux_z, rho_m)."""
    H = params.H
    z = H * q_e / (1.0 - rho_e) ** H
    z_l = z[:-1]
    b = rho_e[1:] - q_e[1:]
    if H == 1.0:
        q_m = middle_flux_h1(rho_e[:-1], q_e[:-1], rho_e[1:], q_e[1:])
        rho_m = q_m + b
    else:
        rho_m = solve_middle_rho(z_l, b, H)
        q_m = z_l * (1.0 - rho_m) ** H / H
    return q_m, z_l, rho_m


def _extended_state(sol: GridSolution, bc: BoundarySpec):
    ghosts_rho, ghosts_q = _ghost_values(sol.rho, sol.q, bc, sol.params)
    rho_e = np.concatenate(([ghosts_rho[0]], sol.rho, [ghosts_rho[1]]))
    q_e = np.concatenate(([ghosts_q[0]], sol.q, [ghosts_q[1]]))
    return rho_e, q_e


def _kinetic_wave_bound(rho_e, q_e, rho_m, params: ModelParams) -> float:
    """Fastest wave magnitude of all interface fans, floored by the contact."""
    lam = params.H * q_e / (1.0 - rho_e)
    bound = max(1.0, float(np.max(lam)))
    if params.H != 1.0:
        # middle densities need not lie between the neighbouring cell values,
        # so an interface jump can outrun every cell speed; bound each
        # interface by its actual jump speed (rarefaction edges stay below
        # the adjacent cell speeds and need no extra term)
        z_l = params.H * q_e[:-1] / (1.0 - rho_e[:-1]) ** params.H
        gap = rho_e[:-1] - rho_m
        safe_gap = np.where(np.abs(gap) > 1e-14, gap, 1.0)
        s = z_l * ((1.0 - rho_e[:-1]) ** params.H - (1.0 - rho_m) ** params.H) \
            / (params.H * safe_gap)
        speeds = np.where(np.abs(gap) > 1e-14, np.abs(s), lam[:-1])
        bound = max(bound, float(np.max(speeds)))
    return bound


def _advance(sol: GridSolution, dt: float, flux_rho, flux_z) -> GridSolution:
    """Conservative advection update, edge projection, then relaxation."""
    params, diagram = sol.params, sol.diagram
    dx = sol.dx
    rho_new = sol.rho - (dt / dx) * (flux_rho[1:] - flux_rho[:-1])
    z_star = sol.z() - (dt / dx) * (flux_z[1:] - flux_z[:-1])

    if np.any(rho_new > params.rho_max):
        raise SingularityError("advection pushed a cell density beyond 1 - delta")

    # invariant-domain projection: the state triangle is not convex in
    # (rho, z), so averaged cells mixing a large-z region with a thin one
    # can map back to q > rho; cap z at the maximal-velocity edge value for
    # the new density.  Vehicle mass is untouched and the cap is inactive
    # whenever the averaged states remain physical (all near-equilibrium
    # regimes), keeping the advection substep exactly conservative there.
    z_edge = params.H * rho_new / (1.0 - rho_new) ** params.H
    z_star = np.minimum(np.maximum(z_star, 0.0), z_edge)

    z_new = relax_z(z_star, rho_new, dt, params, diagram)
    q_new = z_new * (1.0 - rho_new) ** params.H / params.H
    return sol.replace(rho_new, q_new, sol.t + dt)


def step_relaxation(sol: GridSolution, bc: BoundarySpec, dt: float) -> GridSolution:
    """One split step: Godunov advection in (rho, z), then implicit relaxation.

    The relaxation ODE is linear in z at frozen rho, so the implicit Euler
    update is exact: z <- (z + (dt/eps) G(rho)) / (1 + dt/eps) with
    G(rho) = H F(rho) / (1 - rho)^H.  epsilon = 0 projects straight onto
    equilibrium, epsilon = inf leaves z untouched.
    """
    params = sol.params
    if np.any(sol.rho > params.rho_max):
        raise SingularityError("a cell density exceeds 1 - delta")
    lam_max = float(np.max(params.H * sol.q / (1.0 - sol.rho)))
    if dt * max(1.0, lam_max) > sol.dx * (1.0 + 1e-12):
        raise CFLError(f"dt={dt} exceeds dx / max(1, |lambda1|) = "
                       f"{sol.dx / max(1.0, lam_max)}")
    rho_e, q_e = _extended_state(sol, bc)
    flux_rho, flux_z, _ = _interface_flux_system(rho_e, q_e, params)
    return _advance(sol, dt, flux_rho, flux_z)


def relax_z(z, rho, dt, params: ModelParams, diagram: FundamentalDiagram):
    """Implicit Euler for the stiff source, exact because it is linear in z.

    z <- (z + (dt/eps) G(rho)) / (1 + dt/eps), G(rho) = H F(rho)/(1 - rho)^H;
    epsilon = 0 projects onto equilibrium, epsilon = inf is the identity.
    """
    if params.epsilon == 0.0:
        return equilibrium_z(diagram, rho, params.H)
    r = dt / params.epsilon
    return (z + r * equilibrium_z(diagram, rho, params.H)) / (1.0 + r)


_DEFAULT_DELTA = 1e-10


def _extend_scalar(rho, ghost_left, ghost_right):
    gl = rho[0] if ghost_left is None else ghost_left
    gr = rho[-1] if ghost_right is None else ghost_right
    return np.concatenate(([gl], rho, [gr]))


def step_relaxed(rho, diagram: FundamentalDiagram, dt: float, dx: float,
                 ghost_left: float | None = None,
                 ghost_right: float | None = None) -> np.ndarray:
    """Relaxed-limit update, the epsilon = 0 kinetic scheme written in rho only.

    Interface flux F(rho_i) (1 - rho_{i+1} + F(rho_{i+1})) / (1 - rho_i + F(rho_i)):
    neither the Godunov nor the Lax-Friedrichs flux of the limit equation,
    and monotone whenever F(rho) + (1 - rho) F'(rho) >= 0.
    """
    rho = np.asarray(rho, dtype=float)
    _check_scalar_step(rho, dt, dx)
    ext = _extend_scalar(rho, ghost_left, ghost_right)
    f = diagram.flux(ext)
    w = 1.0 - ext + f
    flux = f[:-1] * w[1:] / w[:-1]
    return rho - (dt / dx) * (flux[1:] - flux[:-1])


def step_lax_friedrichs(rho, diagram: FundamentalDiagram, dt: float, dx: float,
                        ghost_left: float | None = None,
                        ghost_right: float | None = None) -> np.ndarray:
    """Classical Lax-Friedrichs update with numerical viscosity dx/dt."""
    rho = np.asarray(rho, dtype=float)
    _check_scalar_step(rho, dt, dx, guard_jam=False)
    ext = _extend_scalar(rho, ghost_left, ghost_right)
    f = diagram.flux(ext)
    flux = 0.5 * (f[:-1] + f[1:]) - 0.5 * (dx / dt) * (ext[1:] - ext[:-1])
    return rho - (dt / dx) * (flux[1:] - flux[:-1])


def step_godunov_lwr(rho, diagram: FundamentalDiagram, dt: float, dx: float,
                     ghost_left: float | None = None,
                     ghost_right: float | None = None) -> np.ndarray:
    """Exact-Riemann Godunov update for a concave diagram.

    The interface flux is min(F) over [rho_l, rho_r] for increasing data
    and max(F) over [rho_r, rho_l] otherwise, evaluated in demand/supply
    form (equivalent for unimodal concave flux laws).
    """
    rho = np.asarray(rho, dtype=float)
    _check_scalar_step(rho, dt, dx, guard_jam=False)
    _check_concavity(diagram)
    ext = _extend_scalar(rho, ghost_left, ghost_right)
    cap = diagram.max_flux
    star = diagram.rho_star
    f = np.asarray(diagram.flux(ext), dtype=float)
    demand = np.where(ext[:-1] <= star, f[:-1], cap)
    supply = np.where(ext[1:] >= star, f[1:], cap)
    flux = np.minimum(demand, supply)
    return rho - (dt / dx) * (flux[1:] - flux[:-1])


def _check_scalar_step(rho, dt, dx, guard_jam=True):
    if dt > dx * (1.0 + 1e-12):
        raise CFLError(f"dt={dt} exceeds dx={dx}; scalar steps need dt/dx <= 1")
    if np.any(rho < -1e-12) or np.any(rho > 1.0 + 1e-12):
        raise ValueError("densities must lie in [0, 1]")
    if guard_jam and np.any(rho > 1.0 - _DEFAULT_DELTA):
        raise SingularityError("a cell density reached the jam singularity")


def _check_concavity(diagram: FundamentalDiagram, n: int = 64):
    grid = np.linspace(0.0, 1.0, n)
    d = np.asarray(diagram.deriv(grid), dtype=float)
    if np.any(np.diff(d) / np.diff(grid) > 1e-9):
        raise ValueError("Godunov limit stepper requires a concave diagram")


@dataclass
class StepLog:
    """Per-run record: step sizes and the state bounds seen along the way."""

    dts: list = field(default_factory=list)
    rho_min: float = np.inf
    rho_max: float = -np.inf
    q_min: float = np.inf
    q_max: float = -np.inf
    runtime_s: float = 0.0

    @property
    def n_steps(self) -> int:
        return len(self.dts)

    def record(self, dt, rho, q=None):
        self.dts.append(dt)
        self.rho_min = min(self.rho_min, float(np.min(rho)))
        self.rho_max = max(self.rho_max, float(np.max(rho)))
        if q is not None:
            self.q_min = min(self.q_min, float(np.min(q)))
            self.q_max = max(self.q_max, float(np.max(q)))


def suggest_dt(sol: GridSolution, bc: BoundarySpec, scheme: str, cfl: float) -> float:
    """Largest stable step at the given CFL number, recomputed from the data.

    Kinetic schemes bound by the fast contact (speed 1), the slow speeds of
    all cells and the actual interface jump speeds (middle densities can
    exceed both neighbours, so cell speeds alone would underestimate).
    """
    if scheme in SCALAR_SCHEMES:
        return cfl * sol.dx / _scalar_speed_bound(sol.rho, sol.diagram)
    rho_e, q_e = _extended_state(sol, bc)
    _, _, rho_m = _interface_flux_system(rho_e, q_e, sol.params)
    return cfl * sol.dx / _kinetic_wave_bound(rho_e, q_e, rho_m, sol.params)


def _scalar_speed_bound(rho, diagram: FundamentalDiagram) -> float:
    """Wave-speed bound for the limit equation, floored by the fast contact.

    The floor keeps dt/dx <= 1 (the steppers' stability requirement) and
    matches running the underlying two-speed system at the same CFL number.
    """
    return max(1.0, float(np.max(np.abs(diagram.deriv(rho)))))


def run_simulation(initial: GridSolution, bc: BoundarySpec, scheme: str,
                   t_end: float, cfl: float = 1.0,
                   max_steps: int = 10_000_000) -> tuple[GridSolution, StepLog]:
    """Advance a grid to t_end with adaptive steps, truncating the last one.

    scheme is one of "relaxation" (kinetic), "relaxed", "lxf", "godunov"
    (scalar limit).  Scalar schemes only support outflow and periodic
    boundaries; the returned q field of a scalar run is the equilibrium
    flux of the final densities.
    """
    if scheme not in KINETIC_SCHEMES + SCALAR_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    if t_end < initial.t:
        raise ValueError("t_end lies before the initial time")
    if scheme in SCALAR_SCHEMES and any(
            c.kind.startswith("prescribed") for c in (bc.left, bc.right)):
        raise ValueError("scalar schemes only support outflow or periodic boundaries")

    start = time.perf_counter()
    log = StepLog()
    sol = initial
    if scheme in SCALAR_SCHEMES:
        stepper = {"relaxed": step_relaxed, "lxf": step_lax_friedrichs,
                   "godunov": step_godunov_lwr}[scheme]
        rho = sol.rho.copy()
        t = sol.t
        while t < t_end - 1e-14:
            dt = min(cfl * sol.dx / _scalar_speed_bound(rho, sol.diagram), t_end - t)
            if bc.is_periodic:
                rho = stepper(rho, sol.diagram, dt, sol.dx, rho[-1], rho[0])
            else:
                rho = stepper(rho, sol.diagram, dt, sol.dx)
            t += dt
            log.record(dt, rho)
            if log.n_steps >= max_steps:
                raise RuntimeError("step budget exhausted")
        q = np.asarray(sol.diagram.flux(rho), dtype=float)
        final = sol.replace(rho, q, t_end)
    else:
        if np.any(sol.rho > sol.params.rho_max):
            raise SingularityError("a cell density exceeds 1 - delta")
        while sol.t < t_end - 1e-14:
            # one interface solve per step covers both the CFL bound and
            # the fluxes
            rho_e, q_e = _extended_state(sol, bc)
            flux_rho, flux_z, rho_m = _interface_flux_system(rho_e, q_e, sol.params)
            bound = _kinetic_wave_bound(rho_e, q_e, rho_m, sol.params)
            dt = min(cfl * sol.dx / bound, t_end - sol.t)
            sol = _advance(sol, dt, flux_rho, flux_z)
            log.record(dt, sol.rho, sol.q)
            if log.n_steps >= max_steps:
                raise RuntimeError("step budget exhausted")
        final = sol.replace(sol.rho, sol.q, t_end)
    log.runtime_s = time.perf_counter() - start
    return final, log
