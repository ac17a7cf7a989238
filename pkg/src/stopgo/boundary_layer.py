"""Kinetic half-space layers and the macroscopic boundary data they select.

Near a boundary the solution of the relaxation system develops an O(epsilon)
layer in which the flux is constant (q = C) and the density follows

    d rho / dx = +- (1 - rho) (F(rho) - C) / (H C)

(+ at the left boundary, - at the right).  The admissible asymptotic value
rho_K of the layer is what the scalar limit equation sees as its boundary
datum.  Prescribed at the wall are the incoming characteristic quantities:
z = H q / (1 - rho)^H on the left, rho - q on the right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_core import (
    FundamentalDiagram,
    ModelParams,
    bisect,
    equilibrium_z,
    tau,
)


@dataclass(frozen=True)
class LayerFixedPoints:
    """Rest points of the layer equation for a given throughput C."""

    rho1: float          # free-flow branch, <= rho_star
    rho2: float          # congested branch, tau(rho1)
    rho3: float          # jam density, always 1
    merged: bool         # rho1 == rho2 == rho_star (C at capacity)


def layer_fixed_points(diagram: FundamentalDiagram, C: float) -> LayerFixedPoints:
    """Solve F(rho) = C on both flanks of the diagram."""
    cap = diagram.max_flux
    if C < 0.0 or C > cap + 1e-12:
        raise ValueError(f"throughput C={C} outside [0, F(rho_star)={cap}]")
    if abs(C - cap) <= 1e-12:
        star = diagram.rho_star
        return LayerFixedPoints(star, star, 1.0, merged=True)
    rho1 = bisect(lambda r: float(diagram.flux(r)) - C, 0.0, diagram.rho_star)
    return LayerFixedPoints(rho1, tau(diagram, rho1), 1.0, merged=False)


@dataclass
class LayerProfile:
    """Numerically integrated layer, in the stretched wall coordinate."""

    x: np.ndarray
    rho: np.ndarray
    side: str
    C: float
    converged_to: float | None   # stable rest point reached, if any
    blew_up: bool                # left [0, 1 - delta] before x_max

    @property
    def points(self):
        return list(zip(self.x, self.rho))


def integrate_layer(diagram: FundamentalDiagram, params: ModelParams, C: float,
                    rho0: float, side: str = "left", x_max: float | None = None,
                    n_steps: int = 2000) -> LayerProfile:
    """Integrate the layer equation with fixed-step RK4 from the wall value.

    Stops early once a stable rest point is reached to 1e-10.  Leaving
    [0, 1 - delta] is reported through the blew_up flag (the free-flow rest
    point is unstable on the left, so small perturbations genuinely grow).
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if C <= 0.0:
        raise ValueError("layer integration needs a positive throughput C")
    if not 0.0 <= rho0 <= params.rho_max:
        raise ValueError(f"rho0={rho0} outside [0, 1 - delta]")
    if x_max is None:
        x_max = 20.0 * params.H * max(C, 0.01)

    sign = 1.0 if side == "left" else -1.0

    def rhs(r):
        return sign * (1.0 - r) * (float(diagram.flux(r)) - C) / (params.H * C)

    stable = []
    if C <= diagram.max_flux + 1e-12:
        fp = layer_fixed_points(diagram, min(C, diagram.max_flux))
        stable = [fp.rho2] if side == "left" else [fp.rho1, fp.rho3]

    h = x_max / n_steps
    xs = [0.0]
    rhos = [rho0]
    converged_to = None
    blew_up = False
    r = rho0
    for i in range(n_steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        xs.append((i + 1) * h)
        rhos.append(r)
        if r < 0.0 or r > params.rho_max:
            blew_up = True
            break
        hits = [p for p in stable if abs(r - p) < 1e-10]
        if hits:
            converged_to = hits[0]
            break
    return LayerProfile(np.asarray(xs), np.asarray(rhos), side, C, converged_to, blew_up)


@dataclass(frozen=True)
class BoundaryResolution:
    """Outcome of matching wall data to an admissible layer."""

    side: str            # "left" | "right"
    case: str            # "ingoing" | "transonic" | "outgoing"
    rho_wall: float      # layer value directly at the wall
    rho_K: float         # asymptotic value, the scalar boundary datum
    C: float             # constant layer throughput


def resolve_left_boundary(diagram: FundamentalDiagram, params: ModelParams,
                          g2: float, rho_B: float) -> BoundaryResolution:
    """Macroscopic boundary datum at the left wall from prescribed z = g2.

    rho_B is the interior state the layer must connect to.  Ingoing flow
    pins the layer to the free-flow rest point; transonic flow saturates
    the throughput at capacity; outgoing flow leaves the interior in
    charge and the layer only adjusts the wall value.
    """
    if g2 < 0.0:
        raise ValueError(f"g2 must be >= 0, got {g2}")
    if not 0.0 <= rho_B <= 1.0:
        raise ValueError(f"rho_B={rho_B} outside [0, 1]")
    H = params.H
    star = diagram.rho_star
    g2_star = equilibrium_z(diagram, star, H)

    if rho_B <= star:
        if g2 < g2_star:
            rho1 = bisect(lambda r: equilibrium_z(diagram, r, H) - g2, 0.0, star)
            return BoundaryResolution("left", "ingoing", rho1, rho1,
                                      float(diagram.flux(rho1)))
        cap = diagram.max_flux
        wall = 1.0 - (H * cap / g2) ** (1.0 / H)
        return BoundaryResolution("left", "transonic", wall, star, cap)

    threshold = equilibrium_z(diagram, tau(diagram, rho_B), H)
    if g2 < threshold or g2 == 0.0:
        # zero influx is always ingoing (vacuum rest point); this also covers
        # the rho_B = 1 corner where the outgoing threshold degenerates to 0
        rho1 = bisect(lambda r: equilibrium_z(diagram, r, H) - g2, 0.0, star)
        return BoundaryResolution("left", "ingoing", rho1, rho1,
                                  float(diagram.flux(rho1)))
    C = float(diagram.flux(rho_B))
    wall = 1.0 - (H * C / g2) ** (1.0 / H)
    return BoundaryResolution("left", "outgoing", wall, rho_B, C)


def resolve_right_boundary(diagram: FundamentalDiagram, params: ModelParams,
                           g1: float, rho_B: float) -> BoundaryResolution:
    """Macroscopic boundary datum at the right wall from prescribed rho - q = g1."""
    if not 0.0 <= g1 <= 1.0:
        raise ValueError(f"g1 must lie in [0, 1], got {g1}")
    if not 0.0 <= rho_B <= 1.0:
        raise ValueError(f"rho_B={rho_B} outside [0, 1]")
    star = diagram.rho_star
    cap = diagram.max_flux

    def stopped_at(r):
        return r - float(diagram.flux(r))

    if rho_B >= star:
        if g1 > stopped_at(star):
            rho2 = bisect(lambda r: stopped_at(r) - g1, star, 1.0)
            return BoundaryResolution("right", "ingoing", rho2, rho2,
                                      float(diagram.flux(rho2)))
        wall = g1 + cap
        return BoundaryResolution("right", "transonic", wall, star, cap)

    threshold = stopped_at(tau(diagram, rho_B))
    if g1 > threshold:
        rho2 = bisect(lambda r: stopped_at(r) - g1, star, 1.0)
        return BoundaryResolution("right", "ingoing", rho2, rho2,
                                  float(diagram.flux(rho2)))
    C = float(diagram.flux(rho_B))
    return BoundaryResolution("right", "outgoing", g1 + C, rho_B, C)


def lw_closed_forms(H: float, side: str, case: str, g: float,
                    rho_B: float | None = None) -> BoundaryResolution:
    """Closed-form boundary resolutions for the parabolic diagram rho (1 - rho).

    Root finding disappears: the free-flow rest point is explicit for
    H in {1, 2, 3} on the ingoing left branch and everywhere else the
    formulas are algebraic.  Must agree with the generic resolvers.
    """
    if side == "left":
        if case == "ingoing":
            if H == 1.0:
                rho1 = g
            elif H == 2.0:
                rho1 = g / (2.0 + g)
            elif H == 3.0:
                rho1 = (2.0 * g - np.sqrt(12.0 * g + 9.0) + 3.0) / (2.0 * g)
            else:
                raise ValueError(f"no closed ingoing-left form for H={H}; use the generic resolver")
            return BoundaryResolution("left", "ingoing", rho1, rho1, rho1 * (1.0 - rho1))
        if case == "transonic":
            wall = 1.0 - (H / (4.0 * g)) ** (1.0 / H)
            return BoundaryResolution("left", "transonic", wall, 0.5, 0.25)
        if case == "outgoing":
            C = rho_B * (1.0 - rho_B)
            wall = 1.0 - (H * C / g) ** (1.0 / H)
            return BoundaryResolution("left", "outgoing", wall, rho_B, C)
    elif side == "right":
        if case == "ingoing":
            rho2 = np.sqrt(g)
            return BoundaryResolution("right", "ingoing", rho2, rho2, rho2 - g)
        if case == "transonic":
            return BoundaryResolution("right", "transonic", g + 0.25, 0.5, 0.25)
        if case == "outgoing":
            C = rho_B * (1.0 - rho_B)
            return BoundaryResolution("right", "outgoing", g + C, rho_B, C)
    raise ValueError(f"unknown side/case combination {side!r}/{case!r}")
