"""Fundamental diagrams, state representations and model-wide audits.

The model tracks two vehicle populations, stopped (velocity 0) and moving
(velocity 1), through the density rho and the flux q.  All states live in
the triangle 0 <= q <= rho <= 1.  A naive linear two-speed relaxation
system cannot preserve that triangle (its invariant region is a rectangle
in the occupation numbers), which is why the braking term makes the
hyperbolic part nonlinear; see the README for the full argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ModelError(Exception):
    """Base class for solver errors."""


class SingularityError(ModelError):
    """A density came too close to the jam value 1."""


class TriangleError(ModelError):
    """A state left the invariant region 0 <= q <= rho <= 1."""


class BracketError(ModelError):
    """A root finder could not bracket its target."""


def bisect(f: Callable[[float], float], lo: float, hi: float,
           tol: float = 1e-12, max_iter: int = 200) -> float:
    """Find a sign change of f on [lo, hi] by plain bisection."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0 or hi - lo < tol:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FundamentalDiagram:
    """Flux law F(rho) with F(0) = F(1) = 0 and a single maximum at rho_star."""

    flux: Callable[[np.ndarray | float], np.ndarray | float]
    deriv: Callable[[np.ndarray | float], np.ndarray | float]
    rho_star: float
    kind: str = "custom"

    def __call__(self, rho):
        return self.flux(rho)

    @property
    def max_flux(self) -> float:
        return float(self.flux(self.rho_star))


def _lw_flux(rho):
    return rho * (1.0 - rho)


def _lw_deriv(rho):
    return 1.0 - 2.0 * rho


def make_diagram(kind: str = "lighthill_whitham",
                 flux: Callable | None = None,
                 deriv: Callable | None = None,
                 rho_star: float | None = None,
                 n_check: int = 10_000) -> FundamentalDiagram:
    """Build a fundamental diagram, validating custom ones by sampling.

    Custom diagrams must vanish at rho = 0 and rho = 1 and have a single
    interior maximum.  The critical density is located by bisection on the
    sign change of the derivative (unless supplied, in which case it is
    checked against the located one).
    """
    if kind == "lighthill_whitham":
        return FundamentalDiagram(_lw_flux, _lw_deriv, 0.5, kind="lighthill_whitham")
    if kind != "custom":
        raise ValueError(f"unknown diagram kind {kind!r}")
    if flux is None or deriv is None:
        raise ValueError("custom diagram needs flux and deriv callables")

    grid = np.linspace(0.0, 1.0, n_check)
    f = np.asarray([float(flux(x)) for x in grid])
    if abs(f[0]) > 1e-12 or abs(f[-1]) > 1e-12:
        raise ValueError(f"flux must vanish at the endpoints, got F(0)={f[0]}, F(1)={f[-1]}")
    if np.any(f[1:-1] < -1e-12):
        raise ValueError("flux must be nonnegative on [0, 1]")

    # sign analysis on the open interval: the derivative may vanish at the
    # endpoints themselves without breaking unimodality
    inner = grid[1:-1]
    d = np.asarray([float(deriv(x)) for x in inner])
    pos = d > 0.0
    changes = np.flatnonzero(pos[:-1] & ~pos[1:])
    if not pos[0] or d[-1] >= 0.0 or len(changes) != 1:
        raise ValueError("flux derivative must change sign exactly once (unimodal diagram)")
    i = changes[0]
    # refine the bracket [inner[i], inner[i+1]] to 1e-10 or better
    star = bisect(lambda r: float(deriv(r)), inner[i], inner[i + 1], tol=1e-12)
    if rho_star is not None and abs(rho_star - star) > 1e-8:
        raise ValueError(f"supplied rho_star={rho_star} but derivative changes sign at {star}")
    if np.any(d[inner < star - 1e-6] <= 0.0) or np.any(d[inner > star + 1e-6] >= 0.0):
        raise ValueError("flux derivative has the wrong sign away from rho_star")
    return FundamentalDiagram(flux, deriv, float(star), kind="custom")


def tau(diagram: FundamentalDiagram, rho: float) -> float:
    """Companion density on the other flank of the diagram: F(tau) = F(rho)."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho={rho} outside [0, 1]")
    star = diagram.rho_star
    if rho == star:
        return star
    target = float(diagram.flux(rho))
    if rho < star:
        return bisect(lambda r: float(diagram.flux(r)) - target, star, 1.0)
    return bisect(lambda r: float(diagram.flux(r)) - target, 0.0, star)


@dataclass(frozen=True)
class ModelParams:
    """Look-ahead exponent H, relaxation time epsilon and the jam guard delta.

    epsilon = 0 selects the relaxed (instantaneous equilibrium) regime;
    epsilon = inf switches the relaxation term off entirely.
    """

    H: float = 1.0
    epsilon: float = 0.1
    delta: float = 1e-10

    def __post_init__(self):
        if not self.H > 0.0:
            raise ValueError(f"look-ahead H must be positive, got {self.H}")
        if self.epsilon < 0.0:
            raise ValueError(f"relaxation time must be >= 0, got {self.epsilon}")
        if not 0.0 < self.delta <= 1e-6:
            raise ValueError(f"delta must lie in (0, 1e-6], got {self.delta}")

    @property
    def rho_max(self) -> float:
        return 1.0 - self.delta


@dataclass(frozen=True)
class MacroState:
    """A point (rho, q) of the state triangle 0 <= q <= rho <= 1."""

    rho: float
    q: float

    _slack = 1e-9

    def __post_init__(self):
        if not (-self._slack <= self.q <= self.rho + self._slack
                and self.rho <= 1.0 + self._slack):
            raise TriangleError(f"state (rho={self.rho}, q={self.q}) outside the triangle")

    @property
    def stopped(self) -> float:
        """Occupation number of the standing population, f1 = rho - q."""
        return self.rho - self.q

    @property
    def moving(self) -> float:
        """Occupation number of the moving population, f2 = q."""
        return self.q


@dataclass(frozen=True)
class ConservativeState:
    """Conserved pair (rho, z) with z = H q / (1 - rho)^H."""

    rho: float
    z: float

    def __post_init__(self):
        if self.z < 0.0:
            raise TriangleError(f"z must be nonnegative, got {self.z}")


def _check_guard(rho: float, params: ModelParams):
    if rho > params.rho_max:
        raise SingularityError(f"rho={rho} exceeds 1 - delta = {params.rho_max}")


def to_conservative(state: MacroState, params: ModelParams) -> ConservativeState:
    """Change variables (rho, q) -> (rho, z), z = H q / (1 - rho)^H."""
    _check_guard(state.rho, params)
    z = params.H * state.q / (1.0 - state.rho) ** params.H
    return ConservativeState(state.rho, z)


def from_conservative(cstate: ConservativeState, params: ModelParams) -> MacroState:
    """Invert the change of variables: q = z (1 - rho)^H / H."""
    _check_guard(cstate.rho, params)
    q = cstate.z * (1.0 - cstate.rho) ** params.H / params.H
    if q > cstate.rho + 1e-9:
        raise TriangleError(f"conservative state maps to q={q} > rho={cstate.rho}")
    return MacroState(cstate.rho, q)


@dataclass(frozen=True)
class EigenStructure:
    """Wave speeds and directions of the homogeneous system at one state."""

    lambda1: float
    lambda2: float
    r1: tuple[float, float]
    r2: tuple[float, float]


def eigenstructure(state: MacroState, params: ModelParams) -> EigenStructure:
    """Eigen decomposition in (rho, q) variables.

    lambda1 = -H q / (1 - rho) <= 0 and lambda2 = 1 exactly; the slow field
    steepens only through the braking term, the fast field is a contact.
    """
    _check_guard(state.rho, params)
    alpha = params.H * state.q / (1.0 - state.rho)
    return EigenStructure(lambda1=-alpha, lambda2=1.0, r1=(1.0, -alpha), r2=(1.0, 1.0))


def genuine_nonlinearity_indicator(state: MacroState, params: ModelParams) -> float:
    """grad(lambda1) . r1 = H q (H - 1) / (1 - rho)^2.

    Vanishes identically for H = 1 (the system is then totally linearly
    degenerate) and on the zero-flux edge.
    """
    _check_guard(state.rho, params)
    return params.H * state.q * (params.H - 1.0) / (1.0 - state.rho) ** 2


def equilibrium(diagram: FundamentalDiagram, rho: float) -> MacroState:
    """Equilibrium state (rho, F(rho))."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho={rho} outside [0, 1]")
    return MacroState(rho, float(diagram.flux(rho)))


def equilibrium_z(diagram: FundamentalDiagram, rho, H: float):
    """Equilibrium value of the conserved variable, H F(rho) / (1 - rho)^H."""
    r = np.asarray(rho, dtype=float)
    out = H * diagram.flux(r) / (1.0 - r) ** H
    return float(out) if np.ndim(rho) == 0 else out


@dataclass(frozen=True)
class SubcharAudit:
    """Result of the stability audit of a diagram against the frozen speeds."""

    passed: bool
    margin: float
    worst_rho: float
    first_violation: float | None
    n_samples: int
    H: float

    def __str__(self):
        verdict = "PASS" if self.passed else "FAIL"
        lines = [f"subcharacteristic audit (H={self.H}, {self.n_samples} samples): {verdict}",
                 f"  min slack {self.margin:.6e} at rho={self.worst_rho:.6f}"]
        if self.first_violation is not None:
            lines.append(f"  first violating sample at rho={self.first_violation:.6f}")
        return "\n".join(lines)


# Equality at isolated samples counts as a pass; the margin is reported
# so borderline diagrams remain visible.
_AUDIT_SLACK = -1e-12


def check_subcharacteristic(diagram: FundamentalDiagram, params: ModelParams,
                            n_samples: int = 1000) -> SubcharAudit:
    """Audit -H F(rho)/(1 - rho) <= F'(rho) <= 1 on a uniform density grid.

    A failing audit means the equilibrium flux is not stable under the
    two-speed dynamics and the relaxed limit cannot be trusted; failure is
    reported, not raised.
    """
    if n_samples < 10:
        raise ValueError("need at least 10 samples")
    grid = np.linspace(0.0, params.rho_max, n_samples)
    f = np.asarray(diagram.flux(grid), dtype=float)
    df = np.asarray(diagram.deriv(grid), dtype=float)
    slack_lower = df + params.H * f / (1.0 - grid)
    slack_upper = 1.0 - df
    slack = np.minimum(slack_lower, slack_upper)
    worst = int(np.argmin(slack))
    violations = np.flatnonzero(slack < _AUDIT_SLACK)
    return SubcharAudit(
        passed=len(violations) == 0,
        margin=float(slack[worst]),
        worst_rho=float(grid[worst]),
        first_violation=float(grid[violations[0]]) if len(violations) else None,
        n_samples=n_samples,
        H=params.H,
    )
