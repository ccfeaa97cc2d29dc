"""Shared domain types: reaction supports, initial data, grids, fields, problem setup.

The lab studies u_t = (u^m)_xx + a(x) u^p on the line, where a(x) is the
indicator of a reaction region (by default the half-line x > 0).  Everything
downstream (time stepping, profile shooting, rate fitting) consumes the small
immutable types defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "ReactionSupport",
    "CompactBump",
    "PowerTail",
    "LogCorrectedTail",
    "Uniform",
    "Custom",
    "Grid",
    "Field",
    "SolverTolerances",
    "DomainPolicy",
    "ProblemSpec",
    "reaction_coefficient",
    "make_initial_datum",
    "trapezoid",
]


def trapezoid(values, dx):
    """Trapezoid-rule integral of uniformly sampled values."""
    return float(np.trapezoid(values, dx=dx))


# ---------------------------------------------------------------------------
# reaction support
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReactionSupport:
    """Where the reaction u^p acts: a(x) in {0, 1}.

    kind is one of "half_line" (x > 0, with a(0) = 0), "interval"
    (|x| < L), "global", or "none".
    """

    kind: str
    L: float | None = None

    _KINDS = ("half_line", "interval", "global", "none")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown support kind {self.kind!r}")
        if self.kind == "interval":
            if self.L is None or not self.L > 0:
                raise ValueError("interval support needs L > 0")
        elif self.L is not None:
            raise ValueError(f"L is only meaningful for interval support")

    @classmethod
    def half_line(cls):
        return cls("half_line")

    @classmethod
    def interval(cls, L):
        return cls("interval", float(L))

    @classmethod
    def global_(cls):
        return cls("global")

    @classmethod
    def none(cls):
        return cls("none")

    def indicator(self, x):
        """a(x) evaluated elementwise; scalar in, scalar out."""
        x = np.asarray(x, dtype=float)
        if self.kind == "half_line":
            a = (x > 0).astype(float)
        elif self.kind == "interval":
            a = (np.abs(x) < self.L).astype(float)
        elif self.kind == "global":
            a = np.ones_like(x)
        else:
            a = np.zeros_like(x)
        return a if a.ndim else float(a)

    def integration_mask(self, x):
        """Closed-endpoint mask for integrals over the support region.

        a(0) = 0 for the half-line by convention, but the reaction integral
        runs over [0, inf), so the endpoint node is included here.
        """
        x = np.asarray(x, dtype=float)
        if self.kind == "half_line":
            return x >= 0
        if self.kind == "interval":
            return np.abs(x) <= self.L
        if self.kind == "global":
            return np.ones(x.shape, dtype=bool)
        return np.zeros(x.shape, dtype=bool)


def reaction_coefficient(x, support: ReactionSupport):
    """The coefficient a(x): 1 on the reaction support, 0 elsewhere."""
    return support.indicator(x)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompactBump:
    """Smooth bump h*cos^2(pi (x-c)/w) on |x - c| < w/2, exactly zero outside.

    An optional pedestal lifts the whole datum by a small constant.  Runs
    with p < 1 need data that are strictly positive on the reaction support,
    and fast-diffusion runs (m < 1) need strictly positive data for the
    explicit scheme, so those setups use a small pedestal.
    """

    center: float = 0.0
    width: float = 2.0
    height: float = 1.0
    pedestal: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.pedestal < 0:
            raise ValueError("bump needs width > 0, height > 0, pedestal >= 0")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        y = (x - self.center) * (np.pi / self.width)
        bump = np.where(np.abs(x - self.center) < self.width / 2,
                        self.height * np.cos(y) ** 2, 0.0)
        out = bump + self.pedestal
        return out if out.ndim else float(out)

    def tail_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.pedestal)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class PowerTail:
    """Symmetric datum scale*(1+x^2)^(-gamma/2), so u0 ~ |x|^(-gamma) far out."""

    gamma: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValueError("power tail needs gamma > 1 for integrability")
        if not self.scale > 0:
            raise ValueError("power tail needs scale > 0")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = self.scale * (1.0 + x * x) ** (-self.gamma / 2)
        return out if out.ndim else float(out)

    tail_value = value


@dataclass(frozen=True)
class LogCorrectedTail:
    """Datum with far field scale*|x|^(-2/(1-m)) (log|x|)^(1/(1-m)); needs m < 1.

    This is the tail shape that pins the left grow-up rate t^(1/(1-m)) in the
    fast-diffusion linear-reaction regime.  Inside |x| < e the formula is
    frozen at its |x| = e value, which keeps the datum bounded.
    """

    m: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.m < 1:
            raise ValueError("log-corrected tail is only defined for 0 < m < 1")
        if not self.scale > 0:
            raise ValueError("log-corrected tail needs scale > 0")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        r = np.maximum(np.abs(x), math.e)
        q = 1.0 / (1.0 - self.m)
        out = self.scale * r ** (-2.0 * q) * np.log(r) ** q
        return out if out.ndim else float(out)

    tail_value = value


@dataclass(frozen=True)
class Uniform:
    """Spatially constant datum."""

    height: float = 1.0

    def __post_init__(self):
        if not self.height > 0:
            raise ValueError("uniform datum needs height > 0")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.height)
        return out if out.ndim else float(out)

    tail_value = value


@dataclass(frozen=True, eq=False)
class Custom:
    """Datum given by samples on an x-grid; evaluated by linear interpolation.

    Outside the sampled range it continues with the edge values.
    """

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise ValueError("custom datum needs matching 1-d x and value arrays")
        if np.any(np.diff(x) <= 0):
            raise ValueError("custom datum x must be strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("custom datum values must be finite and nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def value(self, xq):
        xq = np.asarray(xq, dtype=float)
        out = np.interp(xq, self.x, self.values)
        return out if out.ndim else float(out)

    tail_value = value


DatumSpec = CompactBump | PowerTail | LogCorrectedTail | Uniform | Custom


# ---------------------------------------------------------------------------
# grid and field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform grid on [x_min, x_max] with n nodes; x = 0 is always a node.

    The reaction coefficient jumps at x = 0, so the jump must sit exactly on
    a node.  Nodes are generated as (i - i0)*dx, which makes node i0 equal to
    0.0 in exact floating point.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("grid needs at least 3 nodes")
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")
        ratio = -self.x_min / self.dx
        if abs(ratio - round(ratio)) > 1e-6:
            raise ValueError("grid must place x = 0 on a node")
        if not (self.x_min <= 0 <= self.x_max):
            raise ValueError("grid must contain x = 0")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def i0(self):
        """Index of the node at x = 0."""
        return int(round(-self.x_min / self.dx))

    @property
    def x(self):
        return (np.arange(self.n) - self.i0) * self.dx

    @classmethod
    def from_spacing(cls, x_min, x_max, dx):
        """Grid with spacing dx covering at least [x_min, x_max], 0 on a node."""
        if dx <= 0:
            raise ValueError("dx must be positive")
        n_left = max(1, math.ceil(-x_min / dx - 1e-12))
        n_right = max(1, math.ceil(x_max / dx - 1e-12))
        return cls(-n_left * dx, n_right * dx, n_left + n_right + 1)


@dataclass(frozen=True, eq=False)
class Field:
    """Sampled nonnegative solution values on a grid at one time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError("field values must match the grid size")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < 0):
            raise ValueError("field values must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def mass(self):
        return trapezoid(self.values, self.grid.dx)

    def sup(self):
        return float(self.values.max())

    def sup_location(self):
        return float(self.grid.x[int(np.argmax(self.values))])

    def interp(self, xq):
        out = np.interp(np.asarray(xq, dtype=float), self.grid.x, self.values)
        return out if out.ndim else float(out)


def make_initial_datum(spec: DatumSpec, grid: Grid) -> Field:
    """Sample a datum on a grid as a time-zero Field."""
    values = np.asarray(spec.value(grid.x), dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError("datum produced invalid samples")
    return Field(grid, values, time=0.0)


# ---------------------------------------------------------------------------
# solver configuration and the full problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverTolerances:
    """Knobs of the explicit solver.

    cfl_safety scales the diffusion stability bound; reaction_safety caps
    the per-step relative change dt * p * u^(p-1) due to the reaction (tight
    values buy accuracy on reaction-dominated runs).  A run escalates to the
    blow-up verdict once the sup-norm passes blowup_threshold.
    """

    cfl_safety: float = 0.45
    reaction_safety: float = 0.02
    eps_cfl: float = 1e-12
    blowup_threshold: float = 1e8
    max_time: float = 10.0
    snapshot_stride: float = 1.0
    far_field_tail_tol: float = 1e-8
    record_target: int = 2000
    record_growth: float = 1.01

    def __post_init__(self):
        if not 0 < self.cfl_safety <= 0.9:
            raise ValueError("cfl_safety must lie in (0, 0.9]")
        if self.blowup_threshold < 1e6:
            raise ValueError("blowup_threshold must be at least 1e6")
        if self.reaction_safety <= 0 or self.max_time <= 0:
            raise ValueError("reaction_safety and max_time must be positive")
        if self.snapshot_stride <= 0:
            raise ValueError("snapshot_stride must be positive")


@dataclass(frozen=True)
class DomainPolicy:
    """Computational window and its expansion rule.

    When the solution at a boundary exceeds far_field_tail_tol times the
    sup-norm, the window is extended by its current width on that side (the
    domain doubles on that side), up to the max_nodes memory cap.
    """

    x_min: float = -20.0
    x_max: float = 20.0
    dx: float = 0.1
    max_nodes: int = 1 << 18
    allow_expansion: bool = True

    def __post_init__(self):
        if self.dx <= 0 or self.x_min >= 0 or self.x_max <= 0:
            raise ValueError("domain needs dx > 0 and x_min < 0 < x_max")
        if self.max_nodes < 3:
            raise ValueError("max_nodes too small")

    def grid(self):
        return Grid.from_spacing(self.x_min, self.x_max, self.dx)


@dataclass(frozen=True)
class ProblemSpec:
    """One full problem: exponents, reaction support, datum, window, knobs.

    boundary selects the far-field treatment: "auto" means zero-flux ends for
    m > 1 (finite propagation speed) and Dirichlet ends held at the datum's
    analytic tail value for m <= 1 (infinite propagation speed); "neumann"
    and "dirichlet_tail" force one choice.
    """

    m: float
    p: float
    support: ReactionSupport = field(default_factory=ReactionSupport.half_line)
    datum: DatumSpec = field(default_factory=CompactBump)
    domain: DomainPolicy = field(default_factory=DomainPolicy)
    tolerances: SolverTolerances = field(default_factory=SolverTolerances)
    boundary: str = "auto"
    probes: tuple = (-1.0, 0.0, 1.0)

    def __post_init__(self):
        if not (self.m > 0 and self.p > 0):
            raise ValueError("exponents m and p must be positive")
        if self.boundary not in ("auto", "neumann", "dirichlet_tail"):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if isinstance(self.datum, LogCorrectedTail) and self.datum.m != self.m:
            raise ValueError("log-corrected tail datum must carry the problem's m")
        if self.p < 1:
            x = self.domain.grid().x
            mask = self.support.integration_mask(x)
            if mask.any():
                vals = np.asarray(self.datum.value(x))[mask]
                if np.any(vals <= 0):
                    raise ValueError(
                        "p < 1 needs a datum strictly positive on the reaction "
                        "support (non-Lipschitz reaction, uniqueness can fail)")

    def initial_field(self) -> Field:
        return make_initial_datum(self.datum, self.domain.grid())

    def with_(self, **kw) -> "ProblemSpec":
        return replace(self, **kw)
