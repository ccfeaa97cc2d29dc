"""Explicit solver for u_t = (u^m)_xx + a(x) u^p with blow-up bookkeeping.

The scheme is forward Euler on the conservative central difference of u^m,
with the reaction treated explicitly at the same time level.  Working on the
array of u^m values keeps the stencil well defined through degenerate
(m > 1, free boundary) and singular (m < 1) regimes without ever evaluating
u^(m-1) at u = 0.  The step size is recomputed every step from the current
solution: a diffusion bound cfl_safety*dx^2 / (2 m s^(m-1)) with s the
amplitude that maximizes the local diffusivity (the sup for m >= 1, the
minimum for m < 1), and a reaction bound that caps the per-step relative
growth dt * p * u^(p-1).

A run records a Trace (sup-norm, argmax, mass, energy, probe values, and
periodic snapshots), expands the window when the solution reaches its edge,
and escalates to a blow-up verdict when the sup-norm passes the configured
threshold or the iteration overflows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Field,
    Grid,
    ProblemSpec,
    SolverTolerances,
    Uniform,
    make_initial_datum,
    trapezoid,
)

__all__ = [
    "Regime",
    "Trace",
    "BlowUpEscalation",
    "Stepper",
    "step",
    "run",
    "energy",
    "BlowupTime",
    "estimate_blowup_time",
    "detect_regime",
    "rescale_critical",
    "trace_to_csv",
    "snapshot_to_csv",
]


class Regime(enum.Enum):
    GLOBAL_BOUNDED = "GlobalBounded"
    GROW_UP = "GrowUp"
    BLOW_UP = "BlowUp"
    UNDECIDED = "Undecided"


class BlowUpEscalation(RuntimeError):
    """Raised by step() when the iteration overflows; callers treat it as a
    blow-up signal, not a failure."""

    def __init__(self, time):
        super().__init__(f"solution overflowed at t = {time}")
        self.time = time


@dataclass
class Trace:
    """Time series and snapshots from one run."""

    times: np.ndarray
    sup_norms: np.ndarray
    sup_locations: np.ndarray
    masses: np.ndarray
    energies: np.ndarray
    probe_points: tuple
    probe_values: np.ndarray
    snapshots: list
    regime: Regime = Regime.UNDECIDED
    blowup_time_estimate: float | None = None
    spec: ProblemSpec | None = None
    escalated: bool = False
    completed: bool = False
    diagnostic: str = ""
    expansions: int = 0

    def initial_sup(self):
        return float(self.sup_norms[0])

    def running_max(self):
        """M(t): the running maximum of the sup-norm."""
        return np.maximum.accumulate(self.sup_norms)

    def probe_series(self, x):
        """Time series u(x, t) at a recorded probe point."""
        pts = np.asarray(self.probe_points, dtype=float)
        i = int(np.argmin(np.abs(pts - x)))
        if abs(pts[i] - x) > 1e-9:
            raise ValueError(f"no probe recorded at x = {x}; have {self.probe_points}")
        return self.probe_values[:, i]


def _pow(base, exponent, out):
    """base**exponent into out, with fast paths for the common exponents."""
    if exponent == 1.0:
        np.copyto(out, base)
    elif exponent == 2.0:
        np.multiply(base, base, out=out)
    elif exponent == 3.0:
        np.multiply(base, base, out=out)
        np.multiply(out, base, out=out)
    elif exponent == 0.5:
        np.sqrt(base, out=out)
    else:
        np.power(base, exponent, out=out)
    return out


def _resolve_boundary(spec: ProblemSpec, grid: Grid):
    """Boundary treatment per side: ("neumann", None) or ("dirichlet", value)."""
    mode = spec.boundary
    if mode == "auto":
        mode = "neumann" if spec.m > 1 else "dirichlet_tail"
    if mode == "neumann":
        return ("neumann", None), ("neumann", None)
    left = ("dirichlet", float(spec.datum.tail_value(grid.x[0])))
    right = ("dirichlet", float(spec.datum.tail_value(grid.x[-1])))
    return left, right


class Stepper:
    """Workspace for repeated explicit steps on one grid.

    bc_left / bc_right are ("neumann", None) or ("dirichlet", value).
    """

    def __init__(self, grid: Grid, m, p, support, bc_left=("neumann", None),
                 bc_right=("neumann", None), tolerances: SolverTolerances | None = None):
        self.grid = grid
        self.m = float(m)
        self.p = float(p)
        self.support = support
        self.bc_left = bc_left
        self.bc_right = bc_right
        self.tol = tolerances or SolverTolerances()
        n = grid.n
        self.x = grid.x
        self.dx = grid.dx
        self._um = np.empty(n)
        self._du = np.empty(n)
        a = support.indicator(self.x)
        idx = np.nonzero(a > 0)[0]
        if idx.size and np.all(np.diff(idx) == 1):
            self._react = slice(int(idx[0]), int(idx[-1]) + 1)
        elif idx.size:
            self._react = idx
        else:
            self._react = None
        self._rw = np.empty(idx.size) if idx.size else None

    def stable_dt(self, u, sup=None):
        """Largest safe step from the current state."""
        tol = self.tol
        if sup is None:
            sup = float(u.max())
        if self.m >= 1.0:
            amp = max(sup, tol.eps_cfl)
        else:
            amp = max(float(u.min()), tol.eps_cfl)
        diff_rate = 2.0 * self.m * amp ** (self.m - 1.0)
        dt = tol.cfl_safety * self.dx * self.dx / diff_rate
        if self._react is not None:
            if self.p > 1.0:
                rate = self.p * max(sup, tol.eps_cfl) ** (self.p - 1.0)
            elif self.p == 1.0:
                rate = 1.0
            else:
                lo = max(float(u[self._react].min()), tol.eps_cfl)
                rate = self.p * lo ** (self.p - 1.0)
            dt = min(dt, tol.reaction_safety / rate)
        return dt

    def advance(self, u, dt):
        """One explicit step, in place.  Clamps at zero from below.

        Overflow is deliberately left to produce inf (the run loop treats a
        nonfinite sup-norm as blow-up escalation)."""
        with np.errstate(over="ignore", invalid="ignore"):
            return self._advance(u, dt)

    def _advance(self, u, dt):
        um = _pow(u, self.m, self._um)
        du = self._du
        du[1:-1] = um[:-2]
        du[1:-1] += um[2:]
        du[1:-1] -= 2.0 * um[1:-1]
        if self.bc_left[0] == "neumann":
            du[0] = 2.0 * (um[1] - um[0])
        else:
            du[0] = 0.0
        if self.bc_right[0] == "neumann":
            du[-1] = 2.0 * (um[-2] - um[-1])
        else:
            du[-1] = 0.0
        if self._react is not None:
            rw = _pow(u[self._react], self.p, self._rw)
            rw *= dt
        du *= dt / (self.dx * self.dx)
        u += du
        if self._react is not None:
            u[self._react] += rw
        if self.bc_left[0] == "dirichlet":
            u[0] = self.bc_left[1]
        if self.bc_right[0] == "dirichlet":
            u[-1] = self.bc_right[1]
        np.maximum(u, 0.0, out=u)
        return u


def step(field: Field, spec: ProblemSpec, dt: float) -> Field:
    """One explicit step of the full problem; returns the new Field.

    The caller is responsible for dt respecting the stability bound (run()
    always does).  Overflow raises BlowUpEscalation rather than returning an
    invalid field.
    """
    bc_left, bc_right = _resolve_boundary(spec, field.grid)
    st = Stepper(field.grid, spec.m, spec.p, spec.support, bc_left, bc_right,
                 spec.tolerances)
    u = field.values.copy()
    st.advance(u, dt)
    if not np.all(np.isfinite(u)):
        raise BlowUpEscalation(field.time + dt)
    return Field(field.grid, u, time=field.time + dt)


def energy(field: Field, spec: ProblemSpec) -> float:
    """(1/2) int |(u^m)_x|^2 dx - m/(p+m) int_support u^(p+m) dx.

    Both integrals use the trapezoid rule; the first derivative is central
    in the interior with one-sided differences at the ends.  The reaction
    integral runs over the closed support region (for the half-line, x >= 0).
    """
    u = field.values
    dx = field.grid.dx
    um = u ** spec.m
    dum = np.gradient(um, dx)
    e1 = 0.5 * trapezoid(dum * dum, dx)
    mask = spec.support.integration_mask(field.grid.x)
    if not mask.any():
        return e1
    idx = np.nonzero(mask)[0]
    seg = u[idx[0]:idx[-1] + 1] ** (spec.p + spec.m)
    e2 = spec.m / (spec.p + spec.m) * trapezoid(seg, dx)
    return e1 - e2


def _expand_side(grid: Grid, u, spec: ProblemSpec, side: str):
    """Double the window on one side; new nodes get the datum's tail values."""
    dx = grid.dx
    width = grid.x_max - grid.x_min
    n_add = int(round(width / dx))
    if side == "left":
        new_grid = Grid(grid.x_min - n_add * dx, grid.x_max, grid.n + n_add)
        new_x = new_grid.x[:n_add]
        fill = np.asarray(spec.datum.tail_value(new_x), dtype=float)
        new_u = np.concatenate([fill, u])
    else:
        new_grid = Grid(grid.x_min, grid.x_max + n_add * dx, grid.n + n_add)
        new_x = new_grid.x[-n_add:]
        fill = np.asarray(spec.datum.tail_value(new_x), dtype=float)
        new_u = np.concatenate([u, fill])
    return new_grid, new_u


#: A Dirichlet-held far field only forces expansion once its deviation from
#: the datum's own tail reaches this fraction of the sup-norm.  Fat-tail data
#: grow uniformly far out (that growth is the measured physics, not the bulk
#: reaching the edge), and the pinning error is bounded by the edge deviation,
#: so a much coarser trigger than the Neumann one is appropriate.
_DIRICHLET_EXPAND_FRAC = 1e-3

_EXPAND_CHECK_STRIDE = 16


def run(spec: ProblemSpec) -> Trace:
    """Integrate the problem until max_time, blow-up escalation, or abort.

    The window expands (per DomainPolicy) when the solution reaches an edge:
    for zero-flux ends, when the edge value exceeds far_field_tail_tol times
    the sup-norm; for Dirichlet-held ends, when the node next to the edge
    deviates from the datum tail by a fraction of the sup-norm.  Exceeding
    the node cap aborts with an Undecided trace.
    """
    tol = spec.tolerances
    grid = spec.domain.grid()
    u = np.asarray(spec.datum.value(grid.x), dtype=float).copy()
    if not np.all(np.isfinite(u)) or np.any(u < 0):
        raise ValueError("datum produced invalid samples")
    if spec.m < 1 and u.min() <= 0:
        raise ValueError(
            "fast-diffusion runs (m < 1) need strictly positive data; "
            "use a pedestal or a tail datum")

    bc_left, bc_right = _resolve_boundary(spec, grid)
    st = Stepper(grid, spec.m, spec.p, spec.support, bc_left, bc_right, tol)

    times, sups, locs, masses, energies, probes = [], [], [], [], [], []
    snapshots = []
    probe_pts = np.asarray(spec.probes, dtype=float)
    diagnostic = ""
    escalated = False
    completed = False
    expansions = 0

    t = 0.0
    t_comp = 0.0  # Kahan compensation: dt can be ~1e-14 near steep blow-up
    record_dt = tol.max_time / max(tol.record_target, 10)
    growth = tol.record_growth
    last_rec_sup = -1.0
    last_rec_t = -np.inf
    next_snap_t = 0.0
    snap_sup_level = 0.0
    base_left = float(spec.datum.tail_value(grid.x[0]))
    base_right = float(spec.datum.tail_value(grid.x[-1]))

    def expandable(edge_x):
        # where the reaction covers the edge and the datum is positive
        # there, p <= 1 lifts the whole far field pointwise at one rate;
        # the edge rising is not the bulk arriving, and growing the window
        # just dilutes the grid (a zero-flux end is exact for the uniform
        # lift, and a Dirichlet pinning layer stays thin because the
        # diffusivity decays with amplitude)
        return not (spec.p <= 1 and spec.support.indicator(edge_x) > 0
                    and float(spec.datum.tail_value(edge_x)) > 0)

    def record(sup, force=False):
        nonlocal last_rec_sup, last_rec_t
        if not force:
            if (t - last_rec_t) < record_dt and last_rec_sup > 0 and \
                    sup < growth * last_rec_sup and sup > last_rec_sup / growth:
                return
        if times and t <= times[-1]:
            return
        times.append(t)
        sups.append(sup)
        locs.append(float(st.x[int(np.argmax(u))]))
        masses.append(trapezoid(u, st.dx))
        fld = Field(grid, u, time=t)
        energies.append(energy(fld, spec))
        probes.append(np.interp(probe_pts, st.x, u))
        last_rec_sup = sup
        last_rec_t = t

    def snapshot(sup):
        nonlocal next_snap_t, snap_sup_level
        snapshots.append(Field(grid, u, time=t))
        next_snap_t = t + tol.snapshot_stride
        snap_sup_level = 2.0 * sup

    sup = float(u.max())
    record(sup, force=True)
    snapshot(sup)
    steps = 0

    while True:
        sup = float(u.max())
        if not math.isfinite(sup):
            escalated = True
            diagnostic = "overflow escalation"
            break
        if sup >= tol.blowup_threshold:
            escalated = True
            record(sup, force=True)
            snapshot(sup)
            break
        if t >= tol.max_time:
            completed = True
            break

        if spec.domain.allow_expansion and steps % _EXPAND_CHECK_STRIDE == 0:
            grew = False
            for side in ("left", "right"):
                if side == "left":
                    bc, edge, base = bc_left, u[1] if bc_left[0] == "dirichlet" else u[0], base_left
                    edge_x = grid.x_min
                else:
                    bc, edge, base = bc_right, u[-2] if bc_right[0] == "dirichlet" else u[-1], base_right
                    edge_x = grid.x_max
                if not expandable(edge_x):
                    continue
                frac = (_DIRICHLET_EXPAND_FRAC if bc[0] == "dirichlet"
                        else tol.far_field_tail_tol)
                if edge - base > frac * sup:
                    new_n = grid.n + int(round((grid.x_max - grid.x_min) / grid.dx))
                    if new_n > spec.domain.max_nodes:
                        diagnostic = (f"expansion past {spec.domain.max_nodes} nodes "
                                      f"refused at t = {t:.6g}")
                        break
                    grid, u = _expand_side(grid, u, spec, side)
                    expansions += 1
                    grew = True
            if diagnostic:
                break
            if grew:
                bc_left, bc_right = _resolve_boundary(spec, grid)
                st = Stepper(grid, spec.m, spec.p, spec.support, bc_left,
                             bc_right, tol)
                base_left = float(spec.datum.tail_value(grid.x[0]))
                base_right = float(spec.datum.tail_value(grid.x[-1]))

        dt = min(st.stable_dt(u, sup=sup), tol.max_time - t)
        if dt <= 0 or not math.isfinite(dt):
            diagnostic = f"step size underflow at t = {t:.6g}"
            break
        st.advance(u, dt)
        steps += 1
        # compensated time accumulation
        y = dt - t_comp
        t_new = t + y
        t_comp = (t_new - t) - y
        t = t_new

        sup_new = float(u.max())
        record(sup_new)
        if t >= next_snap_t or sup_new >= snap_sup_level:
            snapshot(sup_new)

    if np.all(np.isfinite(u)):
        sup = float(u.max())
        record(sup, force=True)
        if snapshots[-1].time < t:
            snapshot(sup)

    trace = Trace(
        times=np.asarray(times),
        sup_norms=np.asarray(sups),
        sup_locations=np.asarray(locs),
        masses=np.asarray(masses),
        energies=np.asarray(energies),
        probe_points=tuple(float(q) for q in probe_pts),
        probe_values=np.asarray(probes),
        snapshots=snapshots,
        spec=spec,
        escalated=escalated,
        completed=completed,
        diagnostic=diagnostic,
        expansions=expansions,
    )
    trace.regime = detect_regime(trace)
    if trace.regime is Regime.BLOW_UP:
        if spec.p > 1:
            est = estimate_blowup_time(trace, spec.p)
            trace.blowup_time_estimate = est.time
        else:
            trace.blowup_time_estimate = float(trace.times[-1])
    return trace


def detect_regime(trace: Trace) -> Regime:
    """Classify a completed trace; ambiguous traces stay Undecided."""
    tol = trace.spec.tolerances if trace.spec is not None else SolverTolerances()
    sups = trace.sup_norms
    if trace.escalated or sups.max() >= tol.blowup_threshold:
        return Regime.BLOW_UP
    if not trace.completed:
        return Regime.UNDECIDED
    s0 = max(trace.initial_sup(), 1e-300)
    t_half = trace.times[-1] / 2.0
    seg = sups[trace.times >= t_half]
    if seg.size >= 2:
        nonincreasing = bool(np.all(np.diff(seg) <= 1e-6 * seg[:-1] + 1e-300))
        if nonincreasing and seg.max() <= 10.0 * s0:
            return Regime.GLOBAL_BOUNDED
    last = float(sups[-1])
    if last >= 10.0 * s0 and last >= 0.8 * float(sups.max()):
        return Regime.GROW_UP
    return Regime.UNDECIDED


@dataclass(frozen=True)
class BlowupTime:
    """Extrapolated blow-up time with a confidence flag and the fit window."""

    time: float
    confident: bool
    window: tuple


def estimate_blowup_time(trace: Trace, p: float) -> BlowupTime:
    """Extrapolate T from the tail of a blow-up trace.

    Near T, sup ~ (T-t)^(-1/(p-1)), so y = sup^(-(p-1)) is asymptotically
    linear in t; a least-squares line through the final window of points
    (the last 30% of those with sup above 10x the initial sup) crosses zero
    at T.  A nonmonotone tail falls back to last_time + last_dt with the
    confidence flag lowered.
    """
    if p <= 1:
        raise ValueError("blow-up time extrapolation needs p > 1")
    t = trace.times
    s = trace.sup_norms
    if t.size < 2:
        raise ValueError("trace too short")
    fallback = BlowupTime(float(t[-1] + (t[-1] - t[-2])), False,
                          (float(t[-1]), float(t[-1])))
    grown = np.nonzero(s > 10.0 * trace.initial_sup())[0]
    if grown.size < 10:
        return fallback
    i0 = grown[int(math.floor(grown.size * 0.7))]
    tw = t[i0:]
    yw = s[i0:] ** (-(p - 1.0))
    if tw.size < 3 or np.any(np.diff(yw) >= 0):
        return fallback
    b, a = np.polyfit(tw, yw, 1)
    if b >= 0:
        return fallback
    T = -a / b
    if T < t[-1]:
        return fallback
    return BlowupTime(float(T), True, (float(tw[0]), float(tw[-1])))


def rescale_critical(trace: Trace, m: float) -> Trace:
    """Critical-case diagnostic transform to (xi, tau) = (x t^-a, log t).

    Only defined for runs at p = m + 2, where v = t^a u with a = 1/(m+1)
    satisfies an autonomous drift equation; self-similar decay appears as a
    tau-independent profile.  Restricted to recorded times t > 0.
    """
    if trace.spec is not None and abs(trace.spec.p - (m + 2.0)) > 1e-12:
        raise ValueError("critical rescaling needs p = m + 2")
    a = 1.0 / (m + 1.0)
    keep = trace.times > 0
    t = trace.times[keep]
    scale = t ** a
    new_snaps = []
    for snap in trace.snapshots:
        if snap.time <= 0:
            continue
        s = snap.time ** (-a)
        g = Grid(snap.grid.x_min * s, snap.grid.x_max * s, snap.grid.n)
        new_snaps.append(Field(g, snap.time ** a * snap.values,
                               time=math.log(snap.time)))
    return Trace(
        times=np.log(t),
        sup_norms=scale * trace.sup_norms[keep],
        sup_locations=trace.sup_locations[keep] * t ** (-a),
        masses=trace.masses[keep],
        energies=np.full(t.size, np.nan),
        probe_points=trace.probe_points,
        probe_values=trace.probe_values[keep] * scale[:, None],
        snapshots=new_snaps,
        regime=Regime.UNDECIDED,
        spec=trace.spec,
    )


def trace_to_csv(trace: Trace, path):
    """Write the recorded series as CSV: t, sup_norm, sup_location, mass, energy."""
    with open(path, "w", newline="\n") as fh:
        fh.write("t,sup_norm,sup_location,mass,energy\n")
        for i in range(trace.times.size):
            row = (trace.times[i], trace.sup_norms[i], trace.sup_locations[i],
                   trace.masses[i], trace.energies[i])
            fh.write(",".join(format(v, ".12g") for v in row) + "\n")


def snapshot_to_csv(fld: Field, path):
    """Write one snapshot as CSV: x, u."""
    with open(path, "w", newline="\n") as fh:
        fh.write("x,u\n")
        for xi, ui in zip(fld.grid.x, fld.values):
            fh.write(f"{xi:.12g},{ui:.12g}\n")
