"""Rate extraction from traces: grow-up/blow-up exponents, blow-up sets,
and the doubling-time diagnostic.

All fits are least squares on logarithms; a fit carries its window, its RMS
log-residual, and a reliability verdict (fits with RMS log-residual above
0.1 are flagged unreliable and excluded from comparisons against theory).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pde import Regime, Trace

__all__ = [
    "RateFit",
    "BlowUpSetEstimate",
    "fit_power",
    "fit_exponential",
    "fit_blowup",
    "DoublingSequence",
    "doubling_sequence",
    "blowup_set",
    "RESIDUAL_GATE",
]

RESIDUAL_GATE = 0.1
MIN_POINTS = 8


@dataclass(frozen=True)
class RateFit:
    """One fitted rate law: u ~ t^fitted, u ~ e^(fitted t), or
    sup ~ (T-t)^(-fitted)."""

    law: str                 # "power" | "exponential" | "blowup_power"
    fitted: float
    residual: float          # RMS of log residuals
    window: tuple
    location: float | str    # probe point or "sup"
    T: float | None = None   # only for the blow-up law

    @property
    def reliable(self):
        return self.residual <= RESIDUAL_GATE


def _series_at(trace: Trace, location):
    if isinstance(location, str):
        if location != "sup":
            raise ValueError(f"unknown location {location!r}")
        return trace.sup_norms
    return trace.probe_series(float(location))


def _auto_window(t, u, growth=10.0):
    """Latest window over which the series has grown by at least x10."""
    u_end = u[-1]
    below = np.nonzero(u <= u_end / growth)[0]
    if below.size == 0:
        return float(t[0]), float(t[-1])
    return float(t[below[-1]]), float(t[-1])


def _window_mask(t, u, window, positive=True):
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    if positive:
        mask &= u > 0
    if mask.sum() < MIN_POINTS:
        raise ValueError(f"fewer than {MIN_POINTS} usable points in window {window}")
    return mask

def fit_power(trace: Trace, location="sup", window=None) -> RateFit:
    """Least-squares exponent of u ~ t^a on the window (log-log slope).

    Without an explicit window, uses the latest stretch over which the
    series grew by a factor of ten (rate laws here are late-time
    statements)."""
    t, u = trace.times, _series_at(trace, location)
    if window is None:
        window = _auto_window(t, u)
    mask = _window_mask(t, u, window)
    if t[mask][0] <= 0:
        mask &= t > 0
    lt, lu = np.log(t[mask]), np.log(u[mask])
    slope, icpt = np.polyfit(lt, lu, 1)
    rms = float(np.sqrt(np.mean((lu - (slope * lt + icpt)) ** 2)))
    return RateFit("power", float(slope), rms, window, location)


def fit_exponential(trace: Trace, location="sup", window=None) -> RateFit:
    """Least-squares rate of u ~ e^(rt) on the window (semilog slope)."""
    t, u = trace.times, _series_at(trace, location)
    if window is None:
        window = _auto_window(t, u, growth=math.e ** 2)
    mask = _window_mask(t, u, window)
    lu = np.log(u[mask])
    rate, icpt = np.polyfit(t[mask], lu, 1)
    rms = float(np.sqrt(np.mean((lu - (rate * t[mask] + icpt)) ** 2)))
    return RateFit("exponential", float(rate), rms, window, location)


def fit_blowup(trace: Trace, T: float, window=None) -> RateFit:
    """Exponent gamma of sup ~ (T-t)^(-gamma) near the blow-up time.

    Fits log sup against -log(T-t) on the final window (by default the last
    30% of points with sup above ten times the initial sup)."""
    if trace.regime is not Regime.BLOW_UP:
        raise ValueError("blow-up rate fit needs a blow-up trace")
    t, s = trace.times, trace.sup_norms
    if window is None:
        grown = np.nonzero(s > 10.0 * trace.initial_sup())[0]
        if grown.size < MIN_POINTS:
            raise ValueError("trace has too few grown points for a rate fit")
        i0 = grown[int(math.floor(grown.size * 0.7))]
        window = (float(t[i0]), float(t[-1]))
    if T <= window[1]:
        raise ValueError(f"T = {T} lies inside the fit window {window}")
    mask = _window_mask(t, s, window)
    x = -np.log(T - t[mask])
    y = np.log(s[mask])
    gamma, icpt = np.polyfit(x, y, 1)
    rms = float(np.sqrt(np.mean((y - (gamma * x + icpt)) ** 2)))
    return RateFit("blowup_power", float(gamma), rms, window, "sup", T=T)


@dataclass(frozen=True)
class DoublingSequence:
    """Times t_j at which the running maximum doubles, and the normalized
    gaps z_j = (t_{j+1} - t_j) M(t_j)^(p-1).

    Bounded z_j certify the flat-reaction upper blow-up rate; z_j drifting
    upward is the diagnostic signature of a slower rate."""

    t: np.ndarray
    M: np.ndarray
    z: np.ndarray

    @property
    def max_z(self):
        return float(self.z.max())


def doubling_sequence(trace: Trace, p: float) -> DoublingSequence:
    """Extract the doubling times of M(t) = max over [0, t] of the sup-norm.

    Crossing times are interpolated linearly in (t, log M) between records.
    Requires at least 3 doublings.
    """
    t = trace.times
    M = trace.running_max()
    logM = np.log(M)
    t_list = [float(t[0])]
    M_list = [float(M[0])]
    target = 2.0 * M[0]
    while target <= M[-1]:
        j = int(np.searchsorted(M, target))
        if M[j] == target or j == 0:
            tc = float(t[j])
        else:
            w = (math.log(target) - logM[j - 1]) / (logM[j] - logM[j - 1])
            tc = float(t[j - 1] + w * (t[j] - t[j - 1]))
        t_list.append(tc)
        M_list.append(target)
        target *= 2.0
    if len(t_list) < 4:
        raise ValueError("fewer than 3 doublings recorded; run longer or with "
                         "larger data")
    tj = np.asarray(t_list)
    Mj = np.asarray(M_list)
    z = np.diff(tj) * Mj[:-1] ** (p - 1.0)
    return DoublingSequence(tj, Mj, z)


@dataclass(frozen=True)
class BlowUpSetEstimate:
    """Estimated set where the solution diverges as t -> T.

    interval is (x_left, x_right); whole_window means the marked fraction of
    the initial computational window tends to one (global divergence as far
    as the window can see).  rate_hypothesis_held reports whether the
    sup-location actually tracked the (T-t)^(-1/(p-1)) lower envelope, the
    standing assumption behind one-sided set bounds.
    """

    interval: tuple
    whole_window: bool
    threshold_schedule: str
    confidence: str
    marked_fraction: float
    rate_hypothesis_held: bool | None = None


def blowup_set(trace: Trace, n_snapshots=5, threshold_factor=10.0) -> BlowUpSetEstimate:
    """Estimate the divergence set from the final snapshots.

    At each of the last snapshots, nodes with u >= sup/threshold_factor are
    marked; the estimate is the marked interval of the final snapshot, with
    agreement across snapshots reported as confidence.  The window fraction
    is measured against the run's initial domain (expansion chases growing
    supports, so the initial window is the stable reference).
    """
    if trace.regime is not Regime.BLOW_UP:
        raise ValueError("blow-up set estimation needs a blow-up trace")
    snaps = [s for s in trace.snapshots if s.sup() > 0]
    if len(snaps) < n_snapshots:
        raise ValueError(f"need at least {n_snapshots} snapshots, have {len(snaps)}")
    snaps = snaps[-n_snapshots:]

    if trace.spec is not None:
        window = (trace.spec.domain.x_min, trace.spec.domain.x_max)
    else:
        window = (snaps[0].grid.x_min, snaps[0].grid.x_max)

    intervals = []
    fractions = []
    for snap in snaps:
        theta = snap.sup() / threshold_factor
        x = snap.grid.x
        marked = snap.values >= theta
        inside = (x >= window[0]) & (x <= window[1])
        idx = np.nonzero(marked)[0]
        intervals.append((float(x[idx[0]]), float(x[idx[-1]])))
        denom = max(int(inside.sum()), 1)
        fractions.append(float((marked & inside).sum()) / denom)

    final = intervals[-1]
    frac = fractions[-1]
    whole = frac > 0.95 and all(b >= a - 1e-12 for a, b in
                                zip(fractions[:-1], fractions[1:]))

    lengths = [iv[1] - iv[0] for iv in intervals]
    span = max(abs(final[0]), abs(final[1]), 1e-12)
    stable = max(lengths) - min(lengths) <= 0.25 * max(max(lengths), 1e-12)
    confidence = "high" if stable or whole else "low"

    held = None
    if trace.spec is not None and trace.spec.p > 1 and \
            trace.blowup_time_estimate is not None:
        T = trace.blowup_time_estimate
        p = trace.spec.p
        t, s = trace.times, trace.sup_norms
        mask = (s > 10.0 * trace.initial_sup()) & (t < T)
        if mask.sum() >= MIN_POINTS:
            envelope = (T - t[mask]) ** (-1.0 / (p - 1.0))
            ratio = s[mask] / envelope
            held = bool(ratio.min() >= 0.1 * ratio.max())

    return BlowUpSetEstimate(
        interval=final,
        whole_window=whole,
        threshold_schedule=f"sup/{threshold_factor:g} at the last "
                           f"{n_snapshots} snapshots",
        confidence=confidence,
        marked_fraction=frac,
        rate_hypothesis_held=held,
    )
