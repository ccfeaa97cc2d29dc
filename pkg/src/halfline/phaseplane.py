"""Phase-plane view of the compact-support profile equation.

The substitution X = xi g'/g, Y = xi^2 g^(1-m)/m, eta = log xi turns
(g^m)'' + beta xi g' - q g = 0 into the autonomous system

    dX/deta = X(1 - mX) + Y(q - beta X)
    dY/deta = Y(2 - (m-1)X)

on the invariant half-plane Y >= 0.  Orbits leave the origin along
X ~ kappa sqrt(Y) (kappa = sqrt(m) g'(0) for profiles normalized to
g(0) = 1) and end at one of the sets at infinity:

  Lambda1 (X -> -inf): zero contacts.  Linear entry Y ~ -D X is the clean
    interface g ~ (xi0-xi)^(1/(m-1)); sublinear entry Y ~ |X|^((m-1)/m) is a
    transversal crossing.
  Lambda2 (X -> q/beta, Y -> inf): positive profiles with the power tail
    g ~ xi^(q/beta).

The orbit separating sublinear-Lambda1 entries from Lambda2 entries is the
compact-support threshold; its kappa equals sqrt(m) times the shooting
module's threshold slope, which makes the two modules independent checks of
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "PhaseParams",
    "Trajectory",
    "vector_field",
    "integrate_from_origin",
    "find_separatrix_kappa",
    "trajectory_to_profile",
    "trajectory_to_csv",
]

X_STOP = 1e7
Y_STOP = 1e14
EPS_START = 1e-8
FAST_SWITCH = 1e6  # speed at which integration switches to arclength


@dataclass(frozen=True)
class PhaseParams:
    """Exponents of the phase-plane system; q = alpha - 1 for the right-half
    (growth) profile, q = alpha for the left-half one."""

    m: float
    q: float
    beta: float

    def __post_init__(self):
        if self.m <= 1:
            raise ValueError("the (X, Y) variables need m > 1")
        if self.beta <= 0:
            raise ValueError("the phase-plane reduction needs beta > 0")

    @classmethod
    def for_psi(cls, m, alpha):
        return cls(m, alpha - 1.0, 0.5 * (m - 1.0) * alpha)

    @classmethod
    def for_phi(cls, m, alpha):
        return cls(m, alpha, 0.5 * (m - 1.0) * alpha)

    @property
    def lambda2_x(self):
        """X-coordinate of the power-tail end state (the tail exponent)."""
        return self.q / self.beta


class Terminal:
    LAMBDA1_LINEAR = "lambda1_linear"
    LAMBDA1_SUBLINEAR = "lambda1_sublinear"
    LAMBDA2 = "lambda2"
    CROSSES_AXIS = "crosses_axis"
    UNRESOLVED = "unresolved"


@dataclass
class Trajectory:
    eta: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    terminal: str
    D: float | None = None        # linear-entry ratio Y ~ -D X
    x_limit: float | None = None  # terminal X for Lambda2

    @property
    def samples(self):
        return self.eta, self.X, self.Y


def vector_field(X, Y, params: PhaseParams):
    """(dX/deta, dY/deta) of the phase-plane system."""
    dX = X * (1.0 - params.m * X) + Y * (params.q - params.beta * X)
    dY = Y * (2.0 - (params.m - 1.0) * X)
    return dX, dY


def _classify(eta, X, Y, params, y_floor):
    m = params.m
    n = X.size
    tail = slice(max(n - max(n // 5, 8), 0), n)
    if X[-1] <= -X_STOP * 0.99:
        Xt, Yt = -X[tail], Y[tail]
        ok = (Xt > 0) & (Yt > 0)
        slope = np.polyfit(np.log(Xt[ok]), np.log(Yt[ok]), 1)[0]
        threshold = 0.5 * (1.0 + (m - 1.0) / m)
        if slope >= threshold:
            return Terminal.LAMBDA1_LINEAR, float(np.median(Yt[ok] / Xt[ok])), None
        return Terminal.LAMBDA1_SUBLINEAR, None, None
    if Y[-1] >= Y_STOP * 0.99:
        return Terminal.LAMBDA2, None, float(X[-1])
    if Y[-1] <= y_floor * 1.01:
        return Terminal.CROSSES_AXIS, None, None
    return Terminal.UNRESOLVED, None, None


def integrate_from_origin(kappa, params: PhaseParams, eta_max=80.0,
                          eps_start=EPS_START, rtol=1e-10) -> Trajectory:
    """Integrate the orbit leaving the origin on the X ~ kappa sqrt(Y)
    manifold (along (q, 1) for kappa = 0) and classify its end state.

    The eta-flow is switched to arclength once |dX| + |dY| passes the speed
    threshold, so escapes to infinity are traversed in a few steps.
    """
    Y0 = eps_start
    X0 = kappa * math.sqrt(Y0) if kappa != 0.0 else params.q * Y0
    y_floor = 1e-3 * Y0

    def rhs_eta(_, v):
        return vector_field(v[0], v[1], params)

    def ev_fast(_, v):
        dX, dY = vector_field(v[0], v[1], params)
        return abs(dX) + abs(dY) - FAST_SWITCH

    ev_fast.terminal = True

    def ev_axis(_, v):
        return v[1] - y_floor

    ev_axis.terminal = True
    ev_axis.direction = -1

    sol = solve_ivp(rhs_eta, (0.0, eta_max), (X0, Y0), method="LSODA",
                    events=(ev_fast, ev_axis), rtol=rtol, atol=1e-14,
                    dense_output=True)
    etas = np.linspace(0.0, sol.t[-1], 1500)
    vals = sol.sol(etas)
    eta_all, X_all, Y_all = [etas], [vals[0]], [vals[1]]

    if sol.status == 1 and sol.t_events[0].size:
        # arclength continuation through the fast escape
        eta0 = sol.t[-1]
        v0 = sol.y[:, -1]

        def rhs_arc(_, w):
            dX, dY = vector_field(w[0], w[1], params)
            speed = math.hypot(dX, dY)
            return (dX / speed, dY / speed, 1.0 / speed)

        def ev_xstop(_, w):
            return abs(w[0]) - X_STOP

        ev_xstop.terminal = True

        def ev_ystop(_, w):
            return w[1] - Y_STOP

        ev_ystop.terminal = True

        s_max = 10.0 * (X_STOP + Y_STOP)
        sol2 = solve_ivp(rhs_arc, (0.0, s_max), (v0[0], v0[1], eta0),
                         events=(ev_xstop, ev_ystop), method="LSODA",
                         rtol=rtol, atol=1e-12, dense_output=True)
        ss = np.linspace(0.0, sol2.t[-1], 1500)
        w = sol2.sol(ss)
        eta_all.append(w[2])
        X_all.append(w[0])
        Y_all.append(w[1])

    eta = np.concatenate(eta_all)
    X = np.concatenate(X_all)
    Y = np.maximum(np.concatenate(Y_all), 0.0)
    terminal, D, x_lim = _classify(eta, X, Y, params, y_floor)
    return Trajectory(eta, X, Y, terminal, D, x_lim)


def find_separatrix_kappa(params: PhaseParams, tol=1e-6, kappa_hi=64.0) -> float:
    """Launch parameter of the orbit joining the origin to the linear entry
    of Lambda1: below it orbits enter Lambda1 sublinearly, above it they go
    to Lambda2."""
    if not params.q < 0:
        raise ValueError("the separatrix search applies to the q = alpha - 1 system")

    def classify(kappa):
        return integrate_from_origin(kappa, params).terminal

    lo = 0.0
    if classify(lo) != Terminal.LAMBDA1_SUBLINEAR:
        raise RuntimeError("kappa = 0 did not enter Lambda1 sublinearly; no bracket")
    hi = 1.0
    while classify(hi) != Terminal.LAMBDA2:
        hi *= 2.0
        if hi > kappa_hi:
            raise RuntimeError(f"no Lambda2 orbit found for kappa up to {kappa_hi}")
    for _ in range(200):
        if hi - lo <= tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        c = classify(mid)
        if c == Terminal.LAMBDA2:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def trajectory_to_profile(traj: Trajectory, params: PhaseParams, g0=1.0):
    """Undo the change of variables: reconstruct (xi, g) with g(0) = g0.

    The launch at Y = Y0 with g ~ g0 pins xi_launch = sqrt(m Y0 g0^(m-1));
    then xi = xi_launch e^eta and g = (xi^2 / (m Y))^(1/(m-1)).
    """
    m = params.m
    xi_launch = math.sqrt(m * traj.Y[0] * g0 ** (m - 1.0))
    xi = xi_launch * np.exp(traj.eta - traj.eta[0])
    ok = traj.Y > 0
    g = np.full(xi.shape, np.nan)
    g[ok] = (xi[ok] ** 2 / (m * traj.Y[ok])) ** (1.0 / (m - 1.0))
    return xi, g


def trajectory_to_csv(traj: Trajectory, path):
    """Write trajectory samples as CSV: eta, X, Y, terminal."""
    with open(path, "w", newline="\n") as fh:
        fh.write("eta,X,Y,terminal\n")
        for row in zip(traj.eta, traj.X, traj.Y):
            fh.write(",".join(format(v, ".12g") for v in row)
                     + f",{traj.terminal}\n")
