"""Self-similar profile ODEs: integration, classification, and shooting.

Separated-variables and self-similar solutions of u_t = (u^m)_xx + a(x) u^p
reduce to second-order profile ODEs in a similarity variable.  All of them
fit one template when written as a first-order system in (f, s) with
s = (f^m)', which stays regular through contacts f -> 0:

  kind "psi"          (f^m)'' + b x f' + (1-a) f = 0      right half, growth e^{at}
  kind "phi"          (f^m)'' + b x f' - a f    = 0       left half (mirrored)
  kind "gp"           (f^m)'' + b x f' - q f    = 0       generic, from the contact
  kind "blowup_sub"   (f^m)'' - b x f' + f^p - a f = 0    blow-up subsolution
  kind "blowup_outer" (f^m)'' - b x f' - a f    = 0       blow-up far field,.
                                                          integrated on the
                                                          mirrored axis

Shooting parameters: the initial slope lambda for psi/phi, the initial flux
mu = (f^m)'(0) for the degenerate-start blow-up profile, and the initial
slope for the outer blow-up profile.  Bisection on these parameters locates
the compact-support thresholds lambda_plus, lambda_minus, their matching
point alpha_star, and the zero-returning blow-up profile mu_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "flat_ode",
    "flat_blowup_time",
    "FlatODEBlowUp",
    "barenblatt",
    "barenblatt_k",
    "ProfileProblem",
    "ProfileClass",
    "ProfileOutcome",
    "integrate_profile",
    "profile_residual",
    "find_lambda_plus",
    "find_lambda_minus",
    "MatchResult",
    "find_alpha_star",
    "Mu0Result",
    "find_mu0",
    "LinearProfile",
    "linear_profile",
    "Subsolution",
    "build_subsolution_p_lt_1",
    "blowup_outer_profile",
    "GrowUpExp",
    "GrowUpPow",
    "BlowUpMode",
    "selfsimilar_eval",
    "profile_to_csv",
]

TOL_LAMBDA = 1e-8
TOL_ALPHA = 1e-6
XI_MAX_DEFAULT = 1e3
LAMBDA_CAP = 1e3

# A contact is detected when f drops to a floor above the singular f = 0
# line, where f' = s f^(1-m)/m blows up for m > 1.  The floor grows with m
# (step sizes near a transversal contact shrink like f^m, so the floor must
# keep f^m above roundoff); the clean/bad discrimination threshold scales
# with it: a clean interface arrives with |(f^m)'| ~ f while a transversal
# crossing arrives with |(f^m)'| = O(1).
F_FLOOR_REL = 1e-6
F_BIG_REL = 1e6
SLOPE_TOL = 1e-4


def _f_floor_rel(m):
    return max(F_FLOOR_REL, 10.0 ** (-12.0 / max(m, 1.0)))


def _slope_tol(m):
    return max(SLOPE_TOL, 100.0 * _f_floor_rel(m))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

class FlatODEBlowUp(ArithmeticError):
    """Signals that the space-free reaction ODE has blown up by time t."""

    def __init__(self, blowup_time):
        super().__init__(f"flat solution blows up at T = {blowup_time}")
        self.blowup_time = blowup_time


def flat_blowup_time(u0, p):
    """Blow-up time of U' = U^p, U(0) = u0 (finite only for p > 1)."""
    if p <= 1:
        return math.inf
    return u0 ** (1.0 - p) / (p - 1.0)


def flat_ode(u0, p, t):
    """Closed-form solution of U' = U^p, U(0) = u0, the no-diffusion bound."""
    if u0 <= 0:
        raise ValueError("flat solution needs u0 > 0")
    t = np.asarray(t, dtype=float)
    if p == 1.0:
        out = u0 * np.exp(t)
    elif p < 1.0:
        out = ((1.0 - p) * t + u0 ** (1.0 - p)) ** (1.0 / (1.0 - p))
    else:
        T = flat_blowup_time(u0, p)
        if np.any(t >= T):
            raise FlatODEBlowUp(T)
        out = (u0 ** (1.0 - p) - (p - 1.0) * t) ** (-1.0 / (p - 1.0))
    return out if out.ndim else float(out)


def barenblatt_k(m):
    return (m - 1.0) / (2.0 * m * (m + 1.0))


def barenblatt(x, t, D, m):
    """Source-type self-similar solution of the porous medium equation (m > 1)."""
    if m <= 1:
        raise ValueError("the explicit compact-support solution needs m > 1")
    if D <= 0 or np.any(np.asarray(t) <= 0):
        raise ValueError("need D > 0 and t > 0")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    arg = D - barenblatt_k(m) * x * x * t ** (-2.0 / (m + 1.0))
    out = t ** (-1.0 / (m + 1.0)) * np.maximum(arg, 0.0) ** (1.0 / (m - 1.0))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# profile problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileProblem:
    """One profile ODE instance; use the classmethod constructors."""

    kind: str
    m: float
    alpha: float
    beta: float
    shoot: float
    q: float = 0.0
    xi0: float = 0.0
    reaction_p: float | None = None
    drift_on_derivative: bool = True

    @classmethod
    def psi(cls, m, alpha, lam):
        """Right-half exponential-growth profile; f(0)=1, f'(0)=lam."""
        beta = 0.5 * (m - 1.0) * alpha
        return cls("psi", m, alpha, beta, lam, q=alpha - 1.0)

    @classmethod
    def phi(cls, m, alpha, lam, beta=None):
        """Left-half profile on the mirrored axis; f(0)=1, f'(0)=-lam."""
        if beta is None:
            beta = 0.5 * (m - 1.0) * alpha
        return cls("phi", m, alpha, beta, lam, q=alpha)

    @classmethod
    def gp(cls, m, beta, q, xi0):
        """Generic compact-support problem started from the contact at xi0."""
        if beta <= 0 or xi0 <= 0:
            raise ValueError("contact-started problem needs beta > 0 and xi0 > 0")
        return cls("gp", m, 0.0, beta, 0.0, q=q, xi0=xi0)

    @classmethod
    def blowup_sub(cls, m, p, mu):
        """Degenerate-start blow-up subsolution profile; (f^m)'(0) = mu."""
        alpha = 1.0 / (p - 1.0)
        beta = 0.5 * (p - m) * alpha
        return cls("blowup_sub", m, alpha, beta, mu, reaction_p=p)

    @classmethod
    def blowup_outer(cls, m, p, slope, drift_on_derivative=True):
        """Far-field blow-up profile on the reaction-free side, mirrored."""
        alpha = 1.0 / (p - 1.0)
        beta = 0.5 * (p - m) * alpha
        return cls("blowup_outer", m, alpha, beta, slope,
                   drift_on_derivative=drift_on_derivative)

    def rhs(self):
        """(f, s) -> (f', s') with s = (f^m)'; f' recovered away from f = 0."""
        m = self.m
        floor = 1e-30

        if self.kind in ("psi", "phi", "gp"):
            q, beta = self.q, self.beta

            def fun(x, y):
                f, s = y
                fp = s if m == 1.0 else s * max(f, floor) ** (1.0 - m) / m
                return (fp, -beta * x * fp + q * f)

        elif self.kind == "blowup_sub":
            alpha, beta, p = self.alpha, self.beta, self.reaction_p

            def fun(x, y):
                f, s = y
                fc = max(f, 0.0)
                fp = s if m == 1.0 else s * max(f, floor) ** (1.0 - m) / m
                return (fp, beta * x * fp + alpha * f - fc ** p)

        else:  # blowup_outer on the mirrored axis z = -x
            alpha, beta = self.alpha, self.beta
            if self.drift_on_derivative:
                def fun(z, y):
                    f, s = y
                    fp = s if m == 1.0 else s * max(f, floor) ** (1.0 - m) / m
                    return (fp, beta * z * fp + alpha * f)
            else:
                # literal reading with the drift acting on f itself
                def fun(z, y):
                    f, s = y
                    fp = s if m == 1.0 else s * max(f, floor) ** (1.0 - m) / m
                    return (fp, -beta * z * f + alpha * f)

        return fun

    def start(self):
        """(xi_start, (f, s), direction) for the integration."""
        m = self.m
        if self.kind == "psi":
            return 0.0, (1.0, m * self.shoot), +1
        if self.kind == "phi":
            return 0.0, (1.0, -m * self.shoot), +1
        if self.kind == "blowup_sub":
            eps = 1e-8
            mu = self.shoot
            return eps, ((mu * eps) ** (1.0 / m), mu), +1
        if self.kind == "blowup_outer":
            return 0.0, (1.0, m * self.shoot), +1
        # gp: series expansion at the degenerate contact, integrated backward
        eps = 1e-6 * self.xi0
        C = (self.beta * self.xi0 * (m - 1.0) / m) ** (1.0 / (m - 1.0))
        f = C * eps ** (1.0 / (m - 1.0))
        s = -(C ** m) * (m / (m - 1.0)) * eps ** (1.0 / (m - 1.0))
        return self.xi0 - eps, (f, s), -1


class ProfileClass:
    CROSSES_ZERO_BAD_SLOPE = "crosses_zero_bad_slope"
    COMPACT_SUPPORT_CLEAN = "compact_support_clean"
    POSITIVE_DECAYING = "positive_decaying"
    POSITIVE_UNBOUNDED = "positive_unbounded"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ProfileOutcome:
    """Result of integrating one profile ODE."""

    classification: str
    xi: np.ndarray
    f: np.ndarray
    fm_prime: np.ndarray
    xi_stop: float | None = None
    slope_at_stop: float | None = None
    tail_exponent: float | None = None
    flagged: bool = False

    @property
    def samples(self):
        return self.xi, self.f


def _integrate(problem: ProfileProblem, x0, y0, x1, rtol=1e-9, atol=1e-12,
               n_samples=2400, f_floor=None):
    """Integrate from (x0, y0) toward x1 with zero/blow events; raw results."""
    f_scale = max(abs(y0[0]), 1.0)
    if f_floor is None:
        f_floor = _f_floor_rel(problem.m) * f_scale
    f_big = F_BIG_REL * f_scale

    def ev_zero(x, y):
        return y[0] - f_floor

    ev_zero.terminal = True
    ev_zero.direction = -1

    def ev_big(x, y):
        return y[0] - f_big

    ev_big.terminal = True
    ev_big.direction = 1

    # LSODA: decaying tails with m > 1 are stiff in (f, s) since
    # f' = s f^(1-m)/m amplifies as f -> 0
    try:
        sol = solve_ivp(problem.rhs(), (x0, x1), y0, method="LSODA",
                        events=(ev_zero, ev_big), rtol=rtol, atol=atol,
                        dense_output=True)
    except ValueError:
        # event root-finding can fail when the step size underflows right at
        # a transversal contact; a stiff implicit method usually gets closer
        try:
            sol = solve_ivp(problem.rhs(), (x0, x1), y0, method="Radau",
                            events=(ev_zero, ev_big), rtol=rtol, atol=atol,
                            dense_output=True)
        except ValueError:
            return None, np.array([x0]), np.array([[y0[0]], [y0[1]]]), f_floor
    x_end = sol.t[-1]
    xs = np.linspace(x0, x_end, n_samples)
    ys = sol.sol(xs)
    return sol, xs, ys, f_floor


def integrate_profile(problem: ProfileProblem, xi_max=XI_MAX_DEFAULT,
                      rtol=1e-9, atol=1e-12, auto_extend=2) -> ProfileOutcome:
    """Integrate a profile problem and classify the outcome.

    Events: f reaching ~0 (contact; the sign and size of (f^m)' there decide
    clean versus transversal crossing), f exceeding a large multiple of its
    initial scale (unbounded), or reaching xi_max (classified by the tail;
    an inconclusive tail retries with 4x the range, at most auto_extend
    times).
    """
    x0, y0, direction = problem.start()
    x1 = 0.0 if direction < 0 else xi_max
    sol, xs, ys, f_floor = _integrate(problem, x0, y0, x1, rtol, atol)
    f, s = ys
    out = ProfileOutcome("", xi=xs, f=np.maximum(f, 0.0), fm_prime=s)
    if sol is None:
        out.classification = ProfileClass.INCONCLUSIVE
        out.flagged = True
        return out
    slope_scale = max(abs(y0[1]), 1.0)

    if sol.status == 1 and sol.t_events[0].size:  # touched zero
        x_stop = float(sol.t_events[0][0])
        s_stop = float(sol.y_events[0][0][1])
        out.xi_stop = x_stop
        out.slope_at_stop = s_stop
        if abs(s_stop) <= _slope_tol(problem.m) * slope_scale:
            out.classification = ProfileClass.COMPACT_SUPPORT_CLEAN
        else:
            out.classification = ProfileClass.CROSSES_ZERO_BAD_SLOPE
        return out

    if sol.status == 1 and sol.t_events[1].size:
        out.classification = ProfileClass.POSITIVE_UNBOUNDED
        return out

    if sol.status != 0:
        out.classification = ProfileClass.INCONCLUSIVE
        out.flagged = True
        return out

    if direction < 0:
        # contact-started problem integrated back to the origin: no event
        # means the profile stayed positive on (0, xi0)
        out.classification = ProfileClass.POSITIVE_DECAYING
        return out

    # reached xi_max: look at the last decade
    x_end = sol.t[-1]
    lo = max(x_end / 10.0, x0 + 0.1 * (x_end - x0))
    tail = np.linspace(lo, x_end, 60)
    ft = np.maximum(sol.sol(tail)[0], f_floor)
    slope = float(np.polyfit(np.log(tail), np.log(ft), 1)[0])
    out.tail_exponent = slope
    fp_end = problem.rhs()(x_end, sol.y[:, -1])[0]
    if fp_end > 0 or slope > 0.05:
        out.classification = ProfileClass.POSITIVE_UNBOUNDED
    elif slope < -0.05:
        out.classification = ProfileClass.POSITIVE_DECAYING
    else:
        if auto_extend > 0:
            return integrate_profile(problem, 4.0 * xi_max, rtol, atol,
                                     auto_extend - 1)
        out.classification = ProfileClass.INCONCLUSIVE
    return out


def profile_residual(outcome: ProfileOutcome, problem: ProfileProblem):
    """Max normalized defect of the sampled profile in its own equation.

    Reconstructs (f^m)'' and f' by fourth-order finite differences on the
    sample grid and evaluates the profile equation pointwise, normalized by
    1 + |f|^max(p,1).  Points within a few nodes of a contact are excluded
    (u^m is not smooth there).
    """
    xi, f = outcome.xi, outcome.f
    h = xi[1] - xi[0]
    fm = f ** problem.m
    d1 = np.zeros_like(f)
    d2 = np.zeros_like(f)
    d1[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    d2[2:-2] = (-fm[4:] + 16 * fm[3:-1] - 30 * fm[2:-2] + 16 * fm[1:-3]
                - fm[:-4]) / (12 * h * h)
    x = xi
    if problem.kind in ("psi", "phi", "gp"):
        res = d2 + problem.beta * x * d1 - problem.q * f
    elif problem.kind == "blowup_sub":
        res = d2 - problem.beta * x * d1 + f ** problem.reaction_p - problem.alpha * f
    else:
        res = d2 - problem.beta * x * d1 - problem.alpha * f
    p_eff = problem.reaction_p if problem.reaction_p is not None else 1.0
    norm = 1.0 + np.abs(f) ** max(p_eff, 1.0)
    ok = np.ones(f.size, dtype=bool)
    ok[:2] = ok[-2:] = False
    near_contact = f < 1e-4 * max(f.max(), 1e-30)
    for shift in (-2, -1, 0, 1, 2):
        ok &= ~np.roll(near_contact, shift)
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(res[ok]) / norm[ok]))


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------

def _bisect_parameter(classify, lo, hi, low_class, tol=TOL_LAMBDA, max_iter=200):
    """Bisect between parameter values whose classifications differ.

    classify(c) must return a profile class; low_class is the class(es)
    belonging to the lower side of the threshold.  Returns (lo, hi, hit)
    where hit is a parameter that classified as a clean contact, if one was
    found (the bracket is then the one current at that point).
    """
    if isinstance(low_class, str):
        low_class = (low_class,)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        c = classify(mid)
        if c == ProfileClass.COMPACT_SUPPORT_CLEAN:
            return lo, hi, mid
        if c in low_class:
            lo = mid
        else:
            hi = mid
    return lo, hi, None


def _contact_slope(m, beta, q, rtol=1e-11, atol=1e-14):
    """Normalized origin slope of the clean-contact profile, by backward
    integration.

    The compact-support profile is the unique orbit entering the contact
    with f ~ (xi0 - xi)^(1/(m-1)); the equation's scaling group
    f -> k^(2/(m-1)) f(./k) moves the contact, so anchoring it at xi0 = 1,
    integrating back to the origin, and renormalizing to f(0) = 1 gives the
    threshold slope directly: lambda = f'(0) * f(0)^((m-3)/2).

    Returns None when the backward orbit hits zero inside (0, 1), i.e. no
    clean profile reaches the origin (this happens exactly when
    2*beta + q <= 0).
    """
    problem = ProfileProblem.gp(m, beta, q, 1.0)
    x0, y0, _ = problem.start()
    # the vanishing branch dives transversally; a floor at a fraction of the
    # contact coefficient detects it long before the singular f = 0 line
    # (the start sits below the floor, which is fine: the contact event only
    # fires on downward crossings)
    C = (beta * (m - 1.0) / m) ** (1.0 / (m - 1.0))
    sol, xs, ys, _ = _integrate(problem, x0, y0, 0.0, rtol, atol, n_samples=8,
                                f_floor=1e-3 * C)
    if sol is None or sol.status == 1 or sol.t[-1] > 1e-12:
        return None
    g0, s0 = sol.y[0, -1], sol.y[1, -1]
    if g0 <= 0:
        return None
    gp0 = s0 * g0 ** (1.0 - m) / m
    return gp0 * g0 ** ((m - 3.0) / 2.0)


def find_lambda_plus(m, alpha, xi_max=XI_MAX_DEFAULT, tol=TOL_LAMBDA):
    """Initial slope at which the right-half profile touches zero cleanly.

    Below it the profile crosses zero transversally; above it the profile
    stays positive with a power tail.  Exists only for alpha > 1/m; vanishes
    at alpha = 2/(m+1).

    Bisection between the two transversal behaviours brackets the threshold
    to the resolution of the contact classifier (~1e-4 here: profiles hug
    the separatrix below the detection floor); the backward-from-contact
    value refines it to tol when it falls inside the bracket.
    """
    if m <= 1:
        raise ValueError("compact-support shooting needs m > 1")
    if not (1.0 / m < alpha <= 2.0 / (m + 1.0) + 1e-12):
        raise ValueError(f"alpha = {alpha} outside (1/m, 2/(m+1)]")

    def classify(lam):
        return integrate_profile(ProfileProblem.psi(m, alpha, lam), xi_max).classification

    lo = -1.0
    while classify(lo) != ProfileClass.CROSSES_ZERO_BAD_SLOPE:
        lo *= 2.0
        if lo < -LAMBDA_CAP:
            raise RuntimeError("no transversal crossing found for very negative slopes")
    hi = 0.5
    while classify(hi) == ProfileClass.CROSSES_ZERO_BAD_SLOPE:
        hi *= 2.0
        if hi > LAMBDA_CAP:
            raise RuntimeError("no positive profile found below the slope cap")
    lo, hi, hit = _bisect_parameter(classify, lo, hi,
                                    ProfileClass.CROSSES_ZERO_BAD_SLOPE, tol)
    slack = 1e-6 * max(1.0, abs(lo), abs(hi))
    exact = _contact_slope(m, 0.5 * (m - 1.0) * alpha, alpha - 1.0)
    if exact is not None and lo - slack <= exact <= hi + slack:
        return exact
    return hit if hit is not None else 0.5 * (lo + hi)


def _find_lambda_minus_at(m, alpha, beta, xi_max=XI_MAX_DEFAULT, tol=TOL_LAMBDA):
    def classify(lam):
        return integrate_profile(ProfileProblem.phi(m, alpha, lam, beta=beta),
                                 xi_max).classification

    lo = 0.0
    if classify(lo) != ProfileClass.POSITIVE_UNBOUNDED:
        raise RuntimeError("zero slope did not give an unbounded profile; "
                           "no bracket for the compact-support threshold")
    hi = 1.0
    while classify(hi) != ProfileClass.CROSSES_ZERO_BAD_SLOPE:
        hi *= 2.0
        if hi > LAMBDA_CAP:
            raise RuntimeError(f"no crossing profile found for lambda up to {LAMBDA_CAP}")
    lo, hi, hit = _bisect_parameter(classify, lo, hi,
                                    ProfileClass.POSITIVE_UNBOUNDED, tol)
    if beta > 0:
        slack = 1e-6 * max(1.0, abs(lo), abs(hi))
        exact = _contact_slope(m, beta, alpha)
        if exact is not None and lo - slack <= -exact <= hi + slack:
            return -exact  # phi runs with f'(0) = -lambda
    return hit if hit is not None else 0.5 * (lo + hi)


def find_lambda_minus(m, alpha, xi_max=XI_MAX_DEFAULT, tol=TOL_LAMBDA):
    """Initial slope at which the left-half profile has a clean interface.

    Below it the profile is positive and unbounded, above it crosses zero
    transversally.  Scales like sqrt(alpha): substituting xi -> xi/sqrt(alpha)
    removes alpha from the equation and multiplies the slope by sqrt(alpha).
    """
    if m <= 1:
        raise ValueError("compact-support shooting needs m > 1")
    if not (0.0 < alpha < 2.0 / (m + 1.0)):
        raise ValueError(f"alpha = {alpha} outside (0, 2/(m+1))")
    return _find_lambda_minus_at(m, alpha, 0.5 * (m - 1.0) * alpha, xi_max, tol)


@dataclass(frozen=True)
class MatchResult:
    """Matched growth exponent where both half-profiles have clean interfaces."""

    alpha_star: float
    lambda_at_match: float
    gamma_star: float
    bracket: tuple

    def alpha_of_gamma(self, gamma, m):
        """Growth exponent selected by a right-tail decay x^(-gamma)."""
        return 2.0 / (2.0 + gamma * (m - 1.0))


def lambda_gap(m, alpha, xi_max=XI_MAX_DEFAULT):
    """h(alpha) = lambda_plus - lambda_minus via the backward-contact route
    (falls back to shooting when the contact orbit does not reach the
    origin)."""
    beta = 0.5 * (m - 1.0) * alpha
    lp = _contact_slope(m, beta, alpha - 1.0)
    if lp is None:
        lp = find_lambda_plus(m, alpha, xi_max)
    lmn = _contact_slope(m, beta, alpha)
    lmn = -lmn if lmn is not None else find_lambda_minus(m, alpha, xi_max)
    return lp - lmn


def find_alpha_star(m, tol=TOL_ALPHA, xi_max=XI_MAX_DEFAULT) -> MatchResult:
    """The unique growth exponent where lambda_plus = lambda_minus.

    h(alpha) = lambda_plus - lambda_minus changes sign exactly once on
    (1/m, 2/(m+1)); bisection on the sign of h.
    """
    if m <= 1:
        raise ValueError("the matching exponent exists only for m > 1")
    a_lo = 1.0 / m
    a_hi = 2.0 / (m + 1.0)
    pad = 1e-4 * (a_hi - a_lo)
    lo, hi = a_lo + pad, a_hi - pad

    def h(alpha):
        return lambda_gap(m, alpha, xi_max)

    h_lo, h_hi = h(lo), h(hi)
    if not (h_lo > 0 > h_hi):
        raise RuntimeError(
            f"no sign change of lambda_plus - lambda_minus on ({lo}, {hi}): "
            f"h({lo:.6f}) = {h_lo:.3e}, h({hi:.6f}) = {h_hi:.3e}; "
            "suspect integration tolerances")
    bracket = (lo, hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    alpha_star = 0.5 * (lo + hi)
    lam = find_lambda_plus(m, alpha_star, xi_max)
    gamma_star = 2.0 * (1.0 - alpha_star) / ((m - 1.0) * alpha_star)
    return MatchResult(alpha_star, lam, gamma_star, bracket)


@dataclass(frozen=True)
class Mu0Result:
    """Initial flux whose degenerate-start profile returns to zero, and where."""

    mu0: float
    xi0: float


def find_mu0(m, p, xi_max=XI_MAX_DEFAULT, tol=TOL_LAMBDA) -> Mu0Result:
    """Locate a blow-up subsolution profile that returns to zero.

    Works in the range 1 < p <= m, where the drift term is a damping; large
    initial flux forces a crossing (the rescaled limit is a concave free
    oscillation), so the threshold is bracketed from above.
    """
    if not (1.0 < p <= m):
        raise ValueError("the degenerate-start subsolution needs 1 < p <= m")

    def crossing(mu):
        out = integrate_profile(ProfileProblem.blowup_sub(m, p, mu), xi_max)
        if out.classification in (ProfileClass.CROSSES_ZERO_BAD_SLOPE,
                                  ProfileClass.COMPACT_SUPPORT_CLEAN):
            return out.xi_stop
        return None

    hi = 1.0
    while crossing(hi) is None:
        hi *= 2.0
        if hi > 2 ** 40:
            raise RuntimeError("no zero-returning profile found for large flux")
    lo = hi / 2.0
    while lo > 1e-10 and crossing(lo) is not None:
        lo /= 2.0
    if lo <= 1e-10:
        # every positive flux returns to zero; report the smallest probed
        mu0 = hi
    else:
        for _ in range(200):
            if hi - lo <= tol * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if crossing(mid) is None:
                lo = mid
            else:
                hi = mid
        mu0 = hi
    return Mu0Result(mu0, crossing(mu0))


# ---------------------------------------------------------------------------
# linear-diffusion closed form (m = 1, exponential growth)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearProfile:
    """Closed-form m=1 separated-variables profile, zero outside [x_minus, x_plus].

    Trigonometric on the reaction side, exponential on the free side, C^1 at
    the junction; f(0) = 1 and f vanishes at both ends.
    """

    alpha: float
    x_minus: float
    C1: float
    C2: float
    C3: float
    x_plus: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ra = math.sqrt(self.alpha)
        rb = math.sqrt(1.0 - self.alpha)
        left = self.C1 * np.exp(ra * x) + self.C2 * np.exp(-ra * x)
        right = self.C3 * np.sin(rb * x) + np.cos(rb * x)
        out = np.where(x < 0, left, right)
        out = np.where((x < self.x_minus) | (x > self.x_plus), 0.0, out)
        out = np.maximum(out, 0.0)
        return out if out.ndim else float(out)

    def slope_at_origin(self):
        return math.sqrt(self.alpha) * (self.C1 - self.C2)


def linear_profile(alpha, x_minus) -> LinearProfile:
    """Build the m=1 profile vanishing at a prescribed x_minus < 0."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("growth exponent must lie in (0, 1)")
    if x_minus >= 0:
        raise ValueError("x_minus must be negative")
    ra = math.sqrt(alpha)
    rb = math.sqrt(1.0 - alpha)
    C2 = math.exp(ra * x_minus) / (math.exp(ra * x_minus) - math.exp(-ra * x_minus))
    C1 = 1.0 - C2
    C3 = math.sqrt(alpha / (1.0 - alpha)) * (C1 - C2)
    if C3 == 0.0:
        x_plus = math.pi / (2.0 * rb)
    else:
        x_plus = (math.pi + math.atan(-1.0 / C3)) / rb
    return LinearProfile(alpha, x_minus, C1, C2, C3, x_plus)


# ---------------------------------------------------------------------------
# four-piece grow-up subsolution for p < 1 <= m
# ---------------------------------------------------------------------------

@dataclass
class Subsolution:
    """Glued four-piece grow-up subsolution profile for p < 1 <= m.

    Quadratic-in-f^m pieces through the contact and across the reaction
    jump, continued by a numerically integrated profile from the stationary
    point xi1.  eval() is the glued profile; residual_min is the smallest
    discrete defect of the profile in the subsolution inequality on a fine
    grid (it should not be meaningfully negative).
    """

    m: float
    p: float
    A: float
    alpha: float
    beta: float
    xi0: float
    xi1: float
    f3_at_xi1: float
    tail_xi: np.ndarray
    tail_f: np.ndarray
    residual_min: float = math.nan

    def eval(self, xi):
        xi = np.asarray(xi, dtype=float)
        m, A, alpha = self.m, self.A, self.alpha
        b = math.sqrt(2.0 * alpha) * A ** ((1.0 + m) / (2.0 * m))
        c2 = alpha * A ** (1.0 / m)
        c3 = A ** (self.p / m) - alpha * A ** (1.0 / m)
        f2m = A + b * xi + 0.5 * c2 * xi * xi
        f3m = A + b * xi - 0.5 * c3 * xi * xi
        out = np.zeros_like(xi)
        mid = (xi >= self.xi0) & (xi < 0)
        out[mid] = np.maximum(f2m[mid], 0.0) ** (1.0 / m)
        right = (xi >= 0) & (xi <= self.xi1)
        out[right] = np.maximum(f3m[right], 0.0) ** (1.0 / m)
        far = xi > self.xi1
        out[far] = np.interp(xi[far], self.tail_xi, self.tail_f,
                             left=self.tail_f[0], right=0.0)
        return out if out.ndim else float(out)


def build_subsolution_p_lt_1(m, p, A, xi_max=50.0, n_grid=4000) -> Subsolution:
    """Construct and residual-check the glued grow-up subsolution.

    Requires A small enough that the last explicit piece stays below the
    level where the zero-order terms change sign; violations raise with the
    inequality that failed.
    """
    if not (p < 1.0 <= m):
        raise ValueError("construction requires p < 1 <= m")
    if A <= 0:
        raise ValueError("A must be positive")
    alpha = 1.0 / (1.0 - p)
    beta = -0.5 * (m - p) * alpha
    c3 = A ** (p / m) - alpha * A ** (1.0 / m)
    if c3 <= 0:
        raise ValueError("A too large: A^(p/m) <= alpha A^(1/m), the reaction-side "
                         "piece has no stationary point")
    xi0 = -math.sqrt(2.0 / alpha) * A ** ((m - 1.0) / (2.0 * m))
    b = math.sqrt(2.0 * alpha) * A ** ((1.0 + m) / (2.0 * m))
    xi1 = b / c3
    f3m_xi1 = A + b * xi1 - 0.5 * c3 * xi1 * xi1
    f3_xi1 = f3m_xi1 ** (1.0 / m)
    lim_pos = (1.0 / alpha) ** (1.0 / (1.0 - p))
    if not f3_xi1 < lim_pos:
        raise ValueError(f"A too large: f3(xi1) = {f3_xi1:.4g} >= (1/alpha)^(1/(1-p)) "
                         f"= {lim_pos:.4g}, the continued profile need not stay positive")
    lim_mono = (p / alpha) ** (1.0 / (1.0 - p))
    if not f3_xi1 <= lim_mono:
        raise ValueError(f"A too large: f3(xi1) = {f3_xi1:.4g} > (p/alpha)^(1/(1-p)) "
                         f"= {lim_mono:.4g}, f^p - alpha f is not increasing on [0, xi1]")

    problem = ProfileProblem("blowup_sub", m, alpha, beta, math.nan, reaction_p=p)
    sol, xs, ys, _ = _integrate(problem, xi1, (f3_xi1, 0.0), xi1 + xi_max)
    tail_f = np.maximum(ys[0], 0.0)
    sub = Subsolution(m, p, A, alpha, beta, xi0, xi1, f3_xi1, xs, tail_f)

    # discrete residual of the glued profile in the subsolution inequality
    xi_hi = float(xs[-1] if tail_f[-1] > 0 else xs[np.nonzero(tail_f > 0)[0][-1]])
    grid = np.linspace(xi0 * 1.2, xi_hi, n_grid)
    h = grid[1] - grid[0]
    fv = sub.eval(grid)
    fm = fv ** m
    d2 = (fm[2:] - 2.0 * fm[1:-1] + fm[:-2]) / (h * h)
    d1 = (fv[2:] - fv[:-2]) / (2.0 * h)
    a_ind = (grid[1:-1] > 0).astype(float)
    res = d2 - beta * grid[1:-1] * d1 + a_ind * fv[1:-1] ** p - alpha * fv[1:-1]
    # the profile solves the equality beyond xi1; only the glued explicit
    # pieces and the knots are informative
    sub.residual_min = float(res[grid[1:-1] <= xi1 + 5 * h].min())
    return sub


# ---------------------------------------------------------------------------
# outer blow-up profile (reaction-free side)
# ---------------------------------------------------------------------------

def blowup_outer_profile(m, p, xi_max=XI_MAX_DEFAULT, tol=TOL_LAMBDA,
                         drift_on_derivative=True) -> ProfileOutcome:
    """Far-field profile bounding a blow-up solution on the reaction-free side.

    For p = m the equation loses its drift term and the compact-support
    machinery applies: returns a profile with f(0) = 1 and compact support.
    For p > m the unique orbit decaying like distance^(-alpha/beta) is
    bracketed by shooting on the initial slope between profiles that cross
    zero and profiles that turn back up.
    """
    if p < m:
        raise ValueError("p < m is covered by the scaled compact-support family")
    alpha = 1.0 / (p - 1.0)
    if p == m:
        lam = _find_lambda_minus_at(m, alpha, 0.0, xi_max, tol)
        return integrate_profile(ProfileProblem.phi(m, alpha, lam, beta=0.0), xi_max)

    # The decaying orbit is violently unstable forward (shooting peels off
    # while f is still O(1)), but it attracts backward: start on the
    # asymptotic power manifold far out, integrate back to the origin, and
    # use the scaling family C f(C^((1-m)/2) .) to normalize f(0) = 1.
    beta = 0.5 * (p - m) * alpha
    sigma = alpha / beta  # = 2/(p - m)
    problem = ProfileProblem.blowup_outer(m, p, math.nan, drift_on_derivative)
    z_far = max(20.0, 1e5 ** (1.0 / sigma))
    f_far = z_far ** (-sigma)
    s_far = -sigma * m * z_far ** (-sigma * m - 1.0)
    sol, xs, ys, _ = _integrate(problem, z_far, (f_far, s_far), 0.0,
                                rtol=1e-11, atol=1e-16)
    if sol is None or sol.t[-1] > 1e-12 or ys[0][-1] <= 0:
        raise RuntimeError("backward integration from the tail failed")
    C = 1.0 / float(sol.y[0, -1])
    scale_x = C ** ((m - 1.0) / 2.0)
    order = np.argsort(xs)
    out = ProfileOutcome(
        ProfileClass.POSITIVE_DECAYING,
        xi=xs[order] * scale_x,
        f=C * np.maximum(ys[0][order], 0.0),
        fm_prime=C ** (0.5 * (m + 1.0)) * ys[1][order],
    )
    sel = (out.xi >= out.xi[-1] / 10.0) & (out.f > 0)
    out.tail_exponent = float(np.polyfit(np.log(out.xi[sel]),
                                         np.log(out.f[sel]), 1)[0])
    return out


# ---------------------------------------------------------------------------
# evaluating the self-similar ansatz
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowUpExp:
    alpha: float
    beta: float


@dataclass(frozen=True)
class GrowUpPow:
    alpha: float
    beta: float


@dataclass(frozen=True)
class BlowUpMode:
    T: float
    alpha: float
    beta: float


def selfsimilar_eval(profile, mode, x, t):
    """Evaluate a self-similar ansatz built on a sampled profile.

    profile is (xi, f) arrays or an object with .samples; the profile is
    linearly interpolated and zero outside its sampled range.
    """
    if hasattr(profile, "samples"):
        xi, fv = profile.samples
    else:
        xi, fv = profile
    x = np.asarray(x, dtype=float)

    def F(z):
        return np.interp(z, xi, fv, left=0.0, right=0.0)

    if isinstance(mode, GrowUpExp):
        out = math.exp(mode.alpha * t) * F(x * math.exp(-mode.beta * t))
    elif isinstance(mode, GrowUpPow):
        if t <= 0:
            raise ValueError("power-law ansatz needs t > 0")
        out = t ** mode.alpha * F(x * t ** mode.beta)
    elif isinstance(mode, BlowUpMode):
        if t >= mode.T:
            raise ValueError("blow-up ansatz is only defined for t < T")
        s = mode.T - t
        out = s ** (-mode.alpha) * F(x * s ** (-mode.beta))
    else:
        raise TypeError(f"unknown ansatz mode {mode!r}")
    return out if np.ndim(out) else float(out)


def profile_to_csv(outcome: ProfileOutcome, path):
    """Write profile samples as CSV: xi, f, fm_prime."""
    with open(path, "w", newline="\n") as fh:
        fh.write("xi,f,fm_prime\n")
        for row in zip(outcome.xi, outcome.f, outcome.fm_prime):
            fh.write(",".join(format(v, ".12g") for v in row) + "\n")
