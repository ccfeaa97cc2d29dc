import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import curve_fit
from scipy.special import erfc

from halfline.core import (
    CompactBump,
    Custom,
    DomainPolicy,
    Field,
    Grid,
    ProblemSpec,
    ReactionSupport,
    SolverTolerances,
    Uniform,
)
from halfline import pde
from halfline.pde import (
    BlowUpEscalation,
    Regime,
    Stepper,
    Trace,
    detect_regime,
    energy,
    estimate_blowup_time,
    rescale_critical,
    run,
    step,
)
from halfline.profiles import barenblatt


def none_spec(datum, dx, half_width=6.0, max_time=1.0, **tol):
    return ProblemSpec(
        m=2.0, p=2.0, support=ReactionSupport.none(), datum=datum,
        domain=DomainPolicy(-half_width, half_width, dx, allow_expansion=False),
        tolerances=SolverTolerances(max_time=max_time,
                                    snapshot_stride=2 * max_time, **tol),
        boundary="neumann",
    )


def barenblatt_datum(dx, half_width=6.0):
    g = Grid.from_spacing(-half_width, half_width, dx)
    return Custom(g.x, barenblatt(g.x, 1.0, 1.0, 2.0))


def mk_trace(times, sups, escalated=False, completed=True, spec=None):
    times = np.asarray(times, dtype=float)
    sups = np.asarray(sups, dtype=float)
    n = times.size
    return Trace(times=times, sup_norms=sups, sup_locations=np.zeros(n),
                 masses=np.ones(n), energies=np.zeros(n), probe_points=(),
                 probe_values=np.zeros((n, 0)), snapshots=[],
                 escalated=escalated, completed=completed, spec=spec)


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def test_step_zero_is_fixed_point():
    spec = ProblemSpec(m=2.0, p=2.0)
    g = spec.domain.grid()
    f = Field(g, np.zeros(g.n))
    out = step(f, spec, 1e-3)
    assert np.all(out.values == 0.0)


def test_step_uniform_global_matches_reaction_only():
    c, dt, p = 0.7, 1e-3, 2.0
    spec = ProblemSpec(m=2.0, p=p, support=ReactionSupport.global_(),
                       datum=Uniform(c), boundary="neumann")
    f = spec.initial_field()
    out = step(f, spec, dt)
    assert np.allclose(out.values, c + dt * c ** p, rtol=0, atol=1e-15)


def test_step_single_step_mass_conservation():
    spec = none_spec(barenblatt_datum(0.01), 0.01)
    f = spec.initial_field()
    m0 = f.mass()
    st = Stepper(f.grid, spec.m, spec.p, spec.support, ("neumann", None),
                 ("neumann", None), spec.tolerances)
    u = f.values.copy()
    dt = st.stable_dt(u)
    st.advance(u, dt)
    # conservative flux form telescopes exactly under the trapezoid sum
    m1 = Field(f.grid, u).mass()
    assert abs(m1 - m0) / m0 <= 1e-12


def test_step_overflow_escalates():
    spec = ProblemSpec(m=1.0, p=3.0)
    g = spec.domain.grid()
    f = Field(g, np.full(g.n, 1e200))
    with pytest.raises(BlowUpEscalation):
        step(f, spec, 1.0)


def test_positivity_is_clamped():
    # a deliberately unstable step must still return nonnegative values
    g = Grid.from_spacing(-2, 2, 0.5)
    u = np.zeros(g.n)
    u[g.i0] = 1.0
    st = Stepper(g, 1.0, 2.0, ReactionSupport.none())
    st.advance(u, 10.0)  # far beyond the stability bound
    assert np.all(u >= 0.0)


# ---------------------------------------------------------------------------
# full runs: conservation, monotonicity, convergence
# ---------------------------------------------------------------------------

def test_mass_conservation_over_run():
    tr = run(none_spec(barenblatt_datum(0.02), 0.02))
    drift = np.max(np.abs(tr.masses - tr.masses[0])) / tr.masses[0]
    assert drift <= 1e-6


def test_sup_monotone_without_reaction():
    tr = run(none_spec(barenblatt_datum(0.02), 0.02))
    assert np.all(np.diff(tr.sup_norms) <= 1e-12)


def test_snapshots_stay_nonnegative_and_finite():
    tr = run(none_spec(barenblatt_datum(0.05), 0.05))
    for snap in tr.snapshots:
        assert np.all(snap.values >= 0) and np.all(np.isfinite(snap.values))


def barenblatt_error(dx):
    tr = run(none_spec(barenblatt_datum(dx), dx))
    f = tr.snapshots[-1]
    exact = barenblatt(f.grid.x, 1.0 + f.time, 1.0, 2.0)
    return np.max(np.abs(f.values - exact)) / exact.max()


def test_convergence_order_against_barenblatt():
    # finer pairs drop below the free-boundary phase sawtooth (~3e-4), which
    # does not contract with dx; 0.02 -> 0.01 is truncation-dominated
    errs = [barenblatt_error(dx) for dx in (0.02, 0.01)]
    assert errs[0] / errs[1] >= 3.5
    assert errs[1] <= 0.02


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def test_energy_zero_field():
    spec = ProblemSpec(m=2.0, p=2.0)
    g = spec.domain.grid()
    assert energy(Field(g, np.zeros(g.n)), spec) == 0.0


def test_energy_cap_profile_matches_quadrature():
    # h(y) = (1/2)(1 - y^2/K^2)_+^(1/m), m = p = 2: the gradient term decays
    # like 1/K while the reaction term grows like K, so the energy goes
    # negative for K of modest size
    m = p = 2.0
    for K in (10.0, 20.0, 40.0):
        grad2 = quad(lambda y: (y / (2 * K ** 2)) ** 2, -K, K)[0]
        react = quad(lambda y: (0.25 * (1 - y ** 2 / K ** 2)) ** 2, 0, K)[0]
        expected = 0.5 * grad2 - (m / (p + m)) * react
        g = Grid.from_spacing(-K - 1, K + 1, K / 2000)
        h = 0.5 * np.maximum(1 - g.x ** 2 / K ** 2, 0.0) ** (1.0 / m)
        spec = ProblemSpec(m=m, p=p, domain=DomainPolicy(-K - 1, K + 1, 1.0))
        got = energy(Field(g, h), spec)
        assert got == pytest.approx(expected, rel=1e-4)
        assert got < 0
        # the two-power structure in K
        assert expected == pytest.approx(1.0 / (12 * K) - K / 60.0, rel=1e-8)


def test_energy_barenblatt_two_power_law():
    # E(t) = c1 t^(-5/3) - c2 t^(-4/3) for the explicit solution, m=2, p=3
    m, p = 2.0, 3.0
    edge = math.sqrt(12.0)
    c1 = 0.5 * quad(lambda s: (2 * (1 - s * s / 12) * (-s / 6)) ** 2,
                    -edge, edge)[0]
    c2 = (m / (p + m)) * quad(lambda s: (1 - s * s / 12) ** (p + m), 0, edge)[0]
    ts = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    vals = []
    for t in ts:
        half = edge * t ** (1 / 3) + 1.0
        g = Grid.from_spacing(-half, half, half / 4000)
        spec = ProblemSpec(m=m, p=p, domain=DomainPolicy(-half, half, 1.0))
        vals.append(energy(Field(g, barenblatt(g.x, t, 1.0, m)), spec))
    vals = np.asarray(vals)
    basis = np.column_stack([ts ** (-5 / 3), -ts ** (-4 / 3)])
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    resid = np.linalg.norm(basis @ coef - vals) / np.linalg.norm(vals)
    assert resid < 0.05
    assert coef[0] == pytest.approx(c1, rel=0.02)
    assert coef[1] == pytest.approx(c2, rel=0.02)
    # negative for t large: the reaction power dominates
    assert vals[-1] < 0


# ---------------------------------------------------------------------------
# blow-up time extrapolation
# ---------------------------------------------------------------------------

def test_blowup_time_exact_law():
    # log-spaced approach to T, like a real recorded trace
    t = 1.0 - np.logspace(0.0, -6.0, 400)
    tr = mk_trace(t, (1 - t) ** -0.5, escalated=True, completed=False)
    est = estimate_blowup_time(tr, 3.0)
    assert est.confident
    assert est.time == pytest.approx(1.0, abs=1e-6)


def test_blowup_time_with_offset_law():
    t = np.linspace(0.0, 0.995, 500)
    sup = 2.0 / (1 - t) + 5.0
    # independent oracle: direct nonlinear fit of A/(T-t) + B
    popt, _ = curve_fit(lambda t, A, T, B: A / (T - t) + B, t, sup,
                        p0=(2.0, 1.05, 5.0), maxfev=20000)
    assert popt[1] == pytest.approx(1.0, abs=1e-6)
    tr = mk_trace(t, sup, escalated=True, completed=False)
    est = estimate_blowup_time(tr, 2.0)
    assert est.time == pytest.approx(popt[1], abs=1e-2)


def test_blowup_time_nonmonotone_falls_back():
    t = np.linspace(0, 1, 200)
    sup = np.full(200, 100.0)
    sup[::2] = 101.0  # wiggles: no monotone tail
    tr = mk_trace(t, sup, escalated=True, completed=False)
    est = estimate_blowup_time(tr, 2.0)
    assert not est.confident
    assert est.time >= t[-1]


def test_blowup_time_grid_self_consistency():
    def T_at(dx):
        spec = ProblemSpec(
            m=1.0, p=3.0, support=ReactionSupport.half_line(),
            datum=CompactBump(center=2.0, width=4.0, height=3.0),
            domain=DomainPolicy(-15, 15, dx),
            tolerances=SolverTolerances(max_time=5.0, snapshot_stride=1.0))
        tr = run(spec)
        assert tr.regime is Regime.BLOW_UP
        return tr.blowup_time_estimate

    T1, T2 = T_at(0.1), T_at(0.05)
    assert abs(T2 - T1) / T1 < 0.05


# ---------------------------------------------------------------------------
# regime detection
# ---------------------------------------------------------------------------

def test_detect_regime_escalated_is_blowup():
    tr = mk_trace([0, 1], [1, 1e9], escalated=True, completed=False)
    assert detect_regime(tr) is Regime.BLOW_UP


def test_detect_regime_decay_is_bounded():
    t = np.linspace(0, 10, 200)
    tr = mk_trace(t, np.exp(-t) + 1e-3)
    assert detect_regime(tr) is Regime.GLOBAL_BOUNDED


def test_detect_regime_growth_is_growup():
    t = np.linspace(0.1, 10, 200)
    tr = mk_trace(t, 10.0 * t ** 2)
    assert detect_regime(tr) is Regime.GROW_UP


def test_detect_regime_ambiguous_is_undecided():
    t = np.linspace(0, 10, 200)
    tr = mk_trace(t, 1.0 + np.sin(t) ** 2)  # bounded but oscillating
    assert detect_regime(tr) is Regime.UNDECIDED


# ---------------------------------------------------------------------------
# critical-case rescaling
# ---------------------------------------------------------------------------

def test_rescale_identity_at_t_equal_one():
    g = Grid.from_spacing(-4, 4, 0.1)
    vals = np.exp(-g.x ** 2)
    tr = mk_trace([1.0], [1.0])
    tr.snapshots = [Field(g, vals, time=1.0)]
    out = rescale_critical(tr, m=1.0)
    snap = out.snapshots[0]
    assert snap.time == 0.0  # log 1
    assert np.allclose(snap.grid.x, g.x)
    assert np.allclose(snap.values, vals)


def test_rescale_cancels_exact_self_similarity():
    a = 0.5  # 1/(m+1) for m = 1
    g_profile = lambda xi: np.exp(-xi ** 2 / 4)
    snaps = []
    for t in (1.0, 4.0, 9.0):
        g = Grid.from_spacing(-6 * t ** a, 6 * t ** a, 0.1 * t ** a)
        snaps.append(Field(g, t ** -a * g_profile(g.x * t ** -a), time=t))
    tr = mk_trace([1.0, 4.0, 9.0], [1.0, 0.5, 1 / 3])
    tr.snapshots = snaps
    out = rescale_critical(tr, m=1.0)
    for snap in out.snapshots:
        assert np.allclose(snap.values, g_profile(snap.grid.x), atol=1e-12)


def test_rescale_rejects_off_critical():
    tr = mk_trace([1.0], [1.0],
                  spec=ProblemSpec(m=1.0, p=2.0))
    with pytest.raises(ValueError):
        rescale_critical(tr, m=1.0)


def test_rescale_critical_run_grows_monotonically():
    spec = ProblemSpec(
        m=1.0, p=3.0, support=ReactionSupport.half_line(),
        datum=CompactBump(center=2.0, width=4.0, height=3.0),
        domain=DomainPolicy(-15, 15, 0.1),
        tolerances=SolverTolerances(max_time=5.0, snapshot_stride=0.005))
    tr = run(spec)
    assert tr.regime is Regime.BLOW_UP
    out = rescale_critical(tr, m=1.0)
    v = out.sup_norms
    assert v.size > 10
    assert np.all(np.diff(v) > -1e-9 * v[:-1])


# ---------------------------------------------------------------------------
# driven half-domain fixture (flat far field filling in from the boundary)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("m", [1.0, 2.0])
def test_polubarinova_fixture(m):
    # unit boundary value filling an initially empty half-line: w -> 1 on
    # compact sets from below (w(1, s) crosses 0.9 only around s ~ 32 for
    # the heat case, hence the long horizon)
    s_end = 60.0
    g = Grid(0.0, 50.0, 501)
    u = np.zeros(g.n)
    u[0] = 1.0
    st = Stepper(g, m, 1.0, ReactionSupport.none(),
                 ("dirichlet", 1.0), ("dirichlet", 0.0))
    s = 0.0
    i1 = int(round(1.0 / g.dx))
    prev = u.copy()
    checkpoints = np.arange(5.0, s_end + 0.1, 5.0)
    k = 0
    while s < s_end:
        dt = min(st.stable_dt(u), s_end - s)
        st.advance(u, dt)
        s += dt
        if k < checkpoints.size and s >= checkpoints[k]:
            assert np.all(u >= prev - 1e-12)  # nondecreasing in time, all nodes
            prev = u.copy()
            k += 1
    assert u[i1] >= 0.9
    if m == 1.0:
        # explicit solution of the driven heat problem
        exact = erfc(g.x / (2 * math.sqrt(s_end)))
        assert np.max(np.abs(u - exact)) < 5e-3


def test_trace_csv_round_trip(tmp_path):
    tr = run(none_spec(barenblatt_datum(0.1), 0.1, max_time=0.2))
    path = tmp_path / "trace.csv"
    pde.trace_to_csv(tr, path)
    body = path.read_text()
    assert body.splitlines()[0] == "t,sup_norm,sup_location,mass,energy"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[0] == tr.times.size
    assert np.allclose(data[:, 0], tr.times)
    assert "\r" not in body
