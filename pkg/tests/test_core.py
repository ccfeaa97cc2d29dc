import math

import numpy as np
import pytest

from halfline.core import (
    CompactBump,
    Custom,
    DomainPolicy,
    Field,
    Grid,
    LogCorrectedTail,
    PowerTail,
    ProblemSpec,
    ReactionSupport,
    SolverTolerances,
    Uniform,
    make_initial_datum,
    reaction_coefficient,
)


def test_reaction_coefficient_half_line():
    hl = ReactionSupport.half_line()
    assert reaction_coefficient(1.0, hl) == 1.0
    assert reaction_coefficient(-1.0, hl) == 0.0
    assert reaction_coefficient(0.0, hl) == 0.0  # jump convention a(0) = 0


def test_reaction_coefficient_other_supports():
    assert reaction_coefficient(0.5, ReactionSupport.interval(1.0)) == 1.0
    assert reaction_coefficient(1.5, ReactionSupport.interval(1.0)) == 0.0
    assert reaction_coefficient(-7.0, ReactionSupport.global_()) == 1.0
    assert reaction_coefficient(7.0, ReactionSupport.none()) == 0.0


def test_half_line_antisymmetry():
    hl = ReactionSupport.half_line()
    x = np.linspace(-10, 10, 501)
    x = x[x != 0]
    prod = hl.indicator(x) * hl.indicator(-x)
    assert np.all(prod == 0.0)


def test_support_translation_invariance_global_none():
    x = np.linspace(-5, 5, 101)
    for sup in (ReactionSupport.global_(), ReactionSupport.none()):
        assert np.array_equal(sup.indicator(x), sup.indicator(x + 3.7))


def test_grid_contains_zero_exactly():
    g = Grid.from_spacing(-20.0, 20.0, 0.1)
    assert g.x[g.i0] == 0.0
    g2 = Grid.from_spacing(-7.3, 11.9, 0.07)
    assert g2.x[g2.i0] == 0.0
    assert g2.x_min <= -7.3 and g2.x_max >= 11.9


def test_grid_rejects_offset_zero():
    with pytest.raises(ValueError):
        Grid(-1.05, 2.0, 32)  # 0 does not land on a node
    with pytest.raises(ValueError):
        Grid(-1.0, 1.0, 2)


def test_compact_bump_exactly_zero_outside():
    g = Grid.from_spacing(-10, 10, 0.05)
    f = make_initial_datum(CompactBump(center=0.0, width=2.0, height=1.0), g)
    outside = np.abs(g.x) > 1.0
    assert np.all(f.values[outside] == 0.0)
    assert f.values[g.i0] == 1.0
    assert f.sup_location() == 0.0


def test_power_tail_decay():
    d = PowerTail(gamma=2.0, scale=1.0)
    assert d.value(10.0) == pytest.approx(0.01, rel=2e-2)
    # asymptotic ratio tends to one
    assert d.value(1e4) * 1e8 == pytest.approx(1.0, rel=1e-6)
    assert d.value(-50.0) == d.value(50.0)


def test_log_corrected_tail_value():
    d = LogCorrectedTail(m=0.5, scale=1.0)
    # |x|^(-4) (log|x|)^2 at x = -e^2
    assert d.value(-math.e ** 2) == pytest.approx(4.0 * math.exp(-8.0), rel=1e-12)
    with pytest.raises(ValueError):
        LogCorrectedTail(m=1.5)


def test_datum_samples_are_valid_fields():
    g = Grid.from_spacing(-30, 30, 0.1)
    for datum in (CompactBump(), PowerTail(gamma=2.5), Uniform(2.0),
                  LogCorrectedTail(m=0.5), CompactBump(pedestal=1e-4)):
        f = make_initial_datum(datum, g)
        assert np.all(f.values >= 0)
        assert np.all(np.isfinite(f.values))
        assert 0 < f.mass() < math.inf


def test_custom_datum_interpolates():
    x = np.linspace(-5, 5, 11)
    c = Custom(x, np.abs(x))
    assert c.value(0.5) == pytest.approx(0.5)
    assert c.value(100.0) == pytest.approx(5.0)  # edge continuation
    with pytest.raises(ValueError):
        Custom(x, -np.ones_like(x))


def test_field_invariants():
    g = Grid.from_spacing(-1, 1, 0.5)
    with pytest.raises(ValueError):
        Field(g, np.array([0.0, 1.0, -0.1, 0.0, 0.0]))
    with pytest.raises(ValueError):
        Field(g, np.array([0.0, 1.0, np.inf, 0.0, 0.0]))
    f = Field(g, np.ones(g.n))
    assert f.mass() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        f.values[0] = 3.0  # frozen array


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(m=-1.0, p=2.0)
    with pytest.raises(ValueError):
        ProblemSpec(m=1.0, p=1.0, datum=LogCorrectedTail(m=0.5))
    # p < 1 with a datum vanishing on the reaction support is rejected
    with pytest.raises(ValueError):
        ProblemSpec(m=1.0, p=0.5, datum=CompactBump(center=0.0, width=2.0))
    # a pedestal restores positivity on the support
    ProblemSpec(m=1.0, p=0.5, datum=CompactBump(pedestal=1e-4))
    # p >= 1 has no positivity requirement
    ProblemSpec(m=1.0, p=1.5, datum=CompactBump())


def test_tolerance_invariants():
    with pytest.raises(ValueError):
        SolverTolerances(blowup_threshold=1e5)
    with pytest.raises(ValueError):
        SolverTolerances(cfl_safety=0.95)
    with pytest.raises(ValueError):
        DomainPolicy(x_min=1.0, x_max=2.0, dx=0.1)
