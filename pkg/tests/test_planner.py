import math

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from p2pss.errors import ConfigError, InfeasibleRounds
from p2pss.planner import (
    CONVERGENCE_FACTOR,
    PlanInputs,
    Strategy,
    epsilon_star,
    explicit_plan,
    gossip_deviation_bound,
    k_of_R,
    r_min,
    space_dominant_plan,
    time_dominant_plan,
    tolerance,
    tolerance_from_eps_star,
)

DEFAULT = PlanInputs(phi=0.02, eps=0.01, delta=0.05, p_star=10_000)
C = CONVERGENCE_FACTOR


@st.composite
def plan_inputs(draw):
    phi = draw(st.floats(0.005, 0.2))
    eps = phi * draw(st.floats(0.05, 0.95))
    delta = draw(st.floats(0.001, 0.5))
    p_star = draw(st.integers(2, 10**6))
    return PlanInputs(phi=phi, eps=eps, delta=delta, p_star=p_star)


def test_convergence_factor():
    assert C == pytest.approx(0.303265, abs=1e-6)
    assert C == pytest.approx(float(1 / (2 * mpmath.sqrt(mpmath.e))), rel=1e-15)


def test_eps_star_unit_identity():
    # delta chosen so that C^r / delta = 1 / p*^2
    r, p_star = 2, 2
    assert epsilon_star(p_star, C**r * p_star**2, C, r) == pytest.approx(1.0)


def test_eps_star_reference_value():
    mpmath.mp.dps = 40
    ref = 10_000 * mpmath.sqrt(mpmath.power(1 / (2 * mpmath.sqrt(mpmath.e)), 24) / mpmath.mpf("0.05"))
    assert epsilon_star(10_000, 0.05, C, 24) == pytest.approx(float(ref), rel=1e-13)
    assert epsilon_star(10_000, 0.05, C, 24) == pytest.approx(0.0271, abs=5e-5)


@given(st.integers(2, 10**5), st.floats(0.001, 0.9), st.integers(0, 80))
def test_eps_star_decreasing(p_star, delta, r):
    assert epsilon_star(p_star, delta, C, r + 1) < epsilon_star(p_star, delta, C, r)


def test_eps_star_rejects_negative_rounds():
    with pytest.raises(ValueError):
        epsilon_star(10, 0.05, C, -1)


def test_tolerance_limits():
    assert tolerance_from_eps_star(250, 0.0, 0.02) == pytest.approx(1 / 250)
    e = epsilon_star(10_000, 0.05, C, 24)
    assert tolerance_from_eps_star(1e15, e, 0.02) == pytest.approx(4 * e * 0.02 / (1 + e) ** 2)


def test_tolerance_reference_point():
    assert tolerance(120, 24, DEFAULT) <= 0.01


@given(plan_inputs(), st.integers(1, 5000), st.integers(0, 60))
def test_tolerance_monotone(inputs, k, r):
    e = epsilon_star(inputs.p_star, inputs.delta, C, r)
    assume(e < 1)
    t = tolerance(k, r, inputs)
    assert tolerance(k + 1, r, inputs) <= t
    # d tolerance / d eps* has the sign of 2 phi k (1 - eps*) - (1 + eps*), so
    # more rounds only help once k is large enough for the given eps*.
    if 2 * inputs.phi * k * (1 - e) >= 1 + e:
        assert tolerance(k, r + 1, inputs) <= t


def test_tolerance_can_grow_with_rounds_for_tiny_k():
    inputs = PlanInputs(phi=0.125, eps=0.0625, delta=0.5, p_star=2)
    assert tolerance(1, 3, inputs) > tolerance(1, 2, inputs)


@given(plan_inputs(), st.integers(0, 60))
def test_tolerance_monotone_in_rounds_for_planned_k(inputs, extra):
    R = r_min(inputs) + extra
    k = k_of_R(inputs, R)
    assert tolerance(k, R + 1, inputs) <= tolerance(k, R, inputs)


def test_k_of_R_reference():
    assert k_of_R(DEFAULT, 24) == 120


def test_k_of_R_converged_limit():
    inputs = PlanInputs(phi=0.02, eps=0.003, delta=0.05, p_star=100)
    assert k_of_R(inputs, 400) == math.ceil(1 / 0.003)


def test_k_of_R_infeasible_below_r_min():
    with pytest.raises(InfeasibleRounds):
        k_of_R(DEFAULT, r_min(DEFAULT) - 1)


def test_r_min_reference():
    assert r_min(DEFAULT) == 21
    assert k_of_R(DEFAULT, 21) > 0
    with pytest.raises(InfeasibleRounds):
        k_of_R(DEFAULT, 20)


@given(plan_inputs(), st.integers(0, 40))
def test_duality(inputs, extra):
    R = r_min(inputs) + extra
    k = k_of_R(inputs, R)
    assert tolerance(k, R, inputs) <= inputs.eps
    if k > 1:
        assert tolerance(k - 1, R, inputs) > inputs.eps


@given(plan_inputs())
def test_r_min_boundary(inputs):
    R = r_min(inputs)
    k_of_R(inputs, R)
    if R > 0:
        with pytest.raises(InfeasibleRounds):
            k_of_R(inputs, R - 1)


@given(plan_inputs(), st.integers(0, 30))
def test_k_of_R_monotone(inputs, extra):
    R = r_min(inputs) + extra
    assert k_of_R(inputs, R + 1) <= k_of_R(inputs, R)


@given(st.floats(0.01, 0.2), st.floats(0.05, 0.9), st.floats(0.05, 0.9), st.floats(0.001, 0.5), st.integers(2, 10**5))
def test_r_min_non_increasing_in_eps(phi, a, b, delta, p_star):
    lo, hi = sorted((a, b))
    r_lo = r_min(PlanInputs(phi, lo * phi, delta, p_star))
    r_hi = r_min(PlanInputs(phi, hi * phi, delta, p_star))
    assert r_hi <= r_lo


def test_doubling_p_star():
    step = math.ceil(2 * math.log(2) / -math.log(C))
    for p_star in [10, 100, 1000, 10_000, 123_457]:
        a = r_min(PlanInputs(0.02, 0.01, 0.05, p_star))
        b = r_min(PlanInputs(0.02, 0.01, 0.05, 2 * p_star))
        assert b - a in (step, step - 1)


def test_space_dominant_small_eps():
    plan = space_dominant_plan(PlanInputs(phi=0.02, eps=0.001))
    assert plan.k == 1001
    assert plan.achieved <= 0.001


def test_space_dominant_reference():
    plan = space_dominant_plan(DEFAULT)
    assert plan.k == 101
    assert tolerance(101, plan.R, DEFAULT) <= 0.01
    assert tolerance(101, plan.R - 1, DEFAULT) > 0.01


@given(plan_inputs())
def test_space_dominant_boundary(inputs):
    plan = space_dominant_plan(inputs)
    assert plan.k == math.floor(1 / inputs.eps) + 1
    assert tolerance(plan.k, plan.R, inputs) <= inputs.eps
    if plan.R > 0:
        assert tolerance(plan.k, plan.R - 1, inputs) > inputs.eps


@given(plan_inputs())
def test_time_dominant_self_consistent(inputs):
    plan = time_dominant_plan(inputs)
    assert plan.strategy is Strategy.TIME_DOMINANT
    assert plan.R == r_min(inputs)
    assert plan.achieved <= inputs.eps


def test_explicit_plan():
    plan = explicit_plan(DEFAULT, 2200, 24)
    assert plan.achieved == tolerance(2200, 24, DEFAULT)
    assert plan.as_dict()["strategy"] == "explicit"


def test_deviation_bound():
    assert gossip_deviation_bound(0.0, 100, 0.05, C, 24) == 0.0
    shift = math.log(4) / -math.log(C)
    a = gossip_deviation_bound(1.0, 100, 0.05, C, 10)
    assert gossip_deviation_bound(1.0, 100, 0.05, C, 10 + shift) == pytest.approx(a / 2)
    expected = math.sqrt(99 / 100) * math.sqrt(C**24 / 0.05)
    assert gossip_deviation_bound(1 / 100, 100, 0.05, C, 24) == pytest.approx(expected)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(phi=0.02, eps=0.02),
        dict(phi=0.02, eps=0.0),
        dict(phi=0.02, eps=0.01, delta=1.0),
        dict(phi=0.02, eps=0.01, p_star=1),
    ],
)
def test_invalid_inputs(kwargs):
    with pytest.raises(ConfigError):
        PlanInputs(**kwargs)


def test_eps_star_plan_consistency():
    # Re-deriving the space-dominant eps* from its k_min recovers the requested tolerance.
    k = 101
    e = (k * (2 * 0.02 - 0.01) - math.sqrt(4 * 0.02 * k * k * (0.02 - 0.01) + 1)) / (1 + 0.01 * k)
    assert 0 < e < 1
    assert tolerance_from_eps_star(k, e, 0.02) == pytest.approx(0.01)
