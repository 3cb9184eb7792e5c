import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cnlm import (
    ConverterConfig,
    ModulatorState,
    PenaltyConfig,
    cnlm_step,
    nlm_step,
    output_voltage,
    switching_interval,
    term_O,
    term_P,
    term_Q,
)
from cnlm.modulation import objective_of
from oracles import exhaustive_min, level_sums
from oracles import objective as oracle_objective

V4 = (37.0, 55.0, 83.0, 125.0)


@st.composite
def modulator_states(draw, n=4, max_step=300):
    step = draw(st.integers(1, max_step))
    prev = tuple(draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=n, max_size=n)))
    last = tuple(draw(st.one_of(st.none(), st.integers(0, step - 1))) for _ in range(n))
    return ModulatorState(step, prev, last)


# --- switching interval -------------------------------------------------------

def test_interval_direct():
    s = ModulatorState(105, (0, 0), (100, 0))
    assert switching_interval(s, 0) == 5
    assert switching_interval(s, 1) == 105


def test_interval_never_switched():
    assert switching_interval(ModulatorState.initial(3), 1) == math.inf


def test_interval_single_step():
    assert switching_interval(ModulatorState(1, (0,), (0,)), 0) == 1


def test_interval_index_error():
    with pytest.raises(IndexError):
        switching_interval(ModulatorState.initial(2), 2)


def test_state_invariants():
    with pytest.raises(ValueError):
        ModulatorState(5, (0, 0), (5, None))
    with pytest.raises(ValueError):
        ModulatorState(5, (0, 2), (None, None))


def test_penalty_config_validation():
    with pytest.raises(ValueError):
        PenaltyConfig(alpha=-1)
    with pytest.raises(ValueError):
        PenaltyConfig(p_exponent=0)
    with pytest.raises(ValueError):
        PenaltyConfig(o_norm=0)
    with pytest.raises(ValueError):
        PenaltyConfig(q_mode="exact")
    with pytest.raises(ValueError, match="3 entries"):
        PenaltyConfig(alpha=(0.1, 0.2, 0.3)).alpha_vector(4)


# --- terms --------------------------------------------------------------------

def test_term_O_examples(default_cfg):
    assert term_O([1, 1, 1, 1], 300, default_cfg) == 0
    assert term_O([1, 0, 0, 0], 50, default_cfg, PenaltyConfig(o_norm=2)) == 169
    assert term_O([0, 0, 0, 0], 0, default_cfg) == 0


def test_term_P_hold_is_zero():
    state = ModulatorState(10, (1, 0, -1, 0), (3, 4, 5, 6))
    assert term_P(state.prev, state, PenaltyConfig()) == 0


def test_term_P_single_switch():
    state = ModulatorState(105, (0, 0, 0, 0), (100, None, None, None))
    assert term_P((1, 0, 0, 0), state, PenaltyConfig()) == pytest.approx(0.2)


def test_term_P_floor_rejects():
    state = ModulatorState(200, (0, 0, 0, 0), (100, None, None, None))
    pcfg = PenaltyConfig(min_interval_steps=100)
    assert term_P((1, 0, 0, 0), state, pcfg) == math.inf
    assert term_P((0, 1, 0, 0), state, pcfg) == 0  # never switched
    later = ModulatorState(201, (0, 0, 0, 0), (100, None, None, None))
    assert term_P((1, 0, 0, 0), later, pcfg) == 1.0


def test_term_P_exponent():
    state = ModulatorState(4, (0, 0), (2, 0))
    assert term_P((1, 1), state, PenaltyConfig(p_exponent=2)) == pytest.approx(0.25 + 1 / 16)


@given(modulator_states(), st.data(), st.integers(1, 50))
def test_term_P_non_increasing_in_interval(state, data, extra):
    cand = tuple(data.draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=4, max_size=4)))
    older = ModulatorState(state.step + extra, state.prev, state.last_switch)
    for pcfg in (PenaltyConfig(), PenaltyConfig(p_exponent=2.5), PenaltyConfig(min_interval_steps=3)):
        assert term_P(cand, older, pcfg) <= term_P(cand, state, pcfg)


def test_term_Q_simplified(default_cfg):
    state = ModulatorState.initial(4)
    assert term_Q((1, 0, -1, 0), state, default_cfg, PenaltyConfig()) == 120
    assert term_Q((0, 0, 0, 0), state, default_cfg, PenaltyConfig()) == 0
    assert term_Q((0, 0, 0, 0), state, default_cfg, PenaltyConfig(q_mode="precise"), 1) == 0


def test_term_Q_precise(default_cfg):
    state = ModulatorState.initial(4)
    # hand-evaluated: 37 * (1 + (-1)) = 0
    assert term_Q((1, 0, 0, 0), state, default_cfg, PenaltyConfig(q_mode="precise"), -1) == 0
    assert term_Q((1, 0, 0, 0), state, default_cfg, PenaltyConfig(q_mode="precise"), 1) == 74


# --- steps ----------------------------------------------------------------------

def test_zero_reference_holds(default_cfg, fresh_state):
    dec = cnlm_step(fresh_state, 0.0, default_cfg, PenaltyConfig(0.3, 0.1))
    assert dec.chosen == (0, 0, 0, 0)
    assert dec.objective == 0


def test_v90_tie_resolved_by_switching_voltage(default_cfg, fresh_state):
    # brute force: 88 (125 - 37) and 92 (37 + 55) are both 2 V away and both
    # switch two modules; 92 wins on the smaller switched voltage (92 < 162)
    nearest = sorted(level_sums(V4), key=lambda x: abs(90 - x))[:2]
    assert sorted(nearest) == [88, 92]
    dec = nlm_step(fresh_state, 90.0, default_cfg)
    assert output_voltage(dec.chosen, default_cfg) == 92
    assert dec.chosen == (1, 1, 0, 0)


def test_asymmetric_exact_level(default_cfg, fresh_state):
    # brute force: 46 = 83 - 37 is an exact level
    dec = nlm_step(fresh_state, 46.0, default_cfg)
    assert output_voltage(dec.chosen, default_cfg) == 46
    assert dec.o_term == 0


def test_symmetric_rounds():
    cfg = ConverterConfig((1.0, 1.0))
    dec = nlm_step(ModulatorState.initial(2), 1.4, cfg)
    assert output_voltage(dec.chosen, cfg) == 1


def test_saturation(default_cfg, fresh_state):
    assert nlm_step(fresh_state, 1000.0, default_cfg).chosen == (1, 1, 1, 1)
    assert nlm_step(fresh_state, -1000.0, default_cfg).chosen == (-1, -1, -1, -1)


def test_state_update(default_cfg):
    state = ModulatorState(7, (1, 0, 0, 0), (2, None, None, None))
    dec = nlm_step(state, 55.0, default_cfg)
    assert dec.chosen == (0, 1, 0, 0)
    assert dec.switched_mask == (True, True, False, False)
    assert dec.state == ModulatorState(8, (0, 1, 0, 0), (7, 7, None, None))


def test_decision_objective_recomputable(default_cfg):
    state = ModulatorState(50, (1, -1, 0, 1), (45, 40, None, 49))
    pcfg = PenaltyConfig((0.2, 0.5, 1.0, 2.0), 0.05, q_mode="precise")
    dec = cnlm_step(state, 117.3, default_cfg, pcfg, current_sign=-1)
    assert dec.objective == objective_of(dec.chosen, state, 117.3, default_cfg, pcfg, -1)
    assert dec.objective == dec.o_term + dec.alpha_p + pcfg.beta * dec.q_term


def test_per_module_alpha_matches_scalar(default_cfg):
    state = ModulatorState(20, (1, 1, 0, -1), (19, 17, 3, None))
    for v in np.linspace(-310, 310, 41):
        a = cnlm_step(state, v, default_cfg, PenaltyConfig(0.7, 0.03))
        b = cnlm_step(state, v, default_cfg, PenaltyConfig((0.7,) * 4, 0.03))
        assert a.chosen == b.chosen
        assert a.objective == pytest.approx(b.objective, rel=1e-12)


def test_floor_blocks_fast_switching(default_cfg):
    state = ModulatorState(150, (1, 0, 0, 0), (100, None, None, None))
    dec = cnlm_step(state, 0.0, default_cfg, PenaltyConfig(0.0, 0.0, min_interval_steps=100))
    # module 0 switched 50 steps ago and must stay at +1
    assert dec.chosen[0] == 1
    assert math.isfinite(dec.objective)


def test_dimension_mismatch(default_cfg):
    with pytest.raises(ValueError):
        cnlm_step(ModulatorState.initial(3), 1.0, default_cfg, PenaltyConfig())


# --- oracle & invariants ----------------------------------------------------------

variants = st.fixed_dictionaries({
    "o_norm": st.sampled_from([1, 2]),
    "p": st.sampled_from([1.0, 2.0]),
    "q_mode": st.sampled_from(["simplified", "precise"]),
    "floor": st.one_of(st.none(), st.integers(0, 20)),
    "sign": st.sampled_from([-1, 0, 1]),
})


@settings(max_examples=300)
@given(modulator_states(), st.floats(-400, 400), st.floats(0, 2), st.floats(0, 1), variants)
def test_matches_exhaustive_oracle(state, v_ref, alpha, beta, var):
    pcfg = PenaltyConfig(alpha, beta, var["o_norm"], var["p"], var["q_mode"], var["floor"])
    dec = cnlm_step(state, v_ref, ConverterConfig(V4), pcfg, var["sign"])
    best, arg = exhaustive_min(state.prev, state.last_switch, state.step, v_ref, list(V4), alpha, beta,
                               o_norm=var["o_norm"], p=var["p"], q_mode=var["q_mode"],
                               floor=var["floor"], sign=var["sign"])
    assert dec.objective == best
    assert dec.chosen == arg


@settings(max_examples=100)
@given(st.integers(1, 6), st.data())
def test_oracle_other_sizes(n, data):
    vs = data.draw(st.lists(st.integers(1, 200).map(float), min_size=n, max_size=n))
    state = data.draw(modulator_states(n=n))
    v_ref = data.draw(st.floats(-1200, 1200))
    alpha = data.draw(st.lists(st.floats(0, 2), min_size=n, max_size=n))
    beta = data.draw(st.floats(0, 1))
    dec = cnlm_step(state, v_ref, ConverterConfig(tuple(vs)), PenaltyConfig(tuple(alpha), beta))
    best, arg = exhaustive_min(state.prev, state.last_switch, state.step, v_ref, vs, alpha, beta)
    assert dec.objective == best
    assert dec.chosen == arg


@given(modulator_states(), st.floats(-400, 400), variants)
def test_reduction_to_nlm(state, v_ref, var):
    cfg = ConverterConfig(V4)
    a = cnlm_step(state, v_ref, cfg, PenaltyConfig(0.0, 0.0, q_mode=var["q_mode"]), var["sign"])
    b = nlm_step(state, v_ref, cfg)
    assert (a.chosen, a.objective, a.state) == (b.chosen, b.objective, b.state)


@given(st.integers(1, 6), st.floats(0.5, 150), st.floats(-2000, 2000))
def test_symmetric_rounding(n, v, v_ref):
    cfg = ConverterConfig((v,) * n)
    x = v_ref / v
    assume(abs(abs(x - math.floor(x)) - 0.5) > 1e-9)  # exact midpoints have two nearest levels
    dec = nlm_step(ModulatorState.initial(n), v_ref, cfg)
    level = round(min(max(x, -n), n))
    assert output_voltage(dec.chosen, cfg) == pytest.approx(v * level, rel=1e-12, abs=1e-9)


@given(modulator_states(), st.floats(-400, 400), st.floats(0, 5), st.floats(0, 5), variants)
def test_hold_state_feasible(state, v_ref, alpha, beta, var):
    cfg = ConverterConfig(V4)
    pcfg = PenaltyConfig(alpha, beta, var["o_norm"], var["p"], var["q_mode"], var["floor"])
    hold = oracle_objective(state.prev, state.prev, state.last_switch, state.step, v_ref, list(V4),
                            alpha, beta, o_norm=var["o_norm"], p=var["p"], q_mode=var["q_mode"],
                            floor=var["floor"], sign=var["sign"])
    assert math.isfinite(hold)
    dec = cnlm_step(state, v_ref, cfg, pcfg, var["sign"])
    assert math.isfinite(dec.objective)
    assert dec.objective <= hold


@given(modulator_states(), st.floats(-400, 400), st.floats(0, 1), st.floats(0.01, 100))
def test_scale_invariance_without_alpha(state, v_ref, beta, c):
    cfg = ConverterConfig(V4)
    scaled = ConverterConfig(tuple(c * v for v in V4))
    pcfg = PenaltyConfig(0.0, beta)
    a = cnlm_step(state, v_ref, cfg, pcfg)
    b = cnlm_step(state, c * v_ref, scaled, pcfg)
    assert a.chosen == b.chosen


def test_random_bulk_oracle():
    rng = random.Random(1234)
    cfg = ConverterConfig(V4)
    for _ in range(500):
        step = rng.randint(1, 50)
        prev = tuple(rng.choice((-1, 0, 1)) for _ in range(4))
        last = tuple(rng.choice([None, rng.randrange(step)]) for _ in range(4))
        v_ref = rng.choice([rng.uniform(-320, 320), float(rng.choice(level_sums(V4)))])
        alpha, beta = rng.uniform(0, 1), rng.choice([0.0, 0.01, 0.1, rng.uniform(0, 0.5)])
        state = ModulatorState(step, prev, last)
        dec = cnlm_step(state, v_ref, cfg, PenaltyConfig(alpha, beta))
        best, arg = exhaustive_min(prev, last, step, v_ref, list(V4), alpha, beta)
        assert (dec.objective, dec.chosen) == (best, arg)
