import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cnlm import (
    CapacityError,
    ConverterConfig,
    distinct_levels,
    enumerate_states,
    geometric_profile,
    output_voltage,
)
from oracles import level_sums

voltages = st.lists(st.integers(1, 500).map(float), min_size=1, max_size=5)


def test_output_voltage_full_positive(default_cfg):
    assert output_voltage([1, 1, 1, 1], default_cfg) == 300.0


def test_output_voltage_zero_and_mixed(default_cfg):
    assert output_voltage([0, 0, 0, 0], default_cfg) == 0.0
    assert output_voltage([1, 0, -1, 0], default_cfg) == -46.0


def test_output_voltage_dimension_mismatch(default_cfg):
    with pytest.raises(ValueError, match="3 entries"):
        output_voltage([1, 0, 1], default_cfg)


def test_output_voltage_rejects_bad_state(default_cfg):
    with pytest.raises(ValueError):
        output_voltage([2, 0, 0, 0], default_cfg)


@pytest.mark.parametrize("kwargs", [
    dict(voltages=()),
    dict(voltages=(10.0, -1.0)),
    dict(voltages=(10.0,), dead_time=300e-9, control_step=200e-9),
    dict(voltages=(10.0,), control_step=0.0),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ConverterConfig(**kwargs)


def test_asymmetric_flag():
    assert ConverterConfig((37, 55, 83, 125)).is_asymmetric
    assert not ConverterConfig((75, 75, 75)).is_asymmetric


def test_enumerate_base_case():
    assert enumerate_states(1).tolist() == [[-1], [0], [1]]


def test_enumerate_order_least_significant_first():
    states = enumerate_states(2).tolist()
    assert states[:4] == [[-1, -1], [0, -1], [1, -1], [-1, 0]]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_enumerate_complete_and_unique(n):
    states = enumerate_states(n)
    assert states.shape == (3**n, n)
    assert len({tuple(s) for s in states}) == 3**n


def test_enumerate_four_modules():
    assert len(enumerate_states(4)) == 81


def test_enumerate_cap():
    with pytest.raises(CapacityError, match="cap of 12"):
        enumerate_states(13)
    with pytest.raises(CapacityError, match="cap of 3"):
        enumerate_states(4, cap=3)


def test_levels_symmetric():
    assert distinct_levels(ConverterConfig((1, 1, 1))) == [-3, -2, -1, 0, 1, 2, 3]
    assert distinct_levels(ConverterConfig((1,))) == [-1, 0, 1]


def test_levels_default_profile_matches_brute_force(default_cfg):
    expected = level_sums([37, 55, 83, 125])
    assert len(expected) == 81  # frozen from brute force: no sum collisions
    assert distinct_levels(default_cfg) == expected


@given(voltages)
def test_levels_match_brute_force(vs):
    assert distinct_levels(ConverterConfig(tuple(vs))) == level_sums(vs)


@given(st.integers(1, 6), st.floats(0.5, 200))
def test_levels_symmetric_count(n, v):
    levels = distinct_levels(ConverterConfig((v,) * n))
    assert len(levels) == 2 * n + 1
    assert np.allclose(levels, v * np.arange(-n, n + 1), rtol=1e-12)


@given(voltages)
def test_levels_bounded_by_state_count(vs):
    assert len(distinct_levels(ConverterConfig(tuple(vs)))) <= 3 ** len(vs)


@settings(max_examples=50)
@given(voltages, st.data(), st.floats(0.01, 100))
def test_output_voltage_linear(vs, data, c):
    s = data.draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=len(vs), max_size=len(vs)))
    cfg = ConverterConfig(tuple(vs))
    scaled = ConverterConfig(tuple(c * v for v in vs))
    assert output_voltage(s, scaled) == pytest.approx(c * output_voltage(s, cfg), rel=1e-12, abs=1e-9)
    assert abs(output_voltage(s, cfg)) <= cfg.max_output


def test_geometric_profile_ratio_1_5():
    # 37 * 1.5 = 55.5 rounds to 56; the bundled scenarios use the literal 55
    assert geometric_profile(37, 1.5, 4, round_to_volt=True) == [37, 56, 83, 125]
    assert geometric_profile(37, 1.5, 4) == [37.0, 55.5, 83.25, 124.875]


def test_geometric_profile_small_cases():
    assert geometric_profile(1, 2, 3) == [1, 2, 4]
    assert geometric_profile(5, 1.5, 1) == [5]
    with pytest.raises(ValueError):
        geometric_profile(0, 1.5, 3)
