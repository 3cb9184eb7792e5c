import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cnlm import ReferenceSpec, sample_reference
from cnlm.signals import reference_values, step_references


def test_default_matches_benchmark():
    spec = ReferenceSpec()
    assert (spec.amplitude, spec.fundamental_hz, spec.sigma_s) == (300.0, 10e3, 80e-6)
    assert spec.duration_s == pytest.approx(600e-6)
    assert spec.center_s == pytest.approx(300e-6)


def test_gaussian_zero_at_center():
    spec = ReferenceSpec()
    assert sample_reference(spec, spec.center_s) == 0.0


def test_gaussian_peak_with_wide_envelope():
    spec = ReferenceSpec(sigma_s=1.0, duration_s=10.0)
    assert sample_reference(spec, spec.center_s + 1 / (4 * spec.fundamental_hz)) == pytest.approx(300, rel=1e-6)


@given(st.floats(0, 300e-6))
def test_gaussian_odd_symmetry(tau):
    spec = ReferenceSpec()
    a = sample_reference(spec, spec.center_s + tau)
    b = sample_reference(spec, spec.center_s - tau)
    assert a == pytest.approx(-b, abs=1e-9)


@given(st.sampled_from(["gaussian_polyphasic", "sine", "constant"]), st.floats(0, 600e-6))
def test_bounded_by_amplitude(kind, t):
    spec = ReferenceSpec(kind=kind)
    assert abs(sample_reference(spec, t)) <= spec.amplitude + 1e-12


def test_sine_and_constant():
    assert sample_reference(ReferenceSpec("sine", 10.0, 1e3, duration_s=1e-3), 0.25e-3) == pytest.approx(10.0)
    assert sample_reference(ReferenceSpec("constant", 4.0), 1e-4) == 4.0


def test_validation():
    with pytest.raises(ValueError, match="6 \\* sigma_s"):
        ReferenceSpec(duration_s=400e-6)
    with pytest.raises(ValueError):
        ReferenceSpec(kind="square")
    with pytest.raises(ValueError):
        sample_reference(ReferenceSpec(), 1.0)
    with pytest.raises(ValueError):
        ReferenceSpec(kind="file")


def test_file_nearest_sample(tmp_path):
    path = tmp_path / "ref.csv"
    path.write_text("t_s,v_V\n0,0\n1e-6,10\n2e-6,20\n")
    spec = ReferenceSpec(kind="file", path=str(path), duration_s=2e-6)
    assert reference_values(spec, [0.0, 0.4e-6, 0.6e-6, 2e-6]).tolist() == [0, 0, 10, 20]


def test_file_missing(tmp_path):
    spec = ReferenceSpec(kind="file", path=str(tmp_path / "missing.csv"), duration_s=1e-6)
    with pytest.raises(OSError):
        sample_reference(spec, 0.0)


def test_step_references_count():
    refs = step_references(ReferenceSpec(), 200e-9)
    assert len(refs) == 3000
    assert np.max(np.abs(refs)) <= 300
