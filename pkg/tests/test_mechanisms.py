import numpy as np
import pytest
from hypothesis import given, strategies as st

from icevar import ConfigError, KINDS, MechanismSpec, eval_mechanism


def test_threshold_closed_form():
    spec = MechanismSpec("threshold", threshold_c=0.6, amplitude_a=1.6)
    assert eval_mechanism(spec, 1.0) == 1.6
    assert eval_mechanism(spec, -1.0) == -1.6
    assert eval_mechanism(spec, 0.0) == 0.0
    # dead zone is closed: |x| <= c maps to 0
    assert eval_mechanism(spec, 0.6) == 0.0
    assert eval_mechanism(spec, 0.6000001) == 1.6


def test_linear_clip_bounds():
    spec = MechanismSpec("linear")
    assert (spec.clip_lo, spec.clip_hi) == (-1.2, 1.2)
    assert eval_mechanism(spec, 2.0) == 1.2
    assert eval_mechanism(spec, -5.0) == -1.2
    assert eval_mechanism(spec, 0.7) == 0.7


def test_saturating_clip_bounds():
    spec = MechanismSpec("saturating")
    assert (spec.clip_lo, spec.clip_hi) == (-1.0, 1.0)
    assert eval_mechanism(spec, 2.0) == 1.0
    assert eval_mechanism(spec, 0.3) == 0.3


def test_sign_changing_branches():
    spec = MechanismSpec("sign_changing", threshold_c=0.6)
    assert eval_mechanism(spec, 0.3) == -0.3
    assert eval_mechanism(spec, -0.3) == 0.3
    # boundary belongs to the identity branch
    assert eval_mechanism(spec, 0.6) == 0.6
    assert eval_mechanism(spec, 2.0) == 2.0


def test_vectorized_matches_scalar():
    spec = MechanismSpec("threshold")
    xs = np.linspace(-3, 3, 41)
    vec = eval_mechanism(spec, xs)
    assert vec.shape == xs.shape
    assert all(vec[k] == eval_mechanism(spec, float(x)) for k, x in enumerate(xs))


@pytest.mark.parametrize("kind", KINDS)
def test_oddness_on_grid(kind):
    spec = MechanismSpec(kind)
    xs = np.linspace(-4, 4, 201)
    np.testing.assert_allclose(
        eval_mechanism(spec, -xs), -eval_mechanism(spec, xs), rtol=0, atol=0
    )


@pytest.mark.parametrize("kind", KINDS)
@given(x=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_boundedness(kind, x):
    spec = MechanismSpec(kind)
    bound = max(abs(spec.clip_lo), spec.clip_hi, spec.amplitude_a, abs(x))
    assert abs(eval_mechanism(spec, x)) <= bound


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "nope"},
        {"kind": "threshold", "threshold_c": 0.0},
        {"kind": "threshold", "threshold_c": -1.0},
        {"kind": "threshold", "amplitude_a": 0.0},
        {"kind": "linear", "clip_lo": 1.0, "clip_hi": -1.0},
        {"kind": "linear", "clip_lo": 0.5, "clip_hi": 0.5},
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ConfigError):
        MechanismSpec(**kwargs)
