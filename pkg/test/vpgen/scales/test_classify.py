import pytest
from pytest import mark, param

from vpgen.scales.classify import CERTIFICATE_ROWS, classify_scale, validate_scale
from vpgen.scales.model import (
    Scale,
    ScaleError,
    ScaleFamily,
    iterated_log,
    power_law,
    power_of_log,
)


@mark.parametrize(
    "scale, p, variant, expected",
    [
        param(power_of_log(2.0), 2.0, 1, True, id="power of log at its own p"),
        param(power_of_log(3.0), 2.0, 1, True, id="slower power of log"),
        param(power_of_log(1.0), 2.0, 1, False, id="faster power of log"),
        param(power_law(0.1), 2.0, 1, False, id="power law is never logarithmic"),
        param(iterated_log(2.0, 0.5), 2.0, 2, True, id="iterated log with small exponent"),
        param(iterated_log(2.0, 1.0), 2.0, 2, False, id="iterated log at the critical exponent"),
        param(power_of_log(2.0), 2.0, 2, False, id="power of log fails the exponential class"),
    ],
)
def test__classify_scale__membership(scale: Scale, p: float, variant: int, expected: bool):
    report = classify_scale(scale, p, variant)

    assert report.member is expected
    assert report.variant == variant
    assert report.p == p


def test__classify_scale__variant_1_max_value_is_the_ratio_bound():
    report = classify_scale(power_of_log(2.0), 2.0, 1)

    assert report.max_value == pytest.approx(1.0)


def test__classify_scale__certificate_is_a_thinned_table():
    frame = classify_scale(power_of_log(2.0), 2.0, 1).to_frame()

    assert list(frame.columns) == ["lam", "value"]
    assert len(frame) == CERTIFICATE_ROWS
    assert frame["lam"].is_monotonic_increasing


@mark.parametrize(
    "p, variant",
    [param(0.0, 1, id="p=0"), param(-1.0, 2, id="negative p"), param(2.0, 3, id="variant 3")],
)
def test__classify_scale__rejects_invalid_parameters(p, variant):
    with pytest.raises(ScaleError):
        classify_scale(power_of_log(2.0), p, variant)


@mark.parametrize(
    "exponent", [param(0.0, id="constant width"), param(-1.0, id="growing width")]
)
def test__validate_scale__rejects_scales_not_decreasing_to_zero(exponent):
    scale = Scale(name="flat", family=ScaleFamily.ITERATED_LOG, p=1.0, exponent=exponent)

    with pytest.raises(ScaleError):
        validate_scale(scale)


BUILTIN_SCALES = [
    param(power_of_log(1.0), id="power of log p=1"),
    param(power_of_log(2.0), id="power of log p=2"),
    param(power_of_log(3.0), id="power of log p=3"),
    param(iterated_log(2.0, 0.5), id="iterated log 0.5/2"),
    param(iterated_log(2.0, 1.0), id="iterated log 1/2"),
    param(iterated_log(1.0, 0.5), id="iterated log 0.5/1"),
    param(power_law(0.1), id="power law"),
]


@mark.parametrize("scale", BUILTIN_SCALES)
@mark.parametrize("p", [param(1.0, id="p=1"), param(2.0, id="p=2"), param(3.0, id="p=3")])
def test__classify_scale__exponential_class_is_inside_the_logarithmic_one(scale: Scale, p):
    exponential = classify_scale(scale, p, 2)
    logarithmic = classify_scale(scale, p, 1)

    assert logarithmic.member or not exponential.member


@mark.parametrize("own", [1.0, 1.5, 2.0, 3.0, 4.0])
@mark.parametrize(
    "p, q",
    [
        param(2.0, 1.0, id="p=2 q=1"),
        param(3.0, 2.0, id="p=3 q=2"),
        param(4.0, 1.5, id="p=4 q=1.5"),
        param(2.0, 2.0, id="p=q"),
    ],
)
def test__classify_scale__power_of_log_classes_shrink_as_p_grows(own, p, q):
    scale = power_of_log(own)

    in_p = classify_scale(scale, p, 1).member
    in_q = classify_scale(scale, q, 1).member

    assert in_p is (own >= p)
    assert in_q or not in_p
