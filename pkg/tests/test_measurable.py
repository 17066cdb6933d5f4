import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmeasure.errors import InvalidMeasureError, SpaceMismatchError, UnboundedFunctionError
from opmeasure.measurable import (
    AtomicSpace,
    ComplexMeasure,
    MeasurableFunction,
    integrate_scalar,
    integration_error,
    measure_of,
    setwise_defect,
    total_variation,
    total_variation_bound,
)

S3 = AtomicSpace.range(3)
MU = ComplexMeasure(S3, [1, -2j, 0.5])


def test_measure_of_sets():
    assert measure_of(MU, S3.subset([0, 1])) == 1 - 2j
    assert measure_of(MU, S3.empty()) == 0
    assert measure_of(MU, S3.whole()) == 1.5 - 2j


def test_total_variation_is_sum_of_moduli():
    assert total_variation(MU) == 3.5
    assert total_variation(MU, S3.subset([1, 2])) == 2.5


def test_set_algebra():
    A, B = S3.subset([0, 1]), S3.subset([1, 2])
    assert (A | B).members == frozenset({0, 1, 2})
    assert (A & B).members == frozenset({1})
    assert (A - B).members == frozenset({0})


def test_space_mismatch_raises():
    other = AtomicSpace.range(4)
    with pytest.raises(SpaceMismatchError):
        measure_of(MU, other.subset([0]))
    with pytest.raises(SpaceMismatchError):
        MU + ComplexMeasure.zero(other)


@pytest.mark.parametrize("bad", [
    lambda: AtomicSpace((0, 0)),
    lambda: AtomicSpace((0,), tail_bound=0.1),
    lambda: ComplexMeasure(S3, [1, 2]),
    lambda: ComplexMeasure(S3, [1, np.nan, 0]),
])
def test_invalid_constructions(bad):
    with pytest.raises(InvalidMeasureError):
        bad()


@pytest.mark.parametrize("i", [1, 2, 5, 100])
def test_setwise_defect_of_scaled_measure(i):
    # TV(mu)/i for mu_i = (1 - 1/i) mu
    assert setwise_defect((1 - 1 / i) * MU, MU) == pytest.approx(3.5 / i, rel=1e-15)


def test_function_forms_on_labels():
    S = AtomicSpace.from_labels([1, 2j, -1])
    np.testing.assert_array_equal(MeasurableFunction.poly([1, 0, 1]).values(S), [2, -3, 2])
    np.testing.assert_allclose(MeasurableFunction.exp(1j * np.pi).values(S)[[0, 2]], [-1, -1], atol=1e-15)
    np.testing.assert_array_equal(MeasurableFunction.indicator([0, 2]).values(S), [1, 0, 1])
    look = MeasurableFunction.lookup([-1, 1, 2j], [10, 20, 30])
    np.testing.assert_array_equal(look.values(S), [20, 30, 10])
    tab = MeasurableFunction.tabulated({2: 5, 0: 1, 1: 3})
    np.testing.assert_array_equal(tab.values(S), [1, 3, 5])
    np.testing.assert_array_equal(MeasurableFunction.modulus(MeasurableFunction.poly([0, 1])).values(S), [1, 2, 1])


def test_function_algebra():
    S = AtomicSpace.from_labels([0, 1, 2])
    f = MeasurableFunction.poly([0, 1])
    g = MeasurableFunction.constant(2)
    np.testing.assert_array_equal((f * g + 1).values(S), [1, 3, 5])
    np.testing.assert_array_equal((f - g).values(S), [-2, -1, 0])


def test_lookup_missing_label():
    with pytest.raises(ValueError):
        MeasurableFunction.lookup([1], [1]).values(AtomicSpace.from_labels([2]))


def test_integrate_scalar_oracle():
    f = MeasurableFunction.tabulated([2, 1j, 4], S3)
    # 2*1 + 1j*(-2j) + 4*0.5 = 2 + 2 + 2
    assert integrate_scalar(f, MU) == 6


def test_truncated_space_error_bound():
    S = AtomicSpace.range(4, kind="truncated-countable", tail_bound=2.0**-4)
    mu = ComplexMeasure(S, [0.5, 0.25, 0.125, 0.0625], tail_tv_bound=2.0**-4)
    f = MeasurableFunction.tabulated([1, -1, 1, -1], S)
    assert integrate_scalar(f, mu) == 0.3125
    assert integration_error(f, mu) == 2.0**-4
    assert total_variation_bound(mu) == 1.0
    with pytest.raises(UnboundedFunctionError):
        integrate_scalar(MeasurableFunction.poly([0, 1]), mu)
    assert integration_error(MeasurableFunction.poly([0, 1], bound=3.0), mu) == 3 * 2.0**-4


def test_quantized_error():
    S = AtomicSpace.from_labels(np.linspace(0, 1, 7))
    f = MeasurableFunction.exp(1.3j)
    q = f.quantized(S, 0.01)
    assert np.abs(q.values(S) - f.values(S)).max() <= 0.01 / np.sqrt(2) + 1e-15


weights = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                   min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(weights, st.data())
def test_integral_bounded_by_sup_times_tv(w, data):
    S = AtomicSpace.range(len(w))
    mu = ComplexMeasure(S, w)
    fv = data.draw(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                            min_size=len(w), max_size=len(w)))
    f = MeasurableFunction.tabulated(fv, S)
    lhs = abs(integrate_scalar(f, mu))
    assert lhs <= f.sup_norm(S) * total_variation(mu) * (1 + 1e-12) + 1e-300


@settings(max_examples=60, deadline=None)
@given(weights)
def test_tv_dominates_every_set(w):
    S = AtomicSpace.range(len(w))
    mu = ComplexMeasure(S, w)
    for k in range(len(w)):
        assert abs(measure_of(mu, S.subset(range(k)))) <= total_variation(mu) * (1 + 1e-12)
