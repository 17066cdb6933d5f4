import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmeasure.errors import DimensionMismatchError, UnboundedFunctionError
from opmeasure.measurable import AtomicSpace, ComplexMeasure, MeasurableFunction, integrate_scalar
from opmeasure.normed import SpaceDescriptor, pair
from opmeasure.vector import (
    VectorMeasure,
    VectorProjectionFamily,
    family_of,
    integrate_vector,
    integration_error_vector,
    is_null,
    measure_of_family,
    project,
    semivariation,
    series_integral,
    series_vector_measure,
    weighted_measure,
)

L2 = SpaceDescriptor(2, "l2")
AB = AtomicSpace(("a", "b"))
BASIS = VectorProjectionFamily(L2, AB, np.eye(2))


def test_coordinate_projection():
    mu = VectorMeasure(L2, AtomicSpace.range(1), [[3 - 1j, 2]])
    assert project(family_of(mu), [1, 0]).weights[0] == 3 - 1j


def test_zero_measure_and_zero_functional():
    mu = VectorMeasure(L2, AB, np.zeros((2, 2)))
    assert not np.any(project(family_of(mu), [0.3, 1j]).weights)
    assert not np.any(project(BASIS, [0, 0]).weights)


def test_projection_is_linear_in_functional(rng):
    fam = VectorProjectionFamily(L2, AtomicSpace.range(5), rng.standard_normal((5, 2)) + 1j)
    L1, L2_ = rng.standard_normal(2) + 1j, rng.standard_normal(2)
    a, b = 2 - 1j, 0.5j
    lhs = project(fam, a * L1 + b * L2_).weights
    rhs = a * project(fam, L1).weights + b * project(fam, L2_).weights
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_integrate_two_atoms():
    f = MeasurableFunction.tabulated({"a": 2, "b": 3})
    out = integrate_vector(f, BASIS)
    np.testing.assert_array_equal(out, [2, 3])
    rng = np.random.default_rng(0)
    for _ in range(10):
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        assert pair(c, out) == pytest.approx(integrate_scalar(f, project(BASIS, c)), abs=1e-14)


def test_integrate_indicator_and_one(rng):
    fam = VectorProjectionFamily(L2, AtomicSpace.range(4), rng.standard_normal((4, 2)))
    np.testing.assert_allclose(integrate_vector(MeasurableFunction.constant(1), fam), fam.kernel.sum(0))
    np.testing.assert_allclose(integrate_vector(MeasurableFunction.indicator([1, 3]), fam),
                               fam.kernel[[1, 3]].sum(0))


def test_is_null():
    fam = VectorProjectionFamily(L2, AtomicSpace.range(3), [[0, 0], [0, 0], [1, 0]])
    assert is_null(fam, fam.measurable.empty())
    assert is_null(fam, fam.measurable.subset([0, 1]))
    assert not is_null(fam, fam.measurable.subset([1, 2]))


def test_measure_family_round_trip(rng):
    mu = VectorMeasure(L2, AtomicSpace.range(3), rng.standard_normal((3, 2)))
    back = measure_of_family(family_of(mu))
    np.testing.assert_array_equal(back.atom_vectors, mu.atom_vectors)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        VectorMeasure(L2, AB, np.ones((2, 3)))
    with pytest.raises(DimensionMismatchError):
        project(BASIS, [1, 2, 3])


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_semivariation_single_vector(norm):
    s = SpaceDescriptor(3, norm)
    v = np.array([[1, -2j, 0.5]])
    bp = semivariation(VectorProjectionFamily(s, AtomicSpace.range(1), v))
    assert bp.lower == pytest.approx(s.vector_norm(v[0]), rel=1e-12)
    assert bp.upper == pytest.approx(s.vector_norm(v[0]), rel=1e-12)


def test_semivariation_scalar_is_tv():
    w = [1, -2j, 0.5, 3 + 4j]
    fam = VectorProjectionFamily(SpaceDescriptor(1), AtomicSpace.range(4), np.array(w)[:, None])
    bp = semivariation(fam)
    assert bp.lower == pytest.approx(8.5, rel=1e-14) and bp.upper == pytest.approx(8.5, rel=1e-14)


def test_semivariation_sqrt2():
    bp = semivariation(BASIS)
    assert bp.lower >= np.sqrt(2) - 1e-9 and bp.contains(np.sqrt(2), 1e-12)


def test_semivariation_on_subset():
    bp = semivariation(BASIS, AB.subset(["a"]))
    assert bp.lower == pytest.approx(1) and bp.upper == pytest.approx(1)


def test_weighted_measure_cases(rng):
    fam = VectorProjectionFamily(L2, AtomicSpace.range(4), rng.standard_normal((4, 2)))
    np.testing.assert_array_equal(weighted_measure(MeasurableFunction.constant(1), fam).atom_vectors, fam.kernel)
    assert not np.any(weighted_measure(MeasurableFunction.constant(0), fam).atom_vectors)
    sup = weighted_measure(MeasurableFunction.indicator([2]), fam).atom_vectors
    assert not np.any(sup[[0, 1, 3]]) and np.array_equal(sup[2], fam.kernel[2])


def test_truncated_family_needs_bounded_function():
    S = AtomicSpace.from_labels([1, 2], kind="truncated-countable", tail_bound=0.25)
    fam = VectorProjectionFamily(L2, S, np.eye(2), 0.25)
    with pytest.raises(UnboundedFunctionError):
        integrate_vector(MeasurableFunction.poly([0, 1]), fam)
    f = MeasurableFunction.exp(1j, bound=1.0)
    integrate_vector(f, fam)
    assert integration_error_vector(f, fam) == 0.25
    # the projected measure carries a tail scaled by the dual norm of L
    assert project(fam, [3, 4]).tail_tv_bound == 5 * 0.25


def test_series_geometric_sum():
    S = AtomicSpace.range(3)
    lams = [ComplexMeasure(S, [0.2, 0.3, 0.5])] * 10
    xs = [np.array([1, 0])] * 10
    mu = series_vector_measure(lams, xs, L2)
    out = integrate_vector(MeasurableFunction.constant(1), family_of(mu))
    np.testing.assert_allclose(out, [1 - 2.0**-10, 0], rtol=0, atol=1e-16)
    assert mu.tail_norm_bound == 2.0**-10
    np.testing.assert_allclose(mu(S.whole()), [1 - 2.0**-10, 0], atol=1e-16)


def test_series_rejects_bad_terms():
    S = AtomicSpace.range(2)
    with pytest.raises(ValueError):
        series_vector_measure([ComplexMeasure(S, [0.7, 0.7])], [np.array([1, 0])], L2)
    with pytest.raises(ValueError):
        series_vector_measure([ComplexMeasure(S, [0.5, 0.5])], [np.array([2, 0])], L2)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 5), st.sampled_from(["l1", "l2", "linf"]), st.integers(0, 2**31))
def test_lewis_identity_property(m, d, norm, seed):
    rng = np.random.default_rng(seed)
    fam = VectorProjectionFamily(SpaceDescriptor(d, norm), AtomicSpace.range(m),
                                 rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d)))
    f = MeasurableFunction.tabulated(rng.standard_normal(m) + 1j * rng.standard_normal(m), fam.measurable)
    c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    lhs = pair(c, integrate_vector(f, fam))
    rhs = integrate_scalar(f, project(fam, c))
    scale = float(np.abs(f.values(fam.measurable)) @ np.abs(fam.kernel @ c))
    assert abs(lhs - rhs) <= 1e-11 * max(scale, 1e-300)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_series_closed_form_property(N, seed):
    rng = np.random.default_rng(seed)
    S = AtomicSpace.range(3)
    lams = []
    for _ in range(N):
        w = rng.random(3) + 0.01
        lams.append(ComplexMeasure(S, w / w.sum()))
    xs = [x / np.linalg.norm(x) for x in rng.standard_normal((N, 2))]
    f = MeasurableFunction.tabulated(rng.standard_normal(3), S)
    got = integrate_vector(f, family_of(series_vector_measure(lams, xs, L2)))
    np.testing.assert_allclose(got, series_integral(f, lams, xs), rtol=0, atol=1e-14)
