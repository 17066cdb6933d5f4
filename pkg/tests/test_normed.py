import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmeasure.errors import DimensionMismatchError
from opmeasure.normed import (
    BoundPair,
    Functional,
    SpaceDescriptor,
    abs_sum_dual_sup,
    dual_ball_matrix,
    pair,
    phase_ascent,
)


def test_pairing_is_bilinear_without_conjugation():
    assert pair([1j, 0], [1j, 0]) == -1
    assert Functional([1, 2j])([3, 1]) == 3 + 2j


@pytest.mark.parametrize("norm,dual", [("l1", "linf"), ("l2", "l2"), ("linf", "l1")])
def test_dual_tags(norm, dual):
    assert SpaceDescriptor(3, norm).dual.norm == dual


def test_norm_values():
    x = [3, 4j]
    assert SpaceDescriptor(2, "l1").vector_norm(x) == 7
    assert SpaceDescriptor(2, "l2").vector_norm(x) == 5
    assert SpaceDescriptor(2, "linf").vector_norm(x) == 4


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_norming_functional(norm, rng):
    s = SpaceDescriptor(4, norm)
    w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    L = s.norming_functional(w)
    assert L(w) == pytest.approx(s.vector_norm(w), rel=1e-14)
    assert s.dual_norm(L.coefficients) == pytest.approx(1, rel=1e-14)


def test_unknown_norm():
    with pytest.raises(ValueError):
        SpaceDescriptor(2, "l3")


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_dual_ball_sample_is_in_ball(norm):
    s = SpaceDescriptor(5, norm)
    C = dual_ball_matrix(s, 50, seed=3)
    for c in C:
        assert s.dual_norm(c) <= 1 + 1e-12


# closed-form semivariation values
def test_abs_sum_l2_orthonormal():
    bp = abs_sum_dual_sup(np.eye(2), SpaceDescriptor(2, "l2"))
    assert bp.lower == pytest.approx(np.sqrt(2), rel=1e-12)
    assert bp.upper == pytest.approx(np.sqrt(2), rel=1e-12)


def test_abs_sum_linf_exact():
    V = np.array([[1, 1j], [1, -1]])
    bp = abs_sum_dual_sup(V, SpaceDescriptor(2, "linf"))
    assert bp.upper == 2.0
    assert bp.lower == pytest.approx(2.0, rel=1e-12)


def test_abs_sum_l1_basis():
    bp = abs_sum_dual_sup(np.eye(3), SpaceDescriptor(3, "l1"))
    assert (bp.lower, bp.upper) == pytest.approx((3.0, 3.0))


def test_abs_sum_scalar_is_tv():
    w = np.array([[1], [-2j], [0.5]])
    bp = abs_sum_dual_sup(w, SpaceDescriptor(1, "l2"))
    assert bp.lower == pytest.approx(3.5, rel=1e-14) and bp.upper == pytest.approx(3.5, rel=1e-14)


def test_abs_sum_zero_and_dim_mismatch():
    assert abs_sum_dual_sup(np.zeros((2, 2)), SpaceDescriptor(2)).upper == 0
    with pytest.raises(DimensionMismatchError):
        abs_sum_dual_sup(np.ones((2, 3)), SpaceDescriptor(2))


def sphere_grid_sup(V, na=400, nphi=1600):
    """Brute force over unit c in C^2 with the first coordinate real."""
    a = np.linspace(0, np.pi / 2, na)
    phi = np.linspace(0, 2 * np.pi, nphi, endpoint=False)
    A, P = np.meshgrid(a, phi, indexing="ij")
    c = np.stack([np.cos(A), np.sin(A) * np.exp(1j * P)], axis=-1)
    vals = np.abs(c @ V.T).sum(axis=-1)
    step = np.hypot(np.pi / 2 / (na - 1), np.pi / nphi)
    return float(vals.max()), step * float(np.linalg.norm(V, axis=1).sum())


@pytest.mark.parametrize("seed", range(5))
def test_abs_sum_l2_against_sphere_grid(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    bp = abs_sum_dual_sup(V, SpaceDescriptor(2, "l2"))
    val, err = sphere_grid_sup(V)
    assert bp.lower - err <= val <= bp.upper + 1e-12
    assert bp.lower >= val - 1e-9  # ascent should find the maximum


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_phase_ascent_monotone(norm, rng):
    s = SpaceDescriptor(4, norm)
    V = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    _, hist = phase_ascent(V, s, dual_ball_matrix(s, 1, 0)[-1])
    assert np.all(np.diff(hist) >= -1e-12 * hist[-1])


def test_bound_pair():
    b = BoundPair(1.0, 2.0, "x")
    assert b.contains(1.5) and not b.contains(2.5) and b.contains(2.05, slack=0.1)
    assert b.width == 1.0
    with pytest.raises(ValueError):
        BoundPair(2.0, 1.0, "bad")


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["l1", "l2", "linf"]), st.integers(1, 4), st.integers(1, 8), st.integers(0, 2**31))
def test_lower_le_upper(norm, d, m, seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    bp = abs_sum_dual_sup(V, SpaceDescriptor(d, norm), budget=32, seed=seed)
    assert bp.lower <= bp.upper
    # every dual-ball functional gives a value below the upper bound
    C = dual_ball_matrix(SpaceDescriptor(d, norm), 16, seed + 1)
    assert np.abs(C @ V.T).sum(axis=1).max() <= bp.upper * (1 + 1e-12)
