"""Vector measures, vector projection families and the dual-pairing integral.

A projection family is stored by one kernel vector per atom, ``k_w``, with
``mu_L({w}) = L(k_w)``.  In finite dimension every such family is generated
by the vector measure ``E -> sum_{w in E} k_w`` and every bounded function is
properly integrable, so the integral is returned directly as a vector.

``tail_bound`` on measures and families certifies the semivariation of
whatever was truncated away (omitted atoms or omitted series terms); it
bounds both ``||mu_true(E) - mu(E)||`` and the integral error per unit of
``sup |f|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidMeasureError
from .measurable import (
    AtomicSpace,
    ComplexMeasure,
    MeasurableFunction,
    MeasurableSet,
    _check_same,
    certified_sup,
)
from .normed import BoundPair, Functional, SpaceDescriptor, abs_sum_dual_sup


def _frozen_rows(a, n, d):
    a = np.array(a, dtype=complex).reshape(n, d)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class VectorMeasure:
    space: SpaceDescriptor
    measurable: AtomicSpace
    atom_vectors: np.ndarray
    tail_norm_bound: float = 0.0

    def __post_init__(self):
        n, d = len(self.measurable), self.space.dim
        try:
            vecs = _frozen_rows(self.atom_vectors, n, d)
        except ValueError:
            raise DimensionMismatchError(
                f"expected {n} vectors of dimension {d}"
            ) from None
        if self.tail_norm_bound < 0:
            raise InvalidMeasureError("tail_norm_bound must be non-negative")
        object.__setattr__(self, "atom_vectors", vecs)
        object.__setattr__(self, "tail_norm_bound", float(self.tail_norm_bound))

    def __call__(self, E: MeasurableSet) -> np.ndarray:
        return measure_of_vector(self, E)


@dataclass(frozen=True, eq=False)
class VectorProjectionFamily:
    space: SpaceDescriptor
    measurable: AtomicSpace
    kernel: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        n, d = len(self.measurable), self.space.dim
        try:
            k = _frozen_rows(self.kernel, n, d)
        except ValueError:
            raise DimensionMismatchError(f"expected {n} kernel vectors of dimension {d}") from None
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "tail_bound", float(self.tail_bound))


def _has_tail(fam):
    return fam.measurable.truncated or fam.tail_bound > 0


def measure_of_vector(mu: VectorMeasure, E: MeasurableSet) -> np.ndarray:
    _check_same(mu.measurable, E.space)
    return mu.atom_vectors[E.mask()].sum(axis=0)


def family_of(mu: VectorMeasure) -> VectorProjectionFamily:
    """The projection family ``{L o mu}`` of a vector measure."""
    return VectorProjectionFamily(mu.space, mu.measurable, mu.atom_vectors, mu.tail_norm_bound)


def measure_of_family(fam: VectorProjectionFamily) -> VectorMeasure:
    """The generating vector measure (always exists in finite dimension)."""
    return VectorMeasure(fam.space, fam.measurable, fam.kernel, fam.tail_bound)


def _coeffs(L, d):
    c = L.coefficients if isinstance(L, Functional) else np.asarray(L, dtype=complex)
    if c.shape != (d,):
        raise DimensionMismatchError(f"functional of shape {c.shape} on a {d}-dimensional space")
    return c


def project(fam: VectorProjectionFamily, L) -> ComplexMeasure:
    """The scalar measure ``mu_L`` with weights ``L(k_w)``."""
    c = _coeffs(L, fam.space.dim)
    tail = fam.space.dual_norm(c) * fam.tail_bound
    return ComplexMeasure(fam.measurable, fam.kernel @ c, tail)


def integrate_vector(f: MeasurableFunction, fam: VectorProjectionFamily) -> np.ndarray:
    """Integral of ``f`` as the vector ``sum_w f(w) k_w``.

    It is characterised by ``L(result) = integral of f d(mu_L)`` for every
    functional ``L``.
    """
    certified_sup(f, fam.measurable, _has_tail(fam))
    return f.values(fam.measurable) @ fam.kernel


def integration_error_vector(f: MeasurableFunction, fam: VectorProjectionFamily) -> float:
    """Norm bound on the truncation error of :func:`integrate_vector`."""
    if fam.tail_bound == 0:
        return 0.0
    return certified_sup(f, fam.measurable, True) * fam.tail_bound


def is_null(fam: VectorProjectionFamily, E: MeasurableSet, tol=0.0) -> bool:
    _check_same(fam.measurable, E.space)
    k = fam.kernel[E.mask()]
    return bool(np.all(np.abs(k) <= tol))


def semivariation(fam: VectorProjectionFamily, A: MeasurableSet | None = None,
                  budget=256, seed=0) -> BoundPair:
    """Bracket ``sup_{||L|| <= 1} |mu_L|(A)``.

    At most 20 atoms also bring in the ``4 sup_{F in A} ||mu(F)||`` bound.
    """
    if A is None:
        V = fam.kernel
    else:
        _check_same(fam.measurable, A.space)
        V = fam.kernel[A.mask()]
    return abs_sum_dual_sup(V, fam.space, budget=budget, seed=seed)


def weighted_measure(g: MeasurableFunction, fam: VectorProjectionFamily) -> VectorMeasure:
    """The vector measure ``E -> integral over E of g dmu``."""
    gv = g.values(fam.measurable)
    tail = 0.0
    if fam.tail_bound > 0:
        tail = certified_sup(g, fam.measurable, True) * fam.tail_bound
    return VectorMeasure(fam.space, fam.measurable, gv[:, None] * fam.kernel, tail)


def series_vector_measure(lams, xs, space: SpaceDescriptor, tol=1e-12) -> VectorMeasure:
    """Truncation of ``mu(E) = sum_n 2^{-n} lam_n(E) x_n`` after ``N = len(lams)`` terms.

    Parameters
    ----------
    lams : sequence of ComplexMeasure
        Probability measures on a common atomic space.
    xs : sequence of vectors
        Unit vectors in ``space``, one per measure.
    space : SpaceDescriptor

    Returns
    -------
    VectorMeasure
        Its ``tail_norm_bound`` is ``2^{-N}``, which also bounds the integral
        error by ``sup|f| 2^{-N}``.
    """
    lams, xs = list(lams), [np.asarray(x, dtype=complex) for x in xs]
    if len(lams) != len(xs):
        raise ValueError("need one vector per measure")
    if not lams:
        raise ValueError("at least one term is required")
    measurable = lams[0].space
    for n, (lam, x) in enumerate(zip(lams, xs), start=1):
        _check_same(measurable, lam.space)
        if not lam.is_probability():
            raise InvalidMeasureError(f"term {n}: lambda_n is not a probability measure")
        if x.shape != (space.dim,):
            raise DimensionMismatchError(f"term {n}: vector has shape {x.shape}")
        if abs(space.vector_norm(x) - 1) > tol:
            raise InvalidMeasureError(f"term {n}: x_n is not a unit vector")
    W = np.array([lam.weights for lam in lams])  # (N, atoms)
    scale = 2.0 ** -np.arange(1, len(lams) + 1)
    atom_vectors = (W * scale[:, None]).T @ np.array(xs)
    return VectorMeasure(space, measurable, atom_vectors, 2.0 ** -len(lams))


def series_integral(f: MeasurableFunction, lams, xs) -> np.ndarray:
    """Closed form ``sum_n 2^{-n} (integral of f dlam_n) x_n``."""
    out = np.zeros(np.asarray(xs[0]).shape, dtype=complex)
    for n, (lam, x) in enumerate(zip(lams, xs), start=1):
        out = out + 2.0**-n * complex(np.dot(f.values(lam.space), lam.weights)) * np.asarray(x)
    return out
