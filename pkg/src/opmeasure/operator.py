"""Operator measures, operator projection families and spectral measures.

An operator projection family carries one matrix ``K_w`` per atom, with
``mu_{L,x}({w}) = L(K_w x)``.  Its integral against ``f`` is the matrix
``sum_w f(w) K_w``; the bilinear form ``(L, x) -> L(M x)`` and the dual
operator ``L -> L o M`` (coefficients ``M^T c``) are views of that matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, InvalidMeasureError, NonNormalError
from .measurable import (
    AtomicSpace,
    ComplexMeasure,
    MeasurableFunction,
    MeasurableSet,
    _check_same,
    certified_sup,
)
from .normed import Functional, SpaceDescriptor
from .vector import VectorProjectionFamily

IDENTITY_TOL = 1e-10
SPECTRAL_TOL = 1e-10


def operator_norm(T, norm="l2") -> float:
    """Norm of ``T`` as an operator on ``(C^d, norm)``."""
    T = np.asarray(T)
    if norm == "l2":
        return float(np.linalg.norm(T, 2)) if T.size else 0.0
    if norm == "l1":
        return float(np.abs(T).sum(axis=0).max()) if T.size else 0.0
    if norm == "linf":
        return float(np.abs(T).sum(axis=1).max()) if T.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")


def _stack(mats, n, d, what):
    a = np.array(mats, dtype=complex)
    if n == 0:
        a = a.reshape(0, d, d)
    if a.shape != (n, d, d):
        raise DimensionMismatchError(f"expected {n} {what} of shape ({d}, {d}), got {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class OperatorMeasure:
    """Atom-indexed matrices; ``normalized`` asserts ``mu(Omega) = I``."""

    dim: int
    measurable: AtomicSpace
    atom_operators: np.ndarray
    normalized: bool = False
    tail_bound: float = 0.0

    def __post_init__(self):
        ops = _stack(self.atom_operators, len(self.measurable), self.dim, "atom operators")
        object.__setattr__(self, "atom_operators", ops)
        if self.normalized:
            defect = operator_norm(ops.sum(axis=0) - np.eye(self.dim))
            if defect > IDENTITY_TOL:
                raise InvalidMeasureError(f"mu(Omega) differs from identity by {defect:.3e}")

    def __call__(self, E: MeasurableSet) -> np.ndarray:
        _check_same(self.measurable, E.space)
        return self.atom_operators[E.mask()].sum(axis=0)


@dataclass(frozen=True, eq=False)
class OperatorProjectionFamily:
    dim: int
    measurable: AtomicSpace
    kernel: np.ndarray
    space: SpaceDescriptor | None = None
    tail_bound: float = 0.0

    def __post_init__(self):
        k = _stack(self.kernel, len(self.measurable), self.dim, "kernel matrices")
        object.__setattr__(self, "kernel", k)
        if self.space is None:
            object.__setattr__(self, "space", SpaceDescriptor(self.dim, "l2"))
        elif self.space.dim != self.dim:
            raise DimensionMismatchError("space dimension differs from matrix size")


def operator_family_of(mu: OperatorMeasure, norm="l2") -> OperatorProjectionFamily:
    return OperatorProjectionFamily(
        mu.dim, mu.measurable, mu.atom_operators, SpaceDescriptor(mu.dim, norm), mu.tail_bound
    )


def _vec(x, d, what="vector"):
    x = x.coefficients if isinstance(x, Functional) else np.asarray(x, dtype=complex)
    if x.shape != (d,):
        raise DimensionMismatchError(f"{what} of shape {x.shape} for dimension {d}")
    return x


def operator_projection(fam: OperatorProjectionFamily, L, x) -> ComplexMeasure:
    """The scalar measure ``mu_{L,x}``."""
    c, x = _vec(L, fam.dim, "functional"), _vec(x, fam.dim)
    tail = fam.space.dual_norm(c) * fam.space.vector_norm(x) * fam.tail_bound
    return ComplexMeasure(fam.measurable, np.einsum("i,wij,j->w", c, fam.kernel, x), tail)


def slice_by_vector(fam: OperatorProjectionFamily, x) -> VectorProjectionFamily:
    """The vector family ``mu(x) = {mu_{L,x} : L}`` with kernels ``K_w x``."""
    x = _vec(x, fam.dim)
    return VectorProjectionFamily(
        fam.space, fam.measurable, fam.kernel @ x, fam.space.vector_norm(x) * fam.tail_bound
    )


def slice_by_functional(fam: OperatorProjectionFamily, L) -> VectorProjectionFamily:
    """The family ``L(mu) = {mu_{L,x} : x}`` living in the dual space.

    Its kernels are ``K_w^T c``, so projecting it with the coefficients of
    ``x`` reproduces ``mu_{L,x}``.
    """
    c = _vec(L, fam.dim, "functional")
    kern = np.einsum("wij,i->wj", fam.kernel, c)
    return VectorProjectionFamily(
        fam.space.dual, fam.measurable, kern, fam.space.dual_norm(c) * fam.tail_bound
    )


def integrate_operator(f: MeasurableFunction, fam: OperatorProjectionFamily) -> np.ndarray:
    certified_sup(f, fam.measurable, fam.measurable.truncated or fam.tail_bound > 0)
    return np.einsum("w,wij->ij", f.values(fam.measurable), fam.kernel)


def integral_form(f: MeasurableFunction, fam: OperatorProjectionFamily, L, x) -> complex:
    """Bilinear-form view ``(L, x) -> integral of f dmu_{L,x}``."""
    c, x = _vec(L, fam.dim, "functional"), _vec(x, fam.dim)
    return complex(c @ integrate_operator(f, fam) @ x)


def integrate_operator_dual(f: MeasurableFunction, fam: OperatorProjectionFamily) -> np.ndarray:
    """Dual-operator view: maps functional coefficients ``c`` to ``M^T c``."""
    return integrate_operator(f, fam).T


def hilbert_measure(fam: OperatorProjectionFamily, x, y) -> ComplexMeasure:
    """``mu_{x,y}(A) = <mu(A) x, y>`` with the inner product conjugate in ``y``."""
    x, y = _vec(x, fam.dim), _vec(y, fam.dim)
    return ComplexMeasure(fam.measurable, np.einsum("i,wij,j->w", np.conj(y), fam.kernel, x))


def _basis_matrix(basis, d, tol):
    B = np.array(basis, dtype=complex)
    if isinstance(basis, (list, tuple)):
        B = B.T  # list of vectors -> columns
    if B.shape != (d, d):
        raise DimensionMismatchError(f"basis must hold {d} vectors of dimension {d}")
    defect = np.linalg.norm(B.conj().T @ B - np.eye(d), 2)
    if defect > tol:
        raise ValueError(f"basis is not orthonormal (defect {defect:.3e})")
    return B


def basis_reconstruction(fam: OperatorProjectionFamily, f: MeasurableFunction, x, basis,
                         tol=1e-10) -> np.ndarray:
    """Rebuild ``(integral of f dmu) x`` from its coordinates ``integral of f dmu_{x,e_i}``.

    ``basis`` is a list of orthonormal vectors or a matrix whose columns are.
    """
    B = _basis_matrix(basis, fam.dim, tol)
    fv = f.values(fam.measurable)
    out = np.zeros(fam.dim, dtype=complex)
    for i in range(fam.dim):
        e = B[:, i]
        out += complex(np.dot(fv, hilbert_measure(fam, x, e).weights)) * e
    return out


# spectral measures -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Resolution of the identity over a finite set of eigenvalues.

    Atoms are ``0..k-1`` labelled by the eigenvalues, in ascending
    ``(Re, Im)`` order when built by :func:`spectral_measure_of`.
    """

    eigenvalues: np.ndarray
    projections: np.ndarray
    measurable: AtomicSpace = field(init=False)
    check: bool = True

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=complex).reshape(-1)
        P = np.array(self.projections, dtype=complex)
        if P.ndim != 3 or P.shape[0] != lam.shape[0] or P.shape[1] != P.shape[2]:
            raise DimensionMismatchError("need one square projection per eigenvalue")
        lam.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "projections", P)
        object.__setattr__(self, "measurable", AtomicSpace.from_labels(lam))
        if self.check:
            bad = {k: v for k, v in self.defects().items() if v > SPECTRAL_TOL}
            if bad:
                raise InvalidMeasureError(f"not a spectral measure: {bad}")

    @property
    def dim(self):
        return self.projections.shape[1]

    def defects(self) -> dict:
        """Largest violation of each spectral-measure invariant.

        Frobenius norms, which dominate the operator norm.
        """
        P, d = self.projections, self.dim
        k = P.shape[0]
        fro = lambda a: float(np.sqrt((np.abs(a) ** 2).sum(axis=(-2, -1)).max())) if a.size else 0.0
        PH = P.conj().transpose(0, 2, 1)
        prods = np.einsum("iab,jbc->ijac", P, P)
        off = prods[~np.eye(k, dtype=bool)]
        return {
            "self_adjoint": fro(P - PH),
            "idempotent": fro(prods[np.arange(k), np.arange(k)] - P),
            "orthogonal": fro(off),
            "complete": fro((P.sum(axis=0) - np.eye(d))[None]),
        }

    def __call__(self, A: MeasurableSet) -> np.ndarray:
        _check_same(self.measurable, A.space)
        return self.projections[A.mask()].sum(axis=0)

    def integrate(self, f) -> np.ndarray:
        fv = _as_function(f).values(self.measurable)
        return np.einsum("j,jab->ab", fv, self.projections)

    def as_operator_measure(self) -> OperatorMeasure:
        return OperatorMeasure(self.dim, self.measurable, self.projections, normalized=True)

    def family(self) -> OperatorProjectionFamily:
        return OperatorProjectionFamily(self.dim, self.measurable, self.projections)


def _as_function(f) -> MeasurableFunction:
    if isinstance(f, MeasurableFunction):
        return f
    if callable(f):
        return MeasurableFunction.from_callable(f)
    raise TypeError(f"cannot evaluate {type(f).__name__} on a spectrum")


def normality_defect(T) -> float:
    T = np.asarray(T, dtype=complex)
    return operator_norm(T @ T.conj().T - T.conj().T @ T)


def _clusters(eigs, tol):
    # single linkage: eigenvalues within tol of each other share a cluster
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [(complex(np.mean(eigs[idx])), idx) for idx in groups.values()]
    clusters.sort(key=lambda c: (c[0].real, c[0].imag))
    return clusters


def spectral_measure_of(T, cluster_tol=None, normality_tol=1e-10) -> SpectralMeasure:
    """Spectral measure ``E^T`` of a normal matrix, with ``T = sum_j lam_j P_j``.

    Eigenvectors come from a complex Schur factorisation, which is unitary
    even inside degenerate eigenspaces.  Eigenvalues closer than
    ``cluster_tol`` (default ``1e-8 ||T||``) are merged into one atom
    labelled by their mean.

    Raises
    ------
    NonNormalError
        If ``||T T^H - T^H T|| > normality_tol ||T||^2``.
    """
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {T.shape}")
    d = T.shape[0]
    if d == 0:
        raise DimensionMismatchError("empty matrix")
    norm = operator_norm(T)
    defect = normality_defect(T)
    threshold = normality_tol * norm**2
    if defect > threshold:
        raise NonNormalError(defect, threshold)
    if cluster_tol is None:
        cluster_tol = 1e-8 * norm
    S, Z = scipy.linalg.schur(T, output="complex")
    eigs = np.diag(S)
    lams, projs = [], []
    for lam, idx in _clusters(eigs, cluster_tol):
        U = Z[:, idx]
        P = U @ U.conj().T
        lams.append(lam)
        projs.append((P + P.conj().T) / 2)
    return SpectralMeasure(np.array(lams), np.array(projs))


def functional_calculus(f, T, cluster_tol=None) -> np.ndarray:
    """``f(T) = integral of f dE^T`` for a normal matrix ``T``."""
    return spectral_measure_of(T, cluster_tol).integrate(f)


def check_multiplicative(E: SpectralMeasure, f, g) -> float:
    """Residual ``||(int f dE)(int g dE) - int fg dE||``."""
    f, g = _as_function(f), _as_function(g)
    return operator_norm(E.integrate(f) @ E.integrate(g) - E.integrate(f * g))


# series example ----------------------------------------------------------


def series_operator_measure(lams, Ts, N=None, norm="l2", tol=1e-10) -> OperatorMeasure:
    """Truncation of ``mu(E) = sum_n 2^{-n} lam_n(E) T_n`` after ``N`` terms.

    Each ``T_n`` must have unit operator norm for ``norm``.  The returned
    measure has ``tail_bound = 2^{-N}``; it is generally not normalized.
    """
    lams, Ts = list(lams), [np.asarray(T, dtype=complex) for T in Ts]
    if N is None:
        N = len(lams)
    if N < 1 or N > min(len(lams), len(Ts)):
        raise ValueError(f"N={N} terms requested but only {min(len(lams), len(Ts))} given")
    lams, Ts = lams[:N], Ts[:N]
    measurable = lams[0].space
    d = Ts[0].shape[0]
    for n, (lam, T) in enumerate(zip(lams, Ts), start=1):
        _check_same(measurable, lam.space)
        if not lam.is_probability():
            raise InvalidMeasureError(f"term {n}: lambda_n is not a probability measure")
        if T.shape != (d, d):
            raise DimensionMismatchError(f"term {n}: operator has shape {T.shape}")
        if abs(operator_norm(T, norm) - 1) > tol:
            raise InvalidMeasureError(f"term {n}: T_n does not have unit norm")
    W = np.array([lam.weights for lam in lams]) * (2.0 ** -np.arange(1, N + 1))[:, None]
    ops = np.einsum("nw,nij->wij", W, np.array(Ts))
    return OperatorMeasure(d, measurable, ops, normalized=False, tail_bound=2.0**-N)


def series_operator_integral(f: MeasurableFunction, lams, Ts, x) -> np.ndarray:
    """Closed form ``sum_n 2^{-n} (integral of f dlam_n) T_n x``."""
    x = np.asarray(x, dtype=complex)
    out = np.zeros_like(x)
    for n, (lam, T) in enumerate(zip(lams, Ts), start=1):
        out = out + 2.0**-n * complex(np.dot(f.values(lam.space), lam.weights)) * (np.asarray(T) @ x)
    return out
