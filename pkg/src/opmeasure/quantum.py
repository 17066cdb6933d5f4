"""Density operators, POVMs and instruments (operation measures).

Superoperators act on row-major vectorised matrices, so the Kraus operation
``rho -> M rho M^H`` is the matrix ``kron(M, conj(M))``.  The Hilbert inner
product is conjugate-linear in its second argument, which makes the pure
state of ``x`` equal to ``x x^H``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidMeasureError
from .measurable import AtomicSpace, ComplexMeasure, MeasurableFunction, MeasurableSet, _check_same
from .operator import _basis_matrix, operator_norm

STATE_TOL = 1e-10


def _hermitian_defect(A):
    return operator_norm(A - A.conj().T) if A.size else 0.0


def _min_eig(A):
    return float(np.linalg.eigvalsh((A + A.conj().T) / 2).min()) if A.size else 0.0


def _square(A, what="matrix"):
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {A.shape}")
    return A


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Non-negative (not necessarily unit-trace) state matrix.

    ``normalized=None`` infers the flag from the trace.
    """

    matrix: np.ndarray
    normalized: bool | None = None

    def __post_init__(self):
        rho = _square(self.matrix, "state")
        if _hermitian_defect(rho) > STATE_TOL:
            raise InvalidMeasureError("state is not Hermitian")
        if _min_eig(rho) < -STATE_TOL:
            raise InvalidMeasureError(f"state has negative eigenvalue {_min_eig(rho):.3e}")
        tr = float(np.trace(rho).real)
        unit = abs(tr - 1) <= STATE_TOL
        if self.normalized is None:
            object.__setattr__(self, "normalized", unit)
        elif self.normalized and not unit:
            raise InvalidMeasureError(f"normalized state has trace {tr}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, d):
        return cls(np.eye(d) / d, True)


def _matrix(rho):
    return rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)


@dataclass(frozen=True, eq=False)
class POVM:
    measurable: AtomicSpace
    effects: np.ndarray

    def __post_init__(self):
        P = np.array(self.effects, dtype=complex)
        n = len(self.measurable)
        if P.ndim != 3 or P.shape[0] != n or P.shape[1] != P.shape[2]:
            raise DimensionMismatchError(f"need {n} square effects, got shape {P.shape}")
        for w, E in zip(self.measurable.atoms, P):
            if _hermitian_defect(E) > STATE_TOL or _min_eig(E) < -STATE_TOL:
                raise InvalidMeasureError(f"effect {w!r} is not positive semidefinite")
        defect = operator_norm(P.sum(axis=0) - np.eye(P.shape[1]))
        if defect > STATE_TOL:
            raise InvalidMeasureError(f"effects sum to identity only within {defect:.3e}")
        P.setflags(write=False)
        object.__setattr__(self, "effects", P)

    @property
    def dim(self):
        return self.effects.shape[1]

    def __call__(self, A: MeasurableSet) -> np.ndarray:
        _check_same(self.measurable, A.space)
        return self.effects[A.mask()].sum(axis=0)


def kraus_superoperator(kraus) -> np.ndarray:
    """Row-major superoperator of ``rho -> sum_k M_k rho M_k^H``."""
    kraus = [np.asarray(M, dtype=complex) for M in kraus]
    if not kraus:
        raise ValueError("empty Kraus list; use a zero matrix for the null operation")
    return sum(np.kron(M, M.conj()) for M in kraus)


def apply_superoperator(S, rho) -> np.ndarray:
    r = _matrix(rho)
    d = r.shape[0]
    if S.shape != (d * d, d * d):
        raise DimensionMismatchError(f"superoperator of shape {S.shape} on a {d}x{d} state")
    return (S @ r.reshape(-1)).reshape(d, d)


class Instrument:
    """Operation measure with one completely positive map per atom.

    Build from Kraus families (``Instrument(space, kraus)``) or, as an escape
    hatch, from raw superoperators via :meth:`from_superoperators`.
    """

    def __init__(self, measurable: AtomicSpace, kraus, trace_preserving=False):
        if len(kraus) != len(measurable):
            raise DimensionMismatchError(f"need one Kraus family per atom ({len(measurable)})")
        fams = []
        for w, ops in zip(measurable.atoms, kraus):
            ops = [np.array(M, dtype=complex) for M in ops]
            if not ops or any(M.ndim != 2 or M.shape != ops[0].shape for M in ops):
                raise DimensionMismatchError(f"atom {w!r}: Kraus operators must share a square shape")
            fams.append(tuple(ops))
        shapes = {ops[0].shape for ops in fams}
        if len(shapes) > 1 or (shapes and next(iter(shapes))[0] != next(iter(shapes))[1]):
            raise DimensionMismatchError("Kraus operators must be square and of one size")
        self.measurable = measurable
        self.kraus = tuple(fams)
        self.trace_preserving = bool(trace_preserving)
        self.dim = fams[0][0].shape[0] if fams else 0
        completeness = sum((M.conj().T @ M for ops in fams for M in ops), np.zeros((self.dim,) * 2))
        if self.trace_preserving:
            defect = operator_norm(completeness - np.eye(self.dim))
            if defect > STATE_TOL:
                raise InvalidMeasureError(f"Kraus completeness fails by {defect:.3e}")
        elif self.dim and np.linalg.eigvalsh(completeness).max() > 1 + STATE_TOL:
            raise InvalidMeasureError("instrument increases trace")
        self.superoperators = np.array([kraus_superoperator(ops) for ops in fams])

    @classmethod
    def from_superoperators(cls, measurable: AtomicSpace, supers, trace_preserving=False,
                            samples=32, seed=0):
        """Instrument from raw ``d^2 x d^2`` maps, positivity checked on random states."""
        S = np.array(supers, dtype=complex)
        n = len(measurable)
        if S.ndim != 3 or S.shape[0] != n or S.shape[1] != S.shape[2]:
            raise DimensionMismatchError("need one square superoperator per atom")
        d = int(round(np.sqrt(S.shape[1])))
        if d * d != S.shape[1]:
            raise DimensionMismatchError("superoperator size is not a square")
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            rho = G @ G.conj().T
            rho /= np.trace(rho).real
            for w, Sw in zip(measurable.atoms, S):
                out = apply_superoperator(Sw, rho)
                if _hermitian_defect(out) > STATE_TOL or _min_eig(out) < -STATE_TOL:
                    raise InvalidMeasureError(f"operation {w!r} does not preserve positivity")
            total = np.trace(apply_superoperator(S.sum(axis=0), rho)).real
            if trace_preserving and abs(total - 1) > STATE_TOL:
                raise InvalidMeasureError("operation does not preserve trace")
            if total > 1 + STATE_TOL:
                raise InvalidMeasureError("operation increases trace")
        self = cls.__new__(cls)
        self.measurable = measurable
        self.kraus = None
        self.trace_preserving = bool(trace_preserving)
        self.dim = d
        self.superoperators = S
        return self

    @classmethod
    def luders(cls, povm: POVM):
        """Instrument ``rho -> sqrt(P_w) rho sqrt(P_w)`` of a POVM."""
        roots = []
        for E in povm.effects:
            H = (E + E.conj().T) / 2
            if np.linalg.norm(H @ H - H, 2) <= STATE_TOL:
                # a projection is its own root; eigh would amplify rounding near 0
                roots.append([H])
                continue
            vals, vecs = np.linalg.eigh(H)
            roots.append([(vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T])
        return cls(povm.measurable, roots, trace_preserving=True)


def pure_state(x) -> DensityOperator:
    """The state ``rho_x = x x^H``, i.e. ``y -> <y, x> x``."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    if not np.any(x):
        raise ValueError("pure_state of the zero vector")
    return DensityOperator(np.outer(x, x.conj()))


def trace_pair(T, rho) -> complex:
    """``tr(T rho)``."""
    T, r = np.asarray(T, dtype=complex), _matrix(rho)
    if T.shape != r.shape:
        raise DimensionMismatchError(f"operator {T.shape} paired with state {r.shape}")
    return complex(np.sum(T * r.T))


def povm_probabilities(P: POVM, rho: DensityOperator) -> ComplexMeasure:
    """Outcome distribution ``p_w = tr(P_w rho)`` of a normalized state."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    if not rho.normalized:
        raise InvalidMeasureError("outcome probabilities need a unit-trace state")
    if rho.dim != P.dim:
        raise DimensionMismatchError(f"{P.dim}-dimensional POVM on a {rho.dim}-dimensional state")
    p = np.einsum("wij,ji->w", P.effects, rho.matrix)
    return ComplexMeasure(P.measurable, p)


def povm_integrate(f: MeasurableFunction, P: POVM) -> np.ndarray:
    return np.einsum("w,wij->ij", f.values(P.measurable), P.effects)


def instrument_apply(E: Instrument, A: MeasurableSet, rho) -> DensityOperator:
    """Post-measurement (unnormalised) state ``E(A)(rho)``."""
    _check_same(E.measurable, A.space)
    r = _matrix(rho)
    if r.shape != (E.dim, E.dim):
        raise DimensionMismatchError(f"{E.dim}-dimensional instrument on state of shape {r.shape}")
    S = E.superoperators[A.mask()].sum(axis=0) if len(A) else np.zeros((E.dim**2,) * 2)
    return DensityOperator(apply_superoperator(S, r))


def operation_projection(E: Instrument, T, rho) -> ComplexMeasure:
    """The scalar measure ``A -> tr(T E(A)(rho))``."""
    T, r = np.asarray(T, dtype=complex), _matrix(rho)
    if T.shape != (E.dim, E.dim) or r.shape != (E.dim, E.dim):
        raise DimensionMismatchError("operator and state must match the instrument dimension")
    outs = (E.superoperators @ r.reshape(-1)).reshape(-1, E.dim, E.dim)
    return ComplexMeasure(E.measurable, np.einsum("ij,wji->w", T, outs))


def operation_integrate(f: MeasurableFunction, E: Instrument) -> np.ndarray:
    """Superoperator of ``rho -> sum_w f(w) E({w})(rho)``."""
    return np.einsum("w,wab->ab", f.values(E.measurable), E.superoperators)


def mixed_state_extension_check(P: POVM, E: Instrument, basis=None, mode="states", tol=1e-9) -> dict:
    """Compare ``E({w})(rho_{e_i})`` with the POVM action on basis vectors.

    The defining equation sets a state equal to a vector, so the right-hand
    side has to be read into the state space first.  ``mode="states"`` maps
    ``P({w}) e_i`` through ``x -> x x^H``; ``mode="expectation"`` compares
    ``tr(T E({w})(rho_{e_i}))`` with ``<P({w}) e_i, T^H e_i>`` for all matrix
    units ``T``, i.e. ``E({w})(rho_{e_i})`` against ``P({w}) rho_{e_i}``.
    """
    _check_same(P.measurable, E.measurable)
    if P.dim != E.dim:
        raise DimensionMismatchError("POVM and instrument dimensions differ")
    if mode not in ("states", "expectation"):
        raise ValueError(f"unknown mode {mode!r}")
    d = P.dim
    B = _basis_matrix(np.eye(d) if basis is None else basis, d, 1e-10)
    rows = []
    for i in range(d):
        e = B[:, i]
        rho_e = np.outer(e, e.conj())
        for w, Pw, Sw in zip(P.measurable.atoms, P.effects, E.superoperators):
            lhs = apply_superoperator(Sw, rho_e)
            if mode == "states":
                y = Pw @ e
                rhs = np.outer(y, y.conj())
            else:
                rhs = Pw @ rho_e
            rows.append({"basis_index": i, "atom": w, "residual": operator_norm(lhs - rhs)})
    worst = max((r["residual"] for r in rows), default=0.0)
    return {
        "mode": mode,
        "interpretation": (
            "E(A)(rho_e) compared with rho_{P(A)e}" if mode == "states"
            else "E(A)(rho_e) compared with P(A) rho_e via trace pairings"
        ),
        "max_residual": worst,
        "per_atom": rows,
        "tolerance": tol,
        "pass": bool(worst <= tol),
    }
