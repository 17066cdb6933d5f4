"""Seeded random instances for tests and the verification harness."""

from __future__ import annotations

import numpy as np

from .measurable import AtomicSpace, ComplexMeasure
from .normed import SpaceDescriptor
from .operator import OperatorProjectionFamily, operator_norm
from .quantum import POVM, DensityOperator, Instrument
from .vector import VectorProjectionFamily


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(d, rng):
    """Haar-distributed unitary: QR of a Gaussian matrix with phases fixed."""
    Q, R = np.linalg.qr(complex_normal(rng, (d, d)))
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph[None, :]


def random_spectrum(d, rng, kind="normal", degenerate=False):
    if kind == "hermitian":
        lam = rng.standard_normal(d).astype(complex)
    elif kind == "unitary":
        lam = np.exp(2j * np.pi * rng.random(d))
    else:
        lam = complex_normal(rng, d)
    if degenerate and d > 1:
        # copy a random block of eigenvalues onto others
        k = int(rng.integers(1, d))
        src = rng.integers(0, d - k, size=k) if d - k > 0 else np.zeros(k, dtype=int)
        lam[d - k:] = lam[src]
    return lam


def random_normal_matrix(d, rng, kind="normal", degenerate=False):
    """``U diag(lam) U^H`` with Haar ``U``; returns ``(T, U, lam)``."""
    U = random_unitary(d, rng)
    lam = random_spectrum(d, rng, kind, degenerate)
    return (U * lam[None, :]) @ U.conj().T, U, lam


def random_measure(space: AtomicSpace, rng, scale=1.0) -> ComplexMeasure:
    return ComplexMeasure(space, scale * complex_normal(rng, len(space)))


def random_probability(space: AtomicSpace, rng) -> ComplexMeasure:
    w = rng.random(len(space)) + 1e-3
    return ComplexMeasure(space, w / w.sum())


def random_vector_family(space: SpaceDescriptor, n_atoms, rng) -> VectorProjectionFamily:
    return VectorProjectionFamily(space, AtomicSpace.range(n_atoms), complex_normal(rng, (n_atoms, space.dim)))


def random_operator_family(d, n_atoms, rng, norm="l2") -> OperatorProjectionFamily:
    return OperatorProjectionFamily(
        d, AtomicSpace.range(n_atoms), complex_normal(rng, (n_atoms, d, d)) / np.sqrt(d),
        SpaceDescriptor(d, norm),
    )


def random_unit_vector(space: SpaceDescriptor, rng):
    x = complex_normal(rng, space.dim)
    return x / space.vector_norm(x)


def random_unit_operator(d, rng, norm="l2"):
    T = complex_normal(rng, (d, d))
    return T / operator_norm(T, norm)


def random_density(d, rng, rank=None) -> DensityOperator:
    G = complex_normal(rng, (d, rank or d))
    rho = G @ G.conj().T
    return DensityOperator(rho / np.trace(rho).real, True)


def _inv_sqrt(S):
    vals, vecs = np.linalg.eigh(S)
    return (vecs / np.sqrt(vals)[None, :]) @ vecs.conj().T


def random_povm(d, n_outcomes, rng) -> POVM:
    """``S^{-1/2} A_w S^{-1/2}`` for random positive ``A_w`` with sum ``S``."""
    A = []
    for _ in range(n_outcomes):
        G = complex_normal(rng, (d, d))
        A.append(G @ G.conj().T)
    W = _inv_sqrt(sum(A))
    effects = [W @ a @ W for a in A]
    effects = [(E + E.conj().T) / 2 for E in effects]
    # absorb the rounding residue into the last effect so the sum is I to ~1e-15
    effects[-1] = effects[-1] + (np.eye(d) - sum(effects))
    return POVM(AtomicSpace.range(n_outcomes), effects)


def random_projective_povm(d, rng, n_outcomes=None) -> POVM:
    """Orthogonal projections onto groups of columns of a Haar unitary."""
    U = random_unitary(d, rng)
    n = n_outcomes or d
    cuts = np.sort(rng.choice(np.arange(1, d), size=n - 1, replace=False)) if n > 1 else []
    groups = np.split(np.arange(d), cuts)
    effects = [U[:, g] @ U[:, g].conj().T for g in groups]
    return POVM(AtomicSpace.range(len(groups)), effects)


def random_instrument(d, n_atoms, rng, kraus_per_atom=2) -> Instrument:
    """Trace-preserving instrument cut from a random isometry."""
    k = n_atoms * kraus_per_atom
    Q, _ = np.linalg.qr(complex_normal(rng, (k * d, d)))
    blocks = [Q[i * d:(i + 1) * d] for i in range(k)]
    kraus = [blocks[a * kraus_per_atom:(a + 1) * kraus_per_atom] for a in range(n_atoms)]
    return Instrument(AtomicSpace.range(n_atoms), kraus, trace_preserving=True)
