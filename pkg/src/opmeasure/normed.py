"""Finite-dimensional complex normed spaces and their duals.

Functionals act through the bilinear pairing ``L(x) = sum_k c_k x_k`` with no
conjugation.  The dual of l1 is linf and vice versa; l2 is self-dual.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

NORMS = ("l1", "l2", "linf")
_DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}
_ORD = {"l1": 1, "l2": 2, "linf": np.inf}

MAX_SUBSET_ATOMS = 20
DEFAULT_PHASES = 8
DEFAULT_ITERATIONS = 50


@dataclass(frozen=True)
class SpaceDescriptor:
    dim: int
    norm: str = "l2"

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dimension must be positive")
        if self.norm not in NORMS:
            raise ValueError(f"norm must be one of {NORMS}, got {self.norm!r}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def dual(self) -> "SpaceDescriptor":
        return SpaceDescriptor(self.dim, _DUAL[self.norm])

    def vector_norm(self, x) -> float:
        return _norm(np.asarray(x), self.norm)

    def dual_norm(self, c) -> float:
        if isinstance(c, Functional):
            c = c.coefficients
        return _norm(np.asarray(c), _DUAL[self.norm])

    def norming_functional(self, w) -> "Functional":
        """Unit functional attaining ``L(w) = ||w||``."""
        return Functional(_norming(np.asarray(w, dtype=complex), self.norm))


def _norm(x, norm, axis=None):
    if axis is None:
        return float(np.linalg.norm(x, ord=_ORD[norm]))
    return np.linalg.norm(x, ord=_ORD[norm], axis=axis)


def _unit_phase(z):
    a = np.abs(z)
    out = np.ones_like(z, dtype=complex)
    nz = a > 0
    out[nz] = z[nz] / a[nz]
    return out


def _norming(w, norm):
    if norm == "l2":
        n = np.linalg.norm(w)
        if n == 0:
            c = np.zeros_like(w)
            c[0] = 1.0
            return c
        return np.conj(w) / n
    if norm == "l1":
        return np.conj(_unit_phase(w))
    # linf: dual ball is l1, attained on a single coordinate
    k = int(np.argmax(np.abs(w)))
    c = np.zeros_like(w)
    c[k] = np.conj(_unit_phase(w[k : k + 1]))[0]
    return c


@dataclass(frozen=True, eq=False)
class Functional:
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def dim(self):
        return self.coefficients.shape[0]

    def __call__(self, x):
        return pair(self, x)

    def __add__(self, other):
        return Functional(self.coefficients + other.coefficients)

    def __rmul__(self, a):
        return Functional(a * self.coefficients)

    @classmethod
    def coordinate(cls, k, dim):
        c = np.zeros(dim, dtype=complex)
        c[k] = 1.0
        return cls(c)


@dataclass(frozen=True)
class BoundPair:
    """Certified bracket ``lower <= value <= upper``."""

    lower: float
    upper: float
    method: str = ""

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty bracket [{self.lower}, {self.upper}]")

    def contains(self, value, slack=0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    @property
    def width(self):
        return self.upper - self.lower


def pair(L, x) -> complex:
    c = L.coefficients if isinstance(L, Functional) else np.asarray(L)
    x = np.asarray(x)
    if c.shape[-1] != x.shape[-1]:
        raise DimensionMismatchError(
            f"functional of dimension {c.shape[-1]} paired with vector of dimension {x.shape[-1]}"
        )
    return complex(np.dot(c, x))


def _phase_grid(phases):
    return np.exp(2j * np.pi * np.arange(phases) / phases)


def dual_ball_extreme_points(space: SpaceDescriptor, phases=DEFAULT_PHASES, limit=4096):
    """Phase-quantised extreme points of the dual unit ball, as rows.

    Empty for l2 (smooth ball) and when the polydisc enumeration
    ``phases**dim`` exceeds ``limit``.
    """
    d = space.dim
    grid = _phase_grid(phases)
    if space.norm == "linf":
        # dual ball is the l1 ball: extreme points are phase * e_k
        pts = np.zeros((d * phases, d), dtype=complex)
        for k in range(d):
            pts[k * phases : (k + 1) * phases, k] = grid
        return pts
    if space.norm == "l1":
        if phases**d > limit:
            return np.zeros((0, d), dtype=complex)
        return np.array(list(itertools.product(grid, repeat=d)), dtype=complex)
    return np.zeros((0, d), dtype=complex)


def _random_dual_rows(space, count, rng):
    d = space.dim
    g = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    if space.norm == "l1":
        # half unimodular (extreme), half interior directions of the polydisc
        half = count // 2
        g[:half] = _unit_phase(g[:half])
    n = _norm(g, _DUAL[space.norm], axis=1)
    n[n == 0] = 1.0
    return g / n[:, None]


def dual_ball_matrix(space: SpaceDescriptor, count: int, seed: int, phases=DEFAULT_PHASES):
    """Rows are functionals in the dual unit ball; see :func:`dual_ball_sample`."""
    rng = np.random.default_rng(seed)
    ext = dual_ball_extreme_points(space, phases)
    rnd = _random_dual_rows(space, max(int(count), 0), rng)
    return np.vstack([ext, rnd])


def dual_ball_sample(space: SpaceDescriptor, count: int, seed: int, phases=DEFAULT_PHASES):
    """Functionals of dual norm at most one.

    Contains every phase-quantised extreme point of the dual ball when it is
    a polydisc or an l1 ball (subject to an enumeration cap), followed by
    ``count`` random directions.  Deterministic in ``seed``.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    return [Functional(row) for row in dual_ball_matrix(space, count, seed, phases)]


def _abs_sums(C, V):
    # C: (n, d) functionals, V: (m, d) vectors -> sum_w |L(v_w)| per functional
    return np.abs(C @ V.T).sum(axis=1)


def phase_ascent(V, space: SpaceDescriptor, c0, iterations=DEFAULT_ITERATIONS, rtol=1e-12):
    """Alternating phase-alignment ascent for ``sup_L sum_w |L(v_w)|``.

    Each step rotates every ``L(v_w)`` onto the positive real axis and then
    replaces ``L`` by the norming functional of ``sum_w e^{i t_w} v_w``.
    Returns the final coefficients and the (non-decreasing) value history.
    """
    V = np.asarray(V, dtype=complex)
    c = np.asarray(c0, dtype=complex)
    value = float(np.abs(V @ c).sum())
    history = [value]
    for _ in range(iterations):
        theta = np.conj(_unit_phase(V @ c))
        w = theta @ V
        c_new = _norming(w, space.norm)
        new = float(np.abs(V @ c_new).sum())
        if new < value:
            break
        improved = new - value
        c, value = c_new, new
        history.append(value)
        if improved <= rtol * max(value, 1e-300):
            break
    return c, history


def subset_sup_norm(V, space: SpaceDescriptor) -> float:
    """``max_F ||sum_{w in F} v_w||`` over all subsets, by enumeration."""
    V = np.asarray(V, dtype=complex)
    m = V.shape[0]
    if m > MAX_SUBSET_ATOMS:
        raise ValueError(f"subset enumeration refused for {m} > {MAX_SUBSET_ATOMS} vectors")
    if m == 0:
        return 0.0
    best = 0.0
    # chunk the 2^m masks to keep memory bounded
    chunk_bits = min(m, 14)
    low = ((np.arange(2**chunk_bits)[:, None] >> np.arange(chunk_bits)) & 1).astype(float)
    low_sums = low @ V[:chunk_bits]
    for high in range(2 ** (m - chunk_bits)):
        hbits = (high >> np.arange(m - chunk_bits)) & 1
        offset = hbits.astype(float) @ V[chunk_bits:]
        best = max(best, float(_norm(low_sums + offset, space.norm, axis=1).max()))
    return best


def abs_sum_dual_sup(V, space: SpaceDescriptor, budget=256, seed=0, phases=DEFAULT_PHASES,
                     iterations=DEFAULT_ITERATIONS, starts=8) -> BoundPair:
    """Bracket ``sup_{||L|| <= 1} sum_w |L(v_w)|`` for the rows ``v_w`` of ``V``.

    The lower end is the best value over a dual-ball sample of ``budget``
    random functionals (plus extreme points), refined by :func:`phase_ascent`
    from the ``starts`` best samples.  The upper end is the smallest of

    * termwise Hoelder, ``sum_w ||v_w||``;
    * ``4 max_F ||sum_F v_w||`` when there are at most 20 vectors;
    * ``sqrt(m) * sigma_max(V)`` for l2;
    * the exact value ``max_k sum_w |v_wk|`` for linf.
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim == 1:
        V = V.reshape(1, -1)
    m = V.shape[0]
    if m and V.shape[1] != space.dim:
        raise DimensionMismatchError(f"vectors of dimension {V.shape[1]} in a {space.dim}-space")
    if m == 0 or not np.any(V):
        return BoundPair(0.0, 0.0, "zero")

    candidates = {"holder": float(_norm(V, space.norm, axis=1).sum())}
    if m <= MAX_SUBSET_ATOMS:
        candidates["four-sup"] = 4.0 * subset_sup_norm(V, space)
    if space.norm == "l2":
        candidates["spectral"] = float(np.sqrt(m) * np.linalg.norm(V, 2))
    elif space.norm == "linf":
        candidates["exact-linf"] = float(np.abs(V).sum(axis=0).max())
    upper_method = min(candidates, key=candidates.get)
    upper = candidates[upper_method]

    C = dual_ball_matrix(space, budget, seed, phases)
    vals = _abs_sums(C, V)
    lower = float(vals.max())
    for i in np.argsort(-vals)[: max(1, starts)]:
        _, hist = phase_ascent(V, space, C[i], iterations)
        lower = max(lower, hist[-1])

    if lower > upper:
        # only rounding can push an attained value past a valid bound
        if lower - upper > 1e-12 * max(upper, 1.0):
            raise ArithmeticError(f"lower bound {lower} exceeds upper bound {upper}")
        lower = upper
    return BoundPair(lower, upper, f"ascent/{upper_method}")
