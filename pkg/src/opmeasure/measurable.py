"""Atomic measurable spaces, complex measures and scalar integration.

Every measurable space here is atomic: the sigma-algebra is the power set of
a finite list of atoms.  Countable spaces are handled by truncation, with the
caller certifying how much mass lives beyond the listed atoms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import InvalidMeasureError, SpaceMismatchError, UnboundedFunctionError

FINITE = "finite"
TRUNCATED = "truncated-countable"


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AtomicSpace:
    """Finite list of atoms, optionally labelled by complex points.

    ``tail_bound`` is only meaningful for truncated-countable spaces and must
    be zero for finite ones.
    """

    atoms: tuple
    labels: tuple | None = None
    kind: str = FINITE
    tail_bound: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(set(self.atoms)) != len(self.atoms):
            raise InvalidMeasureError("atom identifiers must be unique")
        if self.labels is not None:
            labels = tuple(complex(z) for z in self.labels)
            if len(labels) != len(self.atoms):
                raise InvalidMeasureError("one label per atom is required")
            object.__setattr__(self, "labels", labels)
        if self.kind not in (FINITE, TRUNCATED):
            raise InvalidMeasureError(f"unknown space kind {self.kind!r}")
        if self.tail_bound < 0:
            raise InvalidMeasureError("tail_bound must be non-negative")
        if self.kind == FINITE and self.tail_bound != 0:
            raise InvalidMeasureError("finite spaces carry no tail bound")
        object.__setattr__(self, "tail_bound", float(self.tail_bound))

    @classmethod
    def range(cls, n, labels=None, kind=FINITE, tail_bound=0.0):
        """Space with atoms ``0, 1, ..., n-1``."""
        return cls(tuple(range(n)), labels, kind, tail_bound)

    @classmethod
    def from_labels(cls, labels, kind=FINITE, tail_bound=0.0):
        labels = list(labels)
        return cls(tuple(range(len(labels))), tuple(labels), kind, tail_bound)

    def __len__(self):
        return len(self.atoms)

    @property
    def truncated(self):
        return self.kind == TRUNCATED

    @property
    def label_array(self):
        if self.labels is None:
            raise ValueError("space has no atom labels")
        return np.array(self.labels, dtype=complex)

    def index(self, atom) -> int:
        try:
            return self._index[atom]
        except KeyError:
            raise SpaceMismatchError(f"{atom!r} is not an atom of this space") from None

    @property
    def _index(self):
        # cached lazily; the dataclass is frozen so bypass __setattr__
        idx = self.__dict__.get("_index_cache")
        if idx is None:
            idx = {a: i for i, a in enumerate(self.atoms)}
            object.__setattr__(self, "_index_cache", idx)
        return idx

    def subset(self, atoms: Iterable[Hashable]) -> "MeasurableSet":
        return MeasurableSet(self, frozenset(atoms))

    def whole(self) -> "MeasurableSet":
        return MeasurableSet(self, frozenset(self.atoms))

    def empty(self) -> "MeasurableSet":
        return MeasurableSet(self, frozenset())


@dataclass(frozen=True)
class MeasurableSet:
    space: AtomicSpace
    members: frozenset

    def __post_init__(self):
        members = frozenset(self.members)
        object.__setattr__(self, "members", members)
        for a in members:
            self.space.index(a)

    def mask(self) -> np.ndarray:
        m = np.zeros(len(self.space), dtype=bool)
        for a in self.members:
            m[self.space.index(a)] = True
        return m

    def __len__(self):
        return len(self.members)

    def __or__(self, other):
        _check_same(self.space, other.space)
        return MeasurableSet(self.space, self.members | other.members)

    def __and__(self, other):
        _check_same(self.space, other.space)
        return MeasurableSet(self.space, self.members & other.members)

    def __sub__(self, other):
        _check_same(self.space, other.space)
        return MeasurableSet(self.space, self.members - other.members)


def _check_same(a: AtomicSpace, b: AtomicSpace):
    if a is not b and a != b:
        raise SpaceMismatchError("objects live on different atomic spaces")


@dataclass(frozen=True, eq=False)
class ComplexMeasure:
    """Atomic complex measure: one complex weight per atom.

    ``tail_tv_bound`` certifies the total variation carried by atoms that
    were truncated away.
    """

    space: AtomicSpace
    weights: np.ndarray
    tail_tv_bound: float = 0.0

    def __post_init__(self):
        w = _frozen(self.weights).reshape(-1)
        if w.shape[0] != len(self.space):
            raise InvalidMeasureError(
                f"expected {len(self.space)} weights, got {w.shape[0]}"
            )
        if not np.all(np.isfinite(w)):
            raise InvalidMeasureError("weights must be finite")
        if self.tail_tv_bound < 0:
            raise InvalidMeasureError("tail_tv_bound must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "tail_tv_bound", float(self.tail_tv_bound))

    @classmethod
    def zero(cls, space):
        return cls(space, np.zeros(len(space), dtype=complex))

    def __add__(self, other):
        _check_same(self.space, other.space)
        return ComplexMeasure(
            self.space,
            self.weights + other.weights,
            self.tail_tv_bound + other.tail_tv_bound,
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, c):
        return ComplexMeasure(self.space, c * self.weights, abs(c) * self.tail_tv_bound)

    def is_probability(self, tol=1e-12) -> bool:
        w = self.weights
        return bool(
            np.all(np.abs(w.imag) <= tol)
            and np.all(w.real >= -tol)
            and abs(w.sum() - 1) <= tol * max(1, len(w))
        )


def measure_of(mu: ComplexMeasure, E: MeasurableSet) -> complex:
    _check_same(mu.space, E.space)
    return complex(mu.weights[E.mask()].sum())


def total_variation(mu: ComplexMeasure, E: MeasurableSet | None = None) -> float:
    """Total variation ``|mu|(E)``; exact because singletons attain the sup."""
    if E is None:
        return float(np.abs(mu.weights).sum())
    _check_same(mu.space, E.space)
    return float(np.abs(mu.weights[E.mask()]).sum())


def total_variation_bound(mu: ComplexMeasure) -> float:
    """Certified upper bound on ``|mu|_TV`` including truncated atoms."""
    return total_variation(mu) + mu.tail_tv_bound


def setwise_defect(mu1: ComplexMeasure, mu2: ComplexMeasure) -> float:
    """Total variation of ``mu1 - mu2``.

    Dominates ``sup_E |mu1(E) - mu2(E)|`` and vanishes iff the measures agree
    on every listed atom.
    """
    _check_same(mu1.space, mu2.space)
    return float(np.abs(mu1.weights - mu2.weights).sum())


class MeasurableFunction:
    """Complex function on atoms, tabulated or given by a named form.

    Named forms are evaluated lazily at the atom labels of whatever space
    they are integrated over, so the same ``poly`` or ``exp`` object can be
    reused across spaces.  Use the classmethod constructors rather than
    ``__init__``.
    """

    __slots__ = ("form", "params", "_bound")

    def __init__(self, form, params, bound=None):
        self.form = form
        self.params = params
        self._bound = None if bound is None else float(bound)

    def __repr__(self):
        return f"MeasurableFunction({self.form!r})"

    # constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, c):
        return cls("const", complex(c), abs(complex(c)))

    @classmethod
    def indicator(cls, E: MeasurableSet | Iterable):
        atoms = E.members if isinstance(E, MeasurableSet) else frozenset(E)
        return cls("indicator", frozenset(atoms), 1.0)

    @classmethod
    def poly(cls, coeffs: Sequence, bound=None):
        """Polynomial ``sum_k coeffs[k] * label**k``."""
        coeffs = tuple(complex(c) for c in coeffs)
        if bound is None and len(coeffs) <= 1:
            bound = abs(coeffs[0]) if coeffs else 0.0
        return cls("poly", coeffs, bound)

    @classmethod
    def exp(cls, a, bound=None):
        """``exp(a * label)``."""
        a = complex(a)
        if bound is None and a == 0:
            bound = 1.0
        return cls("exp", a, bound)

    @classmethod
    def modulus(cls, f: "MeasurableFunction"):
        return cls("abs", f, f._bound)

    @classmethod
    def real_part(cls, f: "MeasurableFunction"):
        return cls("real", f, f._bound)

    @classmethod
    def tabulated(cls, values, atoms=None):
        """Values keyed by atom.

        ``values`` is either a mapping ``atom -> value`` or a sequence aligned
        with ``atoms`` (an :class:`AtomicSpace` or a sequence of atom ids).
        The recorded sup-norm is over the listed values.
        """
        if isinstance(values, dict):
            keys = tuple(values)
            vals = np.array([complex(values[k]) for k in keys], dtype=complex)
        else:
            if atoms is None:
                raise ValueError("tabulated values need the atoms they refer to")
            keys = tuple(atoms.atoms if isinstance(atoms, AtomicSpace) else atoms)
            vals = np.array(values, dtype=complex).reshape(-1)
            if len(keys) != vals.shape[0]:
                raise ValueError("one tabulated value per atom is required")
        vals.setflags(write=False)
        bound = float(np.abs(vals).max()) if vals.size else 0.0
        return cls("tabulated", (keys, vals), bound)

    @classmethod
    def lookup(cls, labels, values, tol=1e-9):
        """Values keyed by atom label, matched within ``tol``."""
        labels = np.array(labels, dtype=complex).reshape(-1)
        values = np.array(values, dtype=complex).reshape(-1)
        if labels.shape != values.shape:
            raise ValueError("labels and values must have equal length")
        labels.setflags(write=False)
        values.setflags(write=False)
        bound = float(np.abs(values).max()) if values.size else 0.0
        return cls("lookup", (labels, values, float(tol)), bound)

    @classmethod
    def from_callable(cls, fn: Callable, bound=None):
        """Wrap a vectorised callable of the atom labels."""
        return cls("callable", fn, bound)

    # algebra --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, MeasurableFunction):
            other = MeasurableFunction.constant(other)
        b = None if self._bound is None or other._bound is None else self._bound + other._bound
        return MeasurableFunction("sum", (self, other), b)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, MeasurableFunction):
            other = MeasurableFunction.constant(other)
        b = None if self._bound is None or other._bound is None else self._bound * other._bound
        return MeasurableFunction("product", (self, other), b)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, MeasurableFunction) else -complex(other))

    # evaluation -----------------------------------------------------------

    @property
    def global_bound(self) -> float | None:
        """Certified sup over the whole space, or ``None`` if unknown."""
        return self._bound

    def values(self, space: AtomicSpace) -> np.ndarray:
        form, p = self.form, self.params
        n = len(space)
        if form == "const":
            return np.full(n, p, dtype=complex)
        if form == "indicator":
            return np.array([1.0 if a in p else 0.0 for a in space.atoms], dtype=complex)
        if form == "tabulated":
            keys, vals = p
            if keys == space.atoms:
                return vals.copy()
            table = dict(zip(keys, vals))
            try:
                return np.array([table[a] for a in space.atoms], dtype=complex)
            except KeyError as exc:
                raise SpaceMismatchError(f"no tabulated value for atom {exc.args[0]!r}") from None
        if form == "abs":
            return np.abs(p.values(space)).astype(complex)
        if form == "real":
            return p.values(space).real.astype(complex)
        if form == "sum":
            return p[0].values(space) + p[1].values(space)
        if form == "product":
            return p[0].values(space) * p[1].values(space)
        z = space.label_array
        if form == "poly":
            out = np.zeros(n, dtype=complex)
            for c in reversed(p):
                out = out * z + c
            return out
        if form == "exp":
            return np.exp(p * z)
        if form == "lookup":
            labels, vals, tol = p
            if n == 0:
                return np.zeros(0, dtype=complex)
            if labels.size == 0:
                raise ValueError("lookup table is empty")
            dist = np.abs(z[:, None] - labels[None, :])
            j = dist.argmin(axis=1)
            if np.any(dist[np.arange(n), j] > tol):
                raise ValueError("atom label missing from lookup table")
            return vals[j]
        if form == "callable":
            return np.asarray(p(z), dtype=complex).reshape(n)
        raise ValueError(f"unknown function form {form!r}")

    def sup_norm(self, space: AtomicSpace) -> float:
        """Sup of ``|f|`` over the listed atoms of ``space``."""
        v = self.values(space)
        return float(np.abs(v).max()) if v.size else 0.0

    def quantized(self, space: AtomicSpace, h: float) -> "MeasurableFunction":
        """Simple function rounding real and imaginary parts to the grid ``h*Z``.

        Pointwise error is at most ``h/sqrt(2)``.
        """
        v = self.values(space)
        q = h * np.round(v.real / h) + 1j * h * np.round(v.imag / h)
        return MeasurableFunction.tabulated(q, space)


def certified_sup(f: MeasurableFunction, space: AtomicSpace, has_tail=None) -> float:
    """Sup-norm of ``f`` valid for controlling truncation errors on ``space``.

    Without a tail the listed atoms are all there is.  With one, named
    forms need a global bound; tabulated functions use their listed sup.
    """
    if has_tail is None:
        has_tail = space.truncated
    if not has_tail:
        return f.sup_norm(space)
    b = f.global_bound
    if b is None:
        if f.form == "tabulated":
            return f.sup_norm(space)
        raise UnboundedFunctionError(
            f"form {f.form!r} has no global bound on a truncated space; "
            "tabulate it or pass an explicit bound"
        )
    return b


def integration_bound(f: MeasurableFunction, mu: ComplexMeasure) -> float:
    return certified_sup(f, mu.space, mu.space.truncated or mu.tail_tv_bound > 0)


def integrate_scalar(f: MeasurableFunction, mu: ComplexMeasure) -> complex:
    """``sum_w f(w) mu({w})`` over the listed atoms.

    On truncated spaces the true integral is within
    :func:`integration_error` of the returned value.
    """
    integration_bound(f, mu)
    return complex(np.dot(f.values(mu.space), mu.weights))


def integration_error(f: MeasurableFunction, mu: ComplexMeasure) -> float:
    return integration_bound(f, mu) * mu.tail_tv_bound
