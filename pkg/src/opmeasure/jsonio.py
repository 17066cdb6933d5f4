"""JSON encoding of every value type.

Complex numbers are ``[re, im]`` pairs, vectors are lists of pairs and
matrices are row-major lists of such rows.  Readers also accept bare real
numbers in place of pairs.  Floats go through ``repr``, so values read back
bit-for-bit.
"""

from __future__ import annotations

import json

import numpy as np

from .measurable import FINITE, AtomicSpace, ComplexMeasure, MeasurableFunction
from .normed import BoundPair, SpaceDescriptor
from .operator import OperatorMeasure, SpectralMeasure
from .quantum import POVM, DensityOperator, Instrument
from .vector import VectorMeasure


def c2j(z):
    z = complex(z)
    return [z.real, z.imag]


def j2c(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ValueError(f"not a complex number: {v!r}")


def array_to_json(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return c2j(a)
    return [array_to_json(x) for x in a]


def array_from_json(v, ndim) -> np.ndarray:
    """Read a nested list of complex pairs with ``ndim`` array dimensions."""
    def conv(x, depth):
        if depth == 0:
            return j2c(x)
        if not isinstance(x, list):
            raise ValueError("malformed array")
        return [conv(y, depth - 1) for y in x]

    out = np.array(conv(v, ndim), dtype=complex)
    if out.ndim != ndim and not (out.size == 0):
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {out.shape}")
    return out


def matrix_from_json(v) -> np.ndarray:
    if isinstance(v, dict):
        v = v.get("matrix", v.get("operator"))
    M = array_from_json(v, 2)
    if M.ndim != 2:
        raise ValueError("matrix must be a list of rows")
    return M


# measurable core -----------------------------------------------------------


def space_to_json(S: AtomicSpace) -> dict:
    out = {"atoms": list(S.atoms), "kind": S.kind, "tail_bound": S.tail_bound}
    if S.labels is not None:
        out["labels"] = [c2j(z) for z in S.labels]
    return out


def _atom(a):
    if isinstance(a, list):  # JSON has no tuples
        return tuple(_atom(x) for x in a)
    return a


def space_from_json(d: dict) -> AtomicSpace:
    labels = d.get("labels")
    return AtomicSpace(
        tuple(_atom(a) for a in d["atoms"]),
        None if labels is None else tuple(j2c(z) for z in labels),
        d.get("kind", FINITE),
        float(d.get("tail_bound", 0.0)),
    )


def measure_to_json(mu: ComplexMeasure) -> dict:
    return {
        "space": space_to_json(mu.space),
        "weights": [c2j(w) for w in mu.weights],
        "tail_tv_bound": mu.tail_tv_bound,
    }


def measure_from_json(d: dict, space: AtomicSpace | None = None) -> ComplexMeasure:
    S = space_from_json(d["space"]) if "space" in d else space
    if S is None:
        raise ValueError("measure has no space")
    return ComplexMeasure(S, [j2c(w) for w in d["weights"]], float(d.get("tail_tv_bound", 0.0)))


def function_to_json(f: MeasurableFunction) -> dict:
    p = f.params
    if f.form == "tabulated":
        keys, vals = p
        return {"tabulated": [c2j(v) for v in vals], "atoms": list(keys)}
    if f.form == "const":
        return {"form": "const", "value": c2j(p)}
    if f.form == "indicator":
        return {"form": "indicator", "atoms": sorted(p, key=repr)}
    if f.form == "poly":
        out = {"form": "poly", "coeffs": [c2j(c) for c in p]}
    elif f.form == "exp":
        out = {"form": "exp", "a": c2j(p)}
    elif f.form in ("abs", "real"):
        return {"form": f.form, "of": function_to_json(p)}
    elif f.form in ("sum", "product"):
        return {"form": f.form, "terms": [function_to_json(t) for t in p]}
    elif f.form == "lookup":
        labels, vals, tol = p
        return {"form": "lookup", "labels": [c2j(z) for z in labels],
                "values": [c2j(v) for v in vals], "tol": tol}
    else:
        raise ValueError(f"form {f.form!r} cannot be serialised")
    if f.global_bound is not None:
        out["bound"] = f.global_bound
    return out


def function_from_json(d: dict) -> MeasurableFunction:
    if "tabulated" in d:
        vals = [j2c(v) for v in d["tabulated"]]
        atoms = d.get("atoms")
        if atoms is None:
            raise ValueError("tabulated function needs its atoms")
        return MeasurableFunction.tabulated(vals, [_atom(a) for a in atoms])
    form = d.get("form")
    if form == "const":
        return MeasurableFunction.constant(j2c(d["value"]))
    if form == "indicator":
        return MeasurableFunction.indicator(_atom(a) for a in d["atoms"])
    if form == "poly":
        return MeasurableFunction.poly([j2c(c) for c in d["coeffs"]], d.get("bound"))
    if form == "exp":
        return MeasurableFunction.exp(j2c(d["a"]), d.get("bound"))
    if form == "abs":
        return MeasurableFunction.modulus(function_from_json(d["of"]))
    if form == "real":
        return MeasurableFunction.real_part(function_from_json(d["of"]))
    if form == "sum":
        a, b = (function_from_json(t) for t in d["terms"])
        return a + b
    if form == "product":
        a, b = (function_from_json(t) for t in d["terms"])
        return a * b
    if form == "lookup":
        return MeasurableFunction.lookup(
            [j2c(z) for z in d["labels"]], [j2c(v) for v in d["values"]], d.get("tol", 1e-9)
        )
    raise ValueError(f"unknown function form {form!r}")


# normed spaces -----------------------------------------------------------


def descriptor_to_json(s: SpaceDescriptor) -> dict:
    return {"dim": s.dim, "norm": s.norm}


def descriptor_from_json(d: dict) -> SpaceDescriptor:
    return SpaceDescriptor(int(d["dim"]), d.get("norm", "l2"))


def bound_to_json(b: BoundPair) -> dict:
    return {"lower": b.lower, "upper": b.upper, "method": b.method}


def bound_from_json(d: dict) -> BoundPair:
    return BoundPair(float(d["lower"]), float(d["upper"]), d.get("method", ""))


# vector and operator measures ----------------------------------------------


def vector_measure_to_json(mu: VectorMeasure) -> dict:
    return {
        "space": descriptor_to_json(mu.space),
        "measurable": space_to_json(mu.measurable),
        "atom_vectors": array_to_json(mu.atom_vectors),
        "tail_norm_bound": mu.tail_norm_bound,
    }


def vector_measure_from_json(d: dict) -> VectorMeasure:
    S = space_from_json(d["measurable"])
    vecs = array_from_json(d["atom_vectors"], 2) if d["atom_vectors"] else np.zeros((0, 0))
    space = descriptor_from_json(d["space"])
    return VectorMeasure(space, S, vecs.reshape(len(S), space.dim), float(d.get("tail_norm_bound", 0.0)))


def operator_measure_to_json(mu: OperatorMeasure) -> dict:
    return {
        "dim": mu.dim,
        "measurable": space_to_json(mu.measurable),
        "atom_operators": array_to_json(mu.atom_operators),
        "normalized": mu.normalized,
        "tail_bound": mu.tail_bound,
    }


def operator_measure_from_json(d: dict) -> OperatorMeasure:
    S = space_from_json(d["measurable"])
    dim = int(d["dim"])
    ops = array_from_json(d["atom_operators"], 3) if d["atom_operators"] else np.zeros((0, dim, dim))
    return OperatorMeasure(dim, S, ops, bool(d.get("normalized", False)), float(d.get("tail_bound", 0.0)))


def spectral_to_json(E: SpectralMeasure) -> dict:
    return {
        "eigenvalues": [c2j(z) for z in E.eigenvalues],
        "projections": array_to_json(E.projections),
    }


def spectral_from_json(d: dict) -> SpectralMeasure:
    return SpectralMeasure([j2c(z) for z in d["eigenvalues"]], array_from_json(d["projections"], 3))


# quantum ---------------------------------------------------------------------


def state_to_json(rho: DensityOperator) -> dict:
    return {"matrix": array_to_json(rho.matrix), "trace": rho.trace, "normalized": rho.normalized}


def state_from_json(d) -> DensityOperator:
    if isinstance(d, dict):
        return DensityOperator(matrix_from_json(d["matrix"]), d.get("normalized"))
    return DensityOperator(matrix_from_json(d))


def _atoms_space(d):
    if "measurable" in d:
        return space_from_json(d["measurable"])
    return AtomicSpace(tuple(_atom(a) for a in d["atoms"]))


def povm_to_json(P: POVM) -> dict:
    return {"atoms": list(P.measurable.atoms), "effects": array_to_json(P.effects)}


def povm_from_json(d: dict) -> POVM:
    return POVM(_atoms_space(d), array_from_json(d["effects"], 3))


def instrument_to_json(E: Instrument) -> dict:
    out = {"atoms": list(E.measurable.atoms), "trace_preserving": E.trace_preserving}
    if E.kraus is not None:
        out["kraus"] = [[array_to_json(M) for M in ops] for ops in E.kraus]
    else:
        out["superoperators"] = array_to_json(E.superoperators)
    return out


def instrument_from_json(d: dict) -> Instrument:
    S = _atoms_space(d)
    tp = bool(d.get("trace_preserving", False))
    if "kraus" in d:
        kraus = [[matrix_from_json(M) for M in ops] for ops in d["kraus"]]
        return Instrument(S, kraus, tp)
    return Instrument.from_superoperators(S, array_from_json(d["superoperators"], 3), tp)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)
