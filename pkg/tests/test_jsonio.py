import json

import numpy as np
import pytest

from opmeasure import jsonio
from opmeasure.measurable import AtomicSpace, ComplexMeasure, MeasurableFunction
from opmeasure.normed import BoundPair, SpaceDescriptor
from opmeasure.operator import OperatorMeasure, spectral_measure_of
from opmeasure.quantum import Instrument
from opmeasure.sampling import random_density, random_instrument, random_normal_matrix, random_povm
from opmeasure.vector import VectorMeasure


def cycle(obj):
    return json.loads(jsonio.dumps(obj))


def test_complex_encoding():
    assert jsonio.c2j(1 - 2j) == [1.0, -2.0]
    assert jsonio.j2c(3) == 3
    assert jsonio.j2c([0.1, 0.2]) == complex(0.1, 0.2)
    with pytest.raises(ValueError):
        jsonio.j2c("x")


def test_floats_round_trip_bitwise(rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    back = jsonio.array_from_json(cycle(jsonio.array_to_json(a)), 2)
    assert np.array_equal(a, back)


def test_space_and_measure():
    S = AtomicSpace(("a", 2, (1, 2)), labels=(1, 2j, 3), kind="truncated-countable", tail_bound=0.5)
    mu = ComplexMeasure(S, [1, 2j, -3], 0.25)
    back = jsonio.measure_from_json(cycle(jsonio.measure_to_json(mu)))
    assert back.space == S
    assert np.array_equal(back.weights, mu.weights) and back.tail_tv_bound == 0.25


@pytest.mark.parametrize("f", [
    MeasurableFunction.poly([1, 2j], bound=4.0),
    MeasurableFunction.exp(0.5j),
    MeasurableFunction.constant(2 - 1j),
    MeasurableFunction.indicator([0, 2]),
    MeasurableFunction.tabulated([1, 2, 3], AtomicSpace.range(3)),
    MeasurableFunction.lookup([1, 2], [5, 6], 1e-6),
    MeasurableFunction.modulus(MeasurableFunction.poly([0, 1])) * 2 + MeasurableFunction.real_part(MeasurableFunction.exp(1j)),
])
def test_function_round_trip(f):
    S = AtomicSpace.from_labels([1, 2, 3]) if f.form != "lookup" else AtomicSpace.from_labels([2, 1])
    back = jsonio.function_from_json(cycle(jsonio.function_to_json(f)))
    np.testing.assert_array_equal(back.values(S), f.values(S))
    assert back.global_bound == f.global_bound


def test_descriptor_bound_vector_operator(rng):
    s = SpaceDescriptor(2, "linf")
    assert jsonio.descriptor_from_json(cycle(jsonio.descriptor_to_json(s))) == s
    b = BoundPair(1.0, 2.5, "x")
    assert jsonio.bound_from_json(cycle(jsonio.bound_to_json(b))) == b
    mu = VectorMeasure(s, AtomicSpace.range(3), rng.standard_normal((3, 2)) + 1j, 0.0)
    back = jsonio.vector_measure_from_json(cycle(jsonio.vector_measure_to_json(mu)))
    assert np.array_equal(back.atom_vectors, mu.atom_vectors) and back.space == s
    om = OperatorMeasure(2, AtomicSpace.range(2), [np.eye(2) / 2] * 2, normalized=True)
    back = jsonio.operator_measure_from_json(cycle(jsonio.operator_measure_to_json(om)))
    assert np.array_equal(back.atom_operators, om.atom_operators) and back.normalized


def test_spectral_round_trip(rng):
    T, _, _ = random_normal_matrix(4, rng, degenerate=True)
    E = spectral_measure_of(T)
    back = jsonio.spectral_from_json(cycle(jsonio.spectral_to_json(E)))
    assert np.array_equal(back.eigenvalues, E.eigenvalues)
    assert np.array_equal(back.projections, E.projections)


def test_quantum_round_trips(rng):
    rho = random_density(3, rng)
    assert np.array_equal(jsonio.state_from_json(cycle(jsonio.state_to_json(rho))).matrix, rho.matrix)
    P = random_povm(3, 2, rng)
    assert np.array_equal(jsonio.povm_from_json(cycle(jsonio.povm_to_json(P))).effects, P.effects)
    inst = random_instrument(2, 3, rng)
    back = jsonio.instrument_from_json(cycle(jsonio.instrument_to_json(inst)))
    assert np.array_equal(back.superoperators, inst.superoperators)
    raw = Instrument.from_superoperators(inst.measurable, inst.superoperators, True)
    back = jsonio.instrument_from_json(cycle(jsonio.instrument_to_json(raw)))
    assert np.array_equal(back.superoperators, raw.superoperators)


def test_matrix_reader_forms():
    assert np.array_equal(jsonio.matrix_from_json([[1, 0], [0, [0, 1]]]), np.diag([1, 1j]))
    assert np.array_equal(jsonio.matrix_from_json({"matrix": [[2]]}), [[2]])
    with pytest.raises(ValueError):
        jsonio.matrix_from_json([1, 2])
