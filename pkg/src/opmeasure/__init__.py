"""Measures valued in finite-dimensional normed spaces and operator algebras.

Atomic measurable spaces, Lewis integrals of scalar functions against vector
and operator measures, spectral measures of normal matrices with their
functional calculus, POVMs and instruments, and seeded verification suites.
"""

from .errors import (
    DimensionMismatchError,
    InvalidMeasureError,
    NonNormalError,
    SpaceMismatchError,
    UnboundedFunctionError,
)
from .measurable import (
    AtomicSpace,
    ComplexMeasure,
    MeasurableFunction,
    MeasurableSet,
    integrate_scalar,
    measure_of,
    setwise_defect,
    total_variation,
)
from .normed import BoundPair, Functional, SpaceDescriptor, pair
from .operator import (
    OperatorMeasure,
    OperatorProjectionFamily,
    SpectralMeasure,
    functional_calculus,
    integrate_operator,
    operator_projection,
    spectral_measure_of,
)
from .quantum import (
    POVM,
    DensityOperator,
    Instrument,
    instrument_apply,
    mixed_state_extension_check,
    povm_integrate,
    povm_probabilities,
    pure_state,
)
from .vector import (
    VectorMeasure,
    VectorProjectionFamily,
    family_of,
    integrate_vector,
    project,
    semivariation,
    weighted_measure,
)
from .verify import TrialSpec, VerificationReport, run_suite

__version__ = "0.1.0"
