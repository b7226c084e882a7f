"""Simulator for a Lorentz-invariant, time-asymmetric Bohm-type law of motion.

Multi-time Dirac wave functions for non-interacting particles drive world lines
through the future light-cone law; the package also provides the equal-time
reference law and experiments probing covariance, the nonrelativistic limit and
nonlocality.
"""
from .errors import (
    DegenerateConfigurationError,
    DomainError,
    LightconeError,
    ModeInconsistencyError,
    NodeError,
    NumericalFailure,
    NumericalIntegrityError,
    RetardationError,
    ScenarioParseError,
    ScenarioSchemaError,
    StructuralError,
)
from .lightcone import (
    FinalData,
    WorldLine,
    future_crossing,
    hyperplane_velocity,
    integrate_backward,
    integrate_hyperplane,
    lightcone_velocity,
    worldline_at,
)
from .multitime import (
    ExternalField,
    GridFactor,
    MultiTimeWavefunction,
    PlaneWaveFactor,
    consistency_residual,
    grid_evolve,
    spatial_norm,
)
from .scenario import Scenario, boost_scenario, build_wavefunction, load_scenario, restrict_to_particle
from .spinor_algebra import (
    Mode,
    contract_current,
    current_tensor,
    dirac_adjoint,
    gamma_matrices,
    minkowski_dot,
)

__version__ = "0.1.0"
