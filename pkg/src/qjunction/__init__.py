"""Steady-state heat transport through a single qubit between two bosonic baths.

The structured baths are handled at arbitrary coupling strength by
extracting one collective mode from each into the system (Markovian
embedding); the residual Ohmic baths then enter through a nonsecular
Redfield generator whose stationary state yields the heat currents. A
dressed two-level description with closed-form currents is included for
cross-checking the two published coupling-operator families.
"""

from .linalg import (
    EigenSystem,
    HermiticityError,
    SingularSystemError,
    TruncationError,
    herm_eig,
    hermiticity_defect,
    kron,
    ladder,
    pauli,
    solve_linear,
    unitary_exp,
)
from .model import BathSpec, JunctionSpec, standard_junction
from .spectral import (
    QuadratureError,
    SpectralDensity,
    bose,
    brownian_j,
    gamma_rc,
    ohmic_j_rc,
    rate_function,
    rc_parameters_from_spectrum,
)
from .embedding import (
    RCModel,
    build_rc_model,
    coupling_operator,
    polaron_generator,
    polaron_spectrum,
    polaron_unitary,
)
from .redfield import (
    DissipatorSpec,
    Liouvillian,
    NessResult,
    NonuniqueSteadyStateError,
    StiffnessError,
    assemble_liouvillian,
    assemble_rc_junction,
    filtered_operator,
    heat_current,
    junction_current,
    ness_solve,
    propagate,
    rectification,
)
from .effective import (
    EffectiveJunction,
    UnsupportedAsymmetryError,
    UnsupportedFamilyError,
    analytic_current_commuting,
    analytic_current_shifted,
    build_effective_junction,
    classify_family,
    dawson,
    dressing_commuting,
    dressing_shifted,
    effective_current_numeric,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "DissipatorSpec",
    "EffectiveJunction",
    "EigenSystem",
    "HermiticityError",
    "JunctionSpec",
    "Liouvillian",
    "NessResult",
    "NonuniqueSteadyStateError",
    "QuadratureError",
    "RCModel",
    "SingularSystemError",
    "SpectralDensity",
    "StiffnessError",
    "TruncationError",
    "UnsupportedAsymmetryError",
    "UnsupportedFamilyError",
    "analytic_current_commuting",
    "analytic_current_shifted",
    "assemble_liouvillian",
    "assemble_rc_junction",
    "bose",
    "brownian_j",
    "build_effective_junction",
    "build_rc_model",
    "classify_family",
    "coupling_operator",
    "dawson",
    "dressing_commuting",
    "dressing_shifted",
    "effective_current_numeric",
    "filtered_operator",
    "gamma_rc",
    "heat_current",
    "herm_eig",
    "hermiticity_defect",
    "junction_current",
    "kron",
    "ladder",
    "ness_solve",
    "ohmic_j_rc",
    "pauli",
    "polaron_generator",
    "polaron_spectrum",
    "polaron_unitary",
    "propagate",
    "rate_function",
    "rc_parameters_from_spectrum",
    "rectification",
    "solve_linear",
    "standard_junction",
    "unitary_exp",
]
