"""dnlslab: inverse scattering, soliton reconstruction, and long-time
asymptotics for the derivative nonlinear Schroedinger equation."""

from .grids import (
    DiscretePair,
    FieldGrid,
    ScatteringData,
    deserialize,
    deserialize_field,
    deserialize_scattering,
    field_to_csv,
    gauge_forward,
    gauge_inverse,
    serialize,
    tail_integral,
)
from .evolution import evolve, theta
from .frames import ConeFrame, xi_eta
from .solitons import (
    NormalizationSet,
    RowSolution,
    blaschke,
    choose_normalization,
    modulate_coefficients,
    one_soliton_closed_form,
    q_sol,
    residue_coefficients,
    solve_reflectionless,
)

__version__ = "0.1.0"
