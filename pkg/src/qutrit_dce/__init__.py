"""Dynamical Casimir photon generation by a modulated cyclic qutrit in a cavity."""
from .dynamics import (
    DissipationRates,
    EffectiveState,
    TimeGrid,
    TimeSeries,
    evolve_effective,
    evolve_lindblad,
    evolve_schrodinger,
    pure_to_density,
    time_reversed_drive,
)
from .errors import (
    AmbiguousBranch,
    DCEError,
    DimensionMismatch,
    NearSingularDenominator,
    NormDrift,
    NumericalFailure,
    PositivityLoss,
    TraceDrift,
    ValidationError,
)
from .model import Detunings, Drive, HilbertSpace, ModelParams, bare_hamiltonian, detunings, hamiltonian_at
from .observables import mandel_q, photon_distribution, photon_number, populations
from .perturbation import (
    effective_spectrum,
    lambda_fourth_order,
    rate_1photon,
    rate_3photon,
    resonance_mismatch,
    zeta_state_pert,
)
from .resonance import ScanResult, predict_eta, scan_eta
from .spectrum import DressedSpectrum, ZetaBranch, diagonalize, numeric_rate, transition_frequency, zeta_branch

__all__ = [
    "AmbiguousBranch",
    "bare_hamiltonian",
    "DCEError",
    "Detunings",
    "detunings",
    "diagonalize",
    "DimensionMismatch",
    "DissipationRates",
    "DressedSpectrum",
    "Drive",
    "effective_spectrum",
    "EffectiveState",
    "evolve_effective",
    "evolve_lindblad",
    "evolve_schrodinger",
    "hamiltonian_at",
    "HilbertSpace",
    "lambda_fourth_order",
    "mandel_q",
    "ModelParams",
    "NearSingularDenominator",
    "NormDrift",
    "numeric_rate",
    "NumericalFailure",
    "photon_distribution",
    "photon_number",
    "populations",
    "PositivityLoss",
    "predict_eta",
    "pure_to_density",
    "rate_1photon",
    "rate_3photon",
    "resonance_mismatch",
    "scan_eta",
    "ScanResult",
    "time_reversed_drive",
    "TimeGrid",
    "TimeSeries",
    "TraceDrift",
    "transition_frequency",
    "ValidationError",
    "zeta_branch",
    "zeta_state_pert",
    "ZetaBranch",
]

__version__ = "0.1.0"
