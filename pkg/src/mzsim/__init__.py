"""Two-photon interference on an integrated Mach-Zehnder circuit.

Fock-state evolution through coupler networks, partial-distinguishability
coincidence curves, synthetic Poisson counting runs with blocked-input
background subtraction, and weighted dip/fringe fits that recover the
visibilities.
"""

from .circuit import (
    CircuitNetwork,
    Coupler,
    PhaseShifter,
    ThermoOpticCalibration,
    compose,
    coupler_unitary,
    mzi_effective_reflectivity,
    mzi_network,
    phase_unitary,
    thermo_phase,
    voltage_for_phase,
)
from .config import ScenarioConfig, load_scenario
from .errors import (
    ConfigError,
    CoverageError,
    DegenerateDataError,
    DimensionError,
    FitError,
    PhotonConservationError,
    SimulationError,
    SizeLimitError,
    UnitarityError,
    UnsupportedModelError,
)
from .experiment import (
    BackgroundEstimate,
    CountRecord,
    HomScanConfig,
    NoonScanConfig,
    ScanResult,
    SinglesScanConfig,
    SourceSpec,
    measure_background,
    run_hom_scan,
    run_noon_scan,
    run_singles_scan,
    simulate_counts,
    subtract_background,
)
from .fitting import (
    FitResult,
    classical_fringe_calibrate,
    fit_fringe_free_frequency,
    fit_gaussian_dip,
    fit_two_phi_fringe,
    fitted_curve,
)
from .fock import (
    FockState,
    PhotonWavepacket,
    enumerate_fock_states,
    mode_overlap,
    output_distribution,
    permanent,
    transition_amplitude,
)
from .interference import (
    InterferenceCurve,
    TwoPhotonInput,
    coincidence_probability,
    hom_dip_curve,
    noon_fringe_curve,
    singles_fringe_curve,
    standard_wavepacket_pair,
)
from .scanio import read_scan_csv, write_scan_csv
from .selftest import run_selftest

__version__ = "0.1.0"

__all__ = [
    "BackgroundEstimate",
    "CircuitNetwork",
    "ConfigError",
    "CountRecord",
    "Coupler",
    "CoverageError",
    "DegenerateDataError",
    "DimensionError",
    "FitError",
    "FitResult",
    "FockState",
    "HomScanConfig",
    "InterferenceCurve",
    "NoonScanConfig",
    "PhaseShifter",
    "PhotonConservationError",
    "PhotonWavepacket",
    "ScanResult",
    "ScenarioConfig",
    "SimulationError",
    "SinglesScanConfig",
    "SizeLimitError",
    "SourceSpec",
    "ThermoOpticCalibration",
    "TwoPhotonInput",
    "UnitarityError",
    "UnsupportedModelError",
    "classical_fringe_calibrate",
    "coincidence_probability",
    "compose",
    "coupler_unitary",
    "enumerate_fock_states",
    "fit_fringe_free_frequency",
    "fit_gaussian_dip",
    "fit_two_phi_fringe",
    "fitted_curve",
    "hom_dip_curve",
    "load_scenario",
    "measure_background",
    "mode_overlap",
    "mzi_effective_reflectivity",
    "mzi_network",
    "noon_fringe_curve",
    "output_distribution",
    "permanent",
    "phase_unitary",
    "read_scan_csv",
    "run_hom_scan",
    "run_noon_scan",
    "run_selftest",
    "run_singles_scan",
    "simulate_counts",
    "singles_fringe_curve",
    "standard_wavepacket_pair",
    "subtract_background",
    "thermo_phase",
    "transition_amplitude",
    "voltage_for_phase",
    "write_scan_csv",
]
