"""Simulation and analysis toolkit for molecular spin qudits.

Builds spin Hamiltonians for single Gd(III)-like ions and exchange-coupled
dimers, computes thermodynamic observables and powder cw-EPR spectra with
parameter strain, maps transition frequencies and Rabi rates, decides
operational universality of the driven level structure, and fits pulsed-EPR
echo decays and nutation traces.
"""

__version__ = "0.1.0"

from .constants import K_TO_GHZ, MUB_GHZ_PER_T, ghz_to_kelvin, kelvin_to_ghz
from .control_map import RabiMap, rabi_map, transition_frequencies
from .ensembles import EnsembleSpec, powder_directions
from .epr_sim import (
    Resonance,
    SpectrometerSpec,
    Spectrum,
    derivative_spectrum,
    powder_spectrum,
    resonance_search,
)
from .errors import (
    ConfigError,
    DataError,
    DataRangeError,
    DomainError,
    FitError,
    InvalidSpinError,
    SpinQuditError,
    ValidationError,
)
from .observables import (
    BaselineTable,
    ThermalGrid,
    add_lattice_baseline,
    chi_t_curve,
    free_energy,
    heat_capacity,
    magnetization,
    populations,
)
from .pulse_fit import (
    DecayFit,
    DecayTrace,
    NutationResult,
    decay_model,
    fit_decay,
    field_sweep_summary,
    larmor,
    nutation_fft,
)
from .spin_core import (
    DimerParams,
    EigenSystem,
    FieldSpec,
    SingleIonParams,
    SpinOperatorSet,
    dimer_hamiltonian,
    eigensolve,
    single_ion_hamiltonian,
    spin_operators,
)
from .universality import (
    EdgeSet,
    ReachabilityResult,
    allowed_edges,
    graph_closure,
    lie_algebra_rank,
)
