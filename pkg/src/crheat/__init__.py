"""crheat: damped qubit-boson models and counter-rotating heating.

A small simulator for a two-level system coupled to a truncated boson
mode under local damping.  It exists to make one family of effects easy
to compute honestly: with counter-rotating coupling terms the ground
state is entangled, the damped system emits quanta without any external
drive, and driven sideband cooling acquires a finite phonon floor.

Layers, bottom up:

* :mod:`crheat.hilbert` - sparse operators and validated states,
* :mod:`crheat.models` - Hamiltonian and channel builders,
* :mod:`crheat.spectra` - ground-state energetics and entanglement,
* :mod:`crheat.lindblad` - master-equation integration and steady states,
* :mod:`crheat.trajectories` - deterministic quantum-jump ensembles,
* :mod:`crheat.observables` - emission readouts shared by both backends,
* :mod:`crheat.cli` - the ``crheat`` scenario runner.
"""

__version__ = "0.1.0"

from .hilbert import (
    DensityOp,
    Ket,
    LinOp,
    SpaceSpec,
    basis_ket,
    dag,
    destroy,
    expect,
    identity,
    kron,
    normalize,
    partial_trace,
    sigma_minus,
)
from .models import (
    DissipationSpec,
    JumpChannel,
    RabiParams,
    SidebandParams,
    build_rabi,
    build_sideband,
    jump_channels,
)
from .spectra import (
    EigenPair,
    decorrelation_energy,
    entanglement_entropy,
    ground_state,
    product_ground,
)
from .lindblad import (
    EvolutionResult,
    LiouvillianMatrix,
    build_liouvillian,
    evolve,
    lindblad_rhs,
    steady_state,
)
from .trajectories import (
    EnsembleResult,
    JumpEvent,
    TrajectoryRecord,
    derive_seed,
    ensemble_mean,
    mcwf_step,
    run_trajectory,
)
from .observables import (
    EmissionReport,
    cumulative_emission,
    emission_rates,
    excited_population,
    mean_phonon,
)

__all__ = [
    "__version__",
    # hilbert
    "SpaceSpec", "LinOp", "Ket", "DensityOp", "identity", "destroy",
    "sigma_minus", "kron", "dag", "expect", "partial_trace", "normalize",
    "basis_ket",
    # models
    "RabiParams", "SidebandParams", "DissipationSpec", "JumpChannel",
    "build_rabi", "build_sideband", "jump_channels",
    # spectra
    "EigenPair", "ground_state", "product_ground", "decorrelation_energy",
    "entanglement_entropy",
    # lindblad
    "EvolutionResult", "LiouvillianMatrix", "lindblad_rhs", "evolve",
    "build_liouvillian", "steady_state",
    # trajectories
    "JumpEvent", "TrajectoryRecord", "EnsembleResult", "derive_seed",
    "mcwf_step", "run_trajectory", "ensemble_mean",
    # observables
    "EmissionReport", "mean_phonon", "excited_population", "emission_rates",
    "cumulative_emission",
]
