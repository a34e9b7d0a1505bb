"""Simulator for the one-step multi-controlled-NOT gate on driven Rydberg atoms.

The package builds the driven-register Hamiltonians and spontaneous-emission
dissipators, propagates exact and effective dynamics, extracts the induced
quantum channel on the computational subspace, and evaluates average gate
fidelity across parameter sweeps.  Frequencies are angular (rad/us), times
are in us.
"""

from .spaces import (
    HilbertSpace,
    CompSubspaceMap,
    PauliString,
    build_space,
    transition_op,
    computational_subspace,
    embed_comp,
    project_comp,
    pauli_basis,
)
from .model import (
    DriveParams,
    InteractionGraph,
    Geometry,
    DecayModel,
    SystemModel,
    HamiltonianTerms,
    u_from_distance,
    interactions_from_geometry,
    rri_diagonal,
    full_hamiltonian_terms,
    hamiltonian_full,
    rotated_hamiltonian_terms,
    hamiltonian_rotated,
    interaction_frame_phases,
    block_hamiltonian_terms,
    hamiltonian_block,
    hamiltonian_effective,
    jump_operators,
    control_drive_phase,
    drive_phase_compensation,
    ideal_gate,
)
from .effective import (
    DressedSpectrum,
    dressed_states,
    EffectiveBlock,
    effective_hamiltonian,
    block1_partition,
)
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    EvolutionResult,
    ProcessMap,
    gate_time,
    default_step,
    resolve_step,
    evolve_ket,
    evolve_density,
    extract_channel,
    unitary_channel_samples,
)
from .metrics import (
    FidelityResult,
    average_fidelity,
    population,
    FourQubitProbe,
    four_qubit_probe,
    depolarized,
)
from .scenarios import (
    ConfigError,
    ScenarioConfig,
    SweepResult,
    run_scenario,
    preset,
    preset_names,
    preset_description,
    emit,
    load_result,
    fidelity_time_series,
    population_time_series,
)

__version__ = "0.1.0"
