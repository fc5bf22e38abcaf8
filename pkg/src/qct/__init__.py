"""Exact simulation lab for QKD by charge teleportation on Ising models."""

from .linalg import (
    Spectrum,
    eigendecompose,
    expectation,
    kron,
    pauli_on_site,
    pauli_rotation,
)
from .models import (
    BASIS_X,
    BASIS_Y,
    CHARGE,
    ENERGY,
    ENERGY_XX,
    ENERGY_Z,
    NN,
    STAR,
    DegenerateGroundStateError,
    ModelSpec,
    build_hamiltonian,
    charge_observable,
    ground_spectrum,
    local_hamiltonian_bob,
    parity_operator,
    protocol_pair,
)
from .protocol import (
    ProtocolConfig,
    TeleportResult,
    alice_projector,
    closed_form_delta,
    delta_at_angle,
    optimal_theta,
    run_exact,
    run_on_ground_state,
    teleport_components,
)
from .twoqubit import (
    TwoQubitClosedForm,
    delta_charge_2q,
    delta_energy_2q,
    ground_energy_2q,
    ground_state_2q,
)
from .noise import (
    BIT_FLIP,
    CLASSICAL_FLIP,
    EXCITED_MIXTURE,
    EXCITED_SUPERPOSITION,
    PHASE_FLIP,
    NoiseSpec,
    apply_resource_noise,
    find_sign_threshold,
    noisy_delta,
)
from .shots import (
    ShotBatch,
    ShotStats,
    charge_stats,
    counts_payload,
    energy_stats,
    ingest_counts,
    sample_protocol,
)
from .keyrate import (
    KeyRatePoint,
    binary_entropy,
    devetak_winter,
    key_rate_point,
    key_rate_sweep,
    round_probabilities,
)

__version__ = "0.1.0"
