"""Transverse-field Ising models and the local operators used by the protocol.

Two couplings are supported: a star geometry where site 0 couples to every
other site, and an open nearest-neighbor chain. Alice sits at site 0, Bob at
site N, and the register holds N+1 qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import MAX_QUBITS, Spectrum, eigendecompose, pauli_on_site

STAR = "star"
NN = "nn"
MODEL_KINDS = (STAR, NN)

BASIS_X = "x"
BASIS_Y = "y"
ALICE_BASES = (BASIS_X, BASIS_Y)

CHARGE = "charge"
ENERGY = "energy"
ENERGY_Z = "energy_z"
ENERGY_XX = "energy_xx"
OBSERVABLES = (CHARGE, ENERGY, ENERGY_Z, ENERGY_XX)


class ModelError(ValueError):
    """Invalid model parameters or an illegal model/basis combination."""


class DegenerateGroundStateError(RuntimeError):
    """The requested ground state is degenerate; the protocol is undefined."""


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus couplings. `n` is Bob's site index (N+1 qubits total)."""

    kind: str
    n: int
    j: float
    h: float

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ModelError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.n < 1:
            raise ModelError(f"n must be >= 1, got {self.n}")
        if self.n + 1 > MAX_QUBITS:
            raise ModelError(f"n = {self.n} needs {self.n + 1} qubits, above the cap {MAX_QUBITS}")
        if not (math.isfinite(self.j) and math.isfinite(self.h)):
            raise ModelError("couplings j and h must be finite")

    @property
    def n_qubits(self) -> int:
        return self.n + 1

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


@dataclass(frozen=True)
class BobLocalHamiltonian:
    """Bob's two-term local Hamiltonian h*Z_N + J*XX and its addends."""

    total: np.ndarray
    field_term: np.ndarray  # h * Z_N
    coupling_term: np.ndarray  # J * X_partner X_N


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Full Hamiltonian: J * sum of XX couplings + h * sum of Z fields."""
    nq = spec.n_qubits
    ham = np.zeros((spec.dim, spec.dim), dtype=complex)
    for k in range(1, spec.n + 1):
        left = 0 if spec.kind == STAR else k - 1
        ham += spec.j * (pauli_on_site("X", left, nq) @ pauli_on_site("X", k, nq))
    for k in range(nq):
        ham += spec.h * pauli_on_site("Z", k, nq)
    return ham


def local_hamiltonian_bob(spec: ModelSpec) -> BobLocalHamiltonian:
    """Terms of the full Hamiltonian supported on Bob's site."""
    nq = spec.n_qubits
    partner = 0 if spec.kind == STAR else spec.n - 1
    field = spec.h * pauli_on_site("Z", spec.n, nq)
    coupling = spec.j * (pauli_on_site("X", partner, nq) @ pauli_on_site("X", spec.n, nq))
    return BobLocalHamiltonian(total=field + coupling, field_term=field, coupling_term=coupling)


def charge_observable(spec: ModelSpec) -> np.ndarray:
    """Charge at Bob's site: the projector (I + Z_N) / 2."""
    return 0.5 * (np.eye(spec.dim, dtype=complex) + pauli_on_site("Z", spec.n, spec.n_qubits))


def protocol_pair(spec: ModelSpec, basis: str) -> tuple[np.ndarray, np.ndarray]:
    """Alice/Bob operator pair: x -> (X_0, Y_N), y -> (Y_0, X_N).

    The y basis needs Alice's projector to commute with Bob's local
    Hamiltonian, which fails for the star model (it contains X_0) and for
    the n = 1 chain (identical to the star model).
    """
    if basis not in ALICE_BASES:
        raise ModelError(f"unknown basis {basis!r}; expected one of {ALICE_BASES}")
    if basis == BASIS_Y:
        if spec.kind == STAR:
            raise ModelError("basis y is illegal for the star model: [H_B, P_A] != 0")
        if spec.n < 2:
            raise ModelError("basis y needs n >= 2 on the chain: n = 1 reduces to the star model")
    nq = spec.n_qubits
    if basis == BASIS_X:
        return pauli_on_site("X", 0, nq), pauli_on_site("Y", spec.n, nq)
    return pauli_on_site("Y", 0, nq), pauli_on_site("X", spec.n, nq)


def parity_operator(n_qubits: int) -> np.ndarray:
    """Global spin-flip parity Z_0 Z_1 ... Z_N, the exact symmetry of both models."""
    out = np.eye(2**n_qubits, dtype=complex)
    for k in range(n_qubits):
        out = out @ pauli_on_site("Z", k, n_qubits)
    return out


# memo for repeated protocol evaluations on one model; capped to small dims
# so memory stays predictable at large n
_SPECTRUM_CACHE: dict[ModelSpec, Spectrum] = {}
_CACHE_MAX_DIM = 256
_CACHE_MAX_ENTRIES = 16


def ground_spectrum(spec: ModelSpec) -> Spectrum:
    """Diagonalize the model and reject degenerate ground states."""
    spectrum = _SPECTRUM_CACHE.get(spec)
    if spectrum is None:
        spectrum = eigendecompose(build_hamiltonian(spec))
        if spec.dim <= _CACHE_MAX_DIM:
            if len(_SPECTRUM_CACHE) >= _CACHE_MAX_ENTRIES:
                _SPECTRUM_CACHE.pop(next(iter(_SPECTRUM_CACHE)))
            _SPECTRUM_CACHE[spec] = spectrum
    if spectrum.gap01 < 1e-9 * max(spectrum.spectral_norm, 1.0):
        raise DegenerateGroundStateError(
            f"ground state of {spec.kind} n={spec.n} (j={spec.j}, h={spec.h}) is degenerate "
            f"(gap01 = {spectrum.gap01:.3e})"
        )
    return spectrum
