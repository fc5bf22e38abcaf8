"""Monte Carlo shot sampling of the protocol and the matching statistics.

Each shot draws Alice's outcome, applies Bob's conditional rotation to the
collapsed branch, and samples Bob's declared measurement basis. Draws come
from a counter-based generator (Philox keyed by the seed), so shot i sees
the same randomness regardless of how the batch is scheduled or chunked.

Counts files are JSON histograms: {"basis": "z"|"xx", "n_sites": int,
"counts": {bitstring: count}, "seed": optional, "sites": optional pair for
"xx"}. Site 0 is the leftmost character and carries Alice's protocol bit;
observable characters map '0' -> eigenvalue +1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import models, protocol
from .linalg import eigendecompose, pauli_on_site
from .protocol import ProtocolConfig

BASIS_Z = "z"
BASIS_XX = "xx"

_CLAMP_FLAG = 1e-9


class ShotsError(ValueError):
    """Invalid batch, basis, or counts file."""


@dataclass(frozen=True)
class ShotBatch:
    """Measurement record: counts keyed by (alice_bit, outcome in {-1, +1})."""

    n_shots: int
    counts: dict[tuple[int, int], int]
    seed: int
    measured_basis: str
    sites: tuple[int, ...]

    def __post_init__(self):
        if sum(self.counts.values()) != self.n_shots:
            raise ShotsError("counts do not sum to n_shots")
        for b, outcome in self.counts:
            if b not in (0, 1) or outcome not in (-1, +1):
                raise ShotsError(f"count key ({b}, {outcome}) outside the declared outcome sets")

    def outcome_mean(self) -> float:
        """Empirical mean of the measured +-1 observable."""
        total = sum(out * c for (_, out), c in self.counts.items())
        return total / self.n_shots


@dataclass(frozen=True)
class ShotStats:
    mean: float
    variance_single: float
    sem: float
    n_shots: int


def basis_for_observable(observable: str, spec: models.ModelSpec) -> tuple[str, tuple[int, ...]]:
    """Measurement basis and participating sites for a single-setting observable."""
    if observable in (models.CHARGE, models.ENERGY_Z):
        return BASIS_Z, (spec.n,)
    if observable == models.ENERGY_XX:
        partner = 0 if spec.kind == models.STAR else spec.n - 1
        return BASIS_XX, (partner, spec.n)
    raise ShotsError(
        "the composite energy observable needs separate z and xx batches; "
        "sample its components individually"
    )


def _measurement_projector(basis: str, sites: tuple[int, ...], n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    if basis == BASIS_Z:
        return 0.5 * (np.eye(dim, dtype=complex) + pauli_on_site("Z", sites[0], n_qubits))
    pair = pauli_on_site("X", sites[0], n_qubits) @ pauli_on_site("X", sites[1], n_qubits)
    return 0.5 * (np.eye(dim, dtype=complex) + pair)


def sample_protocol(
    config: ProtocolConfig,
    resource: np.ndarray,
    n_shots: int,
    seed: int,
) -> ShotBatch:
    """Sample n_shots protocol rounds; deterministic given (seed, shot index)."""
    if n_shots < 1:
        raise ShotsError(f"n_shots must be >= 1, got {n_shots}")
    spec = config.spec
    basis, sites = basis_for_observable(config.observable, spec)
    sigma_a, sigma_b = models.protocol_pair(spec, config.basis)
    proj_plus = _measurement_projector(basis, sites, spec.n_qubits)

    ref = protocol.run_exact(config, resource)
    theta = ref.theta

    # pure resources sample directly; mixtures sample an eigenstate first
    if resource.ndim == 1:
        weights = np.array([1.0])
        vectors = resource.reshape(-1, 1)
    else:
        rho_spec = eigendecompose(resource)
        weights = rho_spec.eigenvalues.copy()
        if float(weights.min()) < -_CLAMP_FLAG:
            warnings.warn(f"resource weight clamped from {weights.min():.3e}", RuntimeWarning)
        weights = np.clip(weights, 0.0, None)
        weights /= weights.sum()
        keep = weights > 1e-15
        weights, vectors = weights[keep], rho_spec.eigenvectors[:, keep]

    n_levels = weights.shape[0]
    p_first = np.empty(n_levels)
    q_plus = np.empty((n_levels, 2))
    projector_0 = protocol.alice_projector(sigma_a, 0)
    projector_1 = protocol.alice_projector(sigma_a, 1)
    for k in range(n_levels):
        psi = vectors[:, k]
        for b, proj in ((0, projector_0), (1, projector_1)):
            branch = proj @ psi
            w = float(np.vdot(branch, branch).real)
            if w < -_CLAMP_FLAG:
                warnings.warn(f"branch weight clamped from {w:.3e}", RuntimeWarning)
            w = max(w, 0.0)
            if b == 0:
                p_first[k] = w
            if w == 0.0:
                q_plus[k, b] = 0.0
                continue
            rot = np.cos(theta) * branch - 1j * np.sin(theta) * ((-1) ** (b ^ config.a)) * (sigma_b @ branch)
            rot /= math.sqrt(w)
            q_plus[k, b] = min(max(float(np.vdot(rot, proj_plus @ rot).real), 0.0), 1.0)

    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((n_shots, 3))
    cum = np.cumsum(weights)
    level = np.searchsorted(cum, u[:, 0], side="right").clip(max=n_levels - 1)
    bits = (u[:, 1] >= p_first[level]).astype(np.int64)
    plus = u[:, 2] < q_plus[level, bits]

    tallies = np.bincount(2 * bits + plus, minlength=4)
    counts = {
        (0, -1): int(tallies[0]),
        (0, +1): int(tallies[1]),
        (1, -1): int(tallies[2]),
        (1, +1): int(tallies[3]),
    }
    return ShotBatch(n_shots=n_shots, counts=counts, seed=seed, measured_basis=basis, sites=sites)


def charge_stats(batch: ShotBatch) -> ShotStats:
    """Charge mean and SEM from a Z-basis batch: Var(Q) = (1 - <Z>^2) / 4."""
    if batch.measured_basis != BASIS_Z:
        raise ShotsError(f"charge_stats needs a z-basis batch, got {batch.measured_basis!r}")
    z = batch.outcome_mean()
    variance = 0.25 * (1.0 - z * z)
    return ShotStats(
        mean=0.5 * (1.0 + z),
        variance_single=variance,
        sem=math.sqrt(variance / batch.n_shots),
        n_shots=batch.n_shots,
    )


def energy_stats(batch_z: ShotBatch, batch_xx: ShotBatch, h: float, j: float) -> ShotStats:
    """Two-batch energy estimate; the component errors add in quadrature."""
    if batch_z.measured_basis != BASIS_Z or batch_xx.measured_basis != BASIS_XX:
        raise ShotsError("energy_stats needs one z-basis batch and one xx-basis batch")
    z = batch_z.outcome_mean()
    xx = batch_xx.outcome_mean()
    sem_sq = h * h * (1.0 - z * z) / batch_z.n_shots + j * j * (1.0 - xx * xx) / batch_xx.n_shots
    n_total = batch_z.n_shots + batch_xx.n_shots
    return ShotStats(
        mean=h * z + j * xx,
        variance_single=sem_sq * n_total,
        sem=math.sqrt(sem_sq),
        n_shots=n_total,
    )


def _outcome_from_bits(key: str, basis: str, sites: tuple[int, ...]) -> int:
    if basis == BASIS_Z:
        return +1 if key[sites[0]] == "0" else -1
    i, j = sites
    if i == 0:
        # Alice's char is her protocol bit; her projector pins X_0 = -(-1)^b
        x0 = -((-1) ** int(key[0]))
        return x0 * (+1 if key[j] == "0" else -1)
    parity = int(key[i]) ^ int(key[j])
    return +1 if parity == 0 else -1


def counts_payload(batch: ShotBatch, n_sites: int) -> dict:
    """JSON-ready histogram for a batch (inverse of ingest_counts)."""
    counts: dict[str, int] = {}
    for (b, out), c in batch.counts.items():
        if c == 0:
            continue
        bits = ["0"] * n_sites
        bits[0] = str(b)
        if batch.measured_basis == BASIS_Z:
            bits[batch.sites[0]] = "0" if out == +1 else "1"
        else:
            i, j = batch.sites
            if i == 0:
                x0 = -((-1) ** b)
                bits[j] = "0" if out * x0 == +1 else "1"
            else:
                bits[i] = "0"
                bits[j] = "0" if out == +1 else "1"
        counts["".join(bits)] = counts.get("".join(bits), 0) + c
    payload = {
        "basis": batch.measured_basis,
        "n_sites": n_sites,
        "seed": batch.seed,
        "counts": counts,
    }
    if batch.measured_basis == BASIS_XX:
        payload["sites"] = list(batch.sites)
    return payload


def ingest_counts(source: str | Path | dict) -> ShotBatch:
    """Validate an external counts histogram and fold it into a ShotBatch."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            payload = json.load(fh)
    else:
        payload = source
    if not isinstance(payload, dict):
        raise ShotsError("counts payload must be a JSON object")

    basis = payload.get("basis")
    if basis not in (BASIS_Z, BASIS_XX):
        raise ShotsError(f"counts basis must be 'z' or 'xx', got {basis!r}")
    n_sites = payload.get("n_sites")
    if not isinstance(n_sites, int) or n_sites < 2:
        raise ShotsError(f"n_sites must be an integer >= 2, got {n_sites!r}")
    raw = payload.get("counts")
    if not isinstance(raw, dict) or not raw:
        raise ShotsError("counts histogram is missing or empty")

    if basis == BASIS_Z:
        sites: tuple[int, ...] = (n_sites - 1,)
    else:
        sites = tuple(payload.get("sites", (n_sites - 2, n_sites - 1)))
        if len(sites) != 2 or not all(0 <= s < n_sites for s in sites) or sites[0] >= sites[1]:
            raise ShotsError(f"invalid xx sites {sites!r}")

    counts = {(0, -1): 0, (0, +1): 0, (1, -1): 0, (1, +1): 0}
    total = 0
    for key, value in raw.items():
        if not isinstance(key, str) or len(key) != n_sites or set(key) - {"0", "1"}:
            raise ShotsError(f"bitstring {key!r} does not match n_sites = {n_sites}")
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise ShotsError(f"count for {key!r} must be a non-negative integer")
        b = int(key[0])
        counts[(b, _outcome_from_bits(key, basis, sites))] += value
        total += value
    if total == 0:
        raise ShotsError("counts histogram holds zero shots")

    seed = payload.get("seed", 0)
    return ShotBatch(n_shots=total, counts=counts, seed=int(seed), measured_basis=basis, sites=sites)
