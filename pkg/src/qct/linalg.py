"""Dense complex linear algebra over small multi-qubit Hilbert spaces.

Operators, states and density matrices are plain complex numpy arrays.
Site 0 occupies the most significant bit of the basis index, so
``pauli_on_site("X", 0, 2)`` is ``kron(X, I)`` and acts on the leftmost
character of a bitstring label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 12
MAX_DIM = 2**MAX_QUBITS

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class LinalgError(ValueError):
    """Invalid operand for a dense linear-algebra operation."""


class ConvergenceError(RuntimeError):
    """Eigensolver failed to converge within its sweep budget."""


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition of a Hermitian operator.

    ``eigenvalues`` are ascending; ``eigenvectors[:, k]`` is the unit
    eigenvector for ``eigenvalues[k]`` with its largest-magnitude amplitude
    made real and positive. ``gap01`` is the gap between the two lowest
    levels.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap01: float

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))


def pauli_on_site(letter: str, site: int, n_qubits: int) -> np.ndarray:
    """Embed a single-qubit Pauli at `site` in an `n_qubits` register."""
    if letter not in PAULI:
        raise LinalgError(f"unknown Pauli letter {letter!r}")
    if n_qubits < 1 or n_qubits > MAX_QUBITS:
        raise LinalgError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    if not 0 <= site < n_qubits:
        raise LinalgError(f"site {site} out of range for {n_qubits} qubits")
    out = np.array([[1.0 + 0j]])
    for k in range(n_qubits):
        out = np.kron(out, PAULI[letter] if k == site else PAULI["I"])
    return out


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the same site-0-major ordering as pauli_on_site."""
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise LinalgError(f"kron result dimension exceeds cap {MAX_DIM}")
    return np.kron(a, b)


def check_hermitian(a: np.ndarray, tol: float = 1e-12) -> None:
    dev = float(np.max(np.abs(a - a.conj().T)))
    if dev > tol:
        raise LinalgError(f"matrix is not Hermitian (max |A - A^H| = {dev:.3e})")


def check_state_vector(v: np.ndarray, tol: float = 1e-12) -> None:
    if v.ndim != 1:
        raise LinalgError("state vector must be one-dimensional")
    if not np.all(np.isfinite(v.view(float))):
        raise LinalgError("state vector contains non-finite amplitudes")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise LinalgError(f"state vector norm {norm} deviates from 1")


def check_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    check_hermitian(rho, tol=1e-12)
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        raise LinalgError(f"density matrix trace {tr} deviates from 1")
    lo = float(np.min(eigendecompose(rho).eigenvalues))
    if lo < -tol:
        raise LinalgError(f"density matrix has negative eigenvalue {lo:.3e}")


def _jacobi_rotate(a, v, p, q):
    """Zero a[p, q] with a complex Jacobi rotation, updating a and v in place."""
    apq = a[p, q]
    r = abs(apq)
    u = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * np.conj(u) * col_q
    a[:, q] = s * u * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * u * row_q
    a[q, :] = s * np.conj(u) * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vp = v[:, p].copy()
    vq = v[:, q].copy()
    v[:, p] = c * vp - s * np.conj(u) * vq
    v[:, q] = s * u * vp + c * vq


def eigendecompose(h: np.ndarray, max_sweeps: int = 60) -> Spectrum:
    """Full spectrum of a Hermitian matrix by threshold cyclic Jacobi.

    Deterministic: no randomized pivoting and no threading, so repeated runs
    give bit-identical output. Practical for the target dimensions (<= 64
    fast, a few hundred tolerable); the hard cap mirrors the register cap.
    """
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise LinalgError("eigendecompose expects a square matrix")
    n = h.shape[0]
    if n > MAX_DIM:
        raise LinalgError(f"dimension {n} exceeds cap {MAX_DIM}")
    check_hermitian(h)

    a = h.astype(complex).copy()
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a)) or 1.0

    if n > 1:
        for sweep in range(max_sweeps):
            off_abs = float(np.sum(np.abs(np.triu(a, 1))))
            off_fro = np.sqrt(2.0) * float(np.linalg.norm(np.triu(a, 1)))
            if off_fro <= 1e-14 * scale:
                break
            # early sweeps skip small pivots; later sweeps rotate everything
            thresh = 0.2 * off_abs / (n * n) if sweep < 3 else 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if abs(a[p, q]) > max(thresh, 1e-300):
                        _jacobi_rotate(a, v, p, q)
        else:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    eigenvalues = np.diag(a).real.copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v[:, order]
    # fix each eigenvector's global phase: largest amplitude real and positive
    for k in range(n):
        col = vectors[:, k]
        idx = int(np.argmax(np.abs(col)))
        piv = col[idx]
        vectors[:, k] = col * (np.conj(piv) / abs(piv))

    gap01 = float(eigenvalues[1] - eigenvalues[0]) if n > 1 else 0.0
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=vectors, gap01=gap01)


def expectation(state: np.ndarray, o: np.ndarray) -> float:
    """<O> for a state vector or density matrix; the result must be real."""
    if state.ndim == 1:
        if state.shape[0] != o.shape[0]:
            raise LinalgError("state and operator dimensions differ")
        val = complex(np.vdot(state, o @ state))
    elif state.ndim == 2:
        if state.shape != o.shape:
            raise LinalgError("state and operator dimensions differ")
        val = complex(np.einsum("ij,ji->", state, o))
    else:
        raise LinalgError("state must be a vector or a square matrix")
    if abs(val.imag) > 1e-10:
        raise LinalgError(f"expectation has imaginary residue {val.imag:.3e}")
    return val.real


def pauli_rotation(sigma: np.ndarray, theta: float) -> np.ndarray:
    """exp(-i theta sigma) for involutory sigma, evaluated analytically."""
    dim = sigma.shape[0]
    dev = float(np.max(np.abs(sigma @ sigma - np.eye(dim))))
    if dev > 1e-10:
        raise LinalgError(f"rotation generator is not an involution (|s^2 - I| = {dev:.3e})")
    return np.cos(theta) * np.eye(dim, dtype=complex) - 1j * np.sin(theta) * sigma
