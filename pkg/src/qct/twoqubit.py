"""Closed-form two-qubit (N = 1) solution, used as an independent oracle.

With k = J/2, E0 = sqrt(h^2 + k^2) and r = k/E0, the ground state of
J X0 X1 + h (Z0 + Z1) is

    |gs> = (-sqrt(E0 - h) |00> + sqrt(E0 + h) |11>) / sqrt(2 E0)

at energy -2 E0. Direct evaluation in this state gives <Z0> = <Z1> = -h/E0
and <X0 X1> = -k/E0. Published derivations of the same model quote the
opposite sign for <Z>, and their r-parameterized shift formulas do not
match the exact pipeline; both variants are therefore returned side by
side, as a `framework` value (consistent with the pipeline) and a `paper`
value (the r-parameterized form), so tests can assert the former and log
the latter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class TwoQubitDomainError(ValueError):
    """Parameters outside the closed form's stated domain."""


@dataclass(frozen=True)
class TwoQubitClosedForm:
    h: float
    j: float

    def __post_init__(self):
        if not (math.isfinite(self.h) and math.isfinite(self.j)):
            raise TwoQubitDomainError("h and j must be finite")
        if self.h == 0.0 and self.j == 0.0:
            raise TwoQubitDomainError("h = j = 0 leaves E0 = 0; the closed form is undefined")

    @property
    def k(self) -> float:
        return 0.5 * self.j

    @property
    def e0(self) -> float:
        return math.hypot(self.h, self.k)

    @property
    def r(self) -> float:
        return self.k / self.e0


@dataclass(frozen=True)
class DualValue:
    """Framework (pipeline-consistent) value next to the r-parameterized one."""

    framework: float
    paper: float


def ground_state_2q(form: TwoQubitClosedForm) -> np.ndarray:
    """Closed-form ground state amplitudes over (|00>, |01>, |10>, |11>)."""
    if form.h < 0:
        raise TwoQubitDomainError("the closed-form ground state assumes h >= 0; use the numeric path")
    e0 = form.e0
    return np.array(
        [-math.sqrt(e0 - form.h), 0.0, 0.0, math.sqrt(e0 + form.h)],
        dtype=complex,
    ) / math.sqrt(2.0 * e0)


def ground_energy_2q(form: TwoQubitClosedForm) -> float:
    return -2.0 * form.e0


def z_bob_2q(form: TwoQubitClosedForm) -> DualValue:
    """<Z_1> in the ground state (paper variant carries the opposite sign)."""
    val = form.h / form.e0
    return DualValue(framework=-val, paper=val)


def xx_2q(form: TwoQubitClosedForm) -> float:
    """<X_0 X_1> in the ground state."""
    return -form.k / form.e0


def charge_correlators_2q(form: TwoQubitClosedForm) -> tuple[float, float]:
    """(xi, eta) of the charge observable; note xi^2 + eta^2 = 1 identically."""
    return form.h / form.e0, -form.k / form.e0


def energy_correlators_2q(form: TwoQubitClosedForm) -> tuple[float, float]:
    """(xi, eta) of Bob's local Hamiltonian."""
    z = -form.h / form.e0
    c = -form.k / form.e0
    xi = -2.0 * (form.h * z + form.j * c)
    eta = 2.0 * form.h * c - 2.0 * form.j * z
    return xi, eta


def _maximal_shift(xi: float, eta: float, a: int) -> float:
    norm = math.hypot(xi, eta)
    if norm == 0.0:
        return 0.0
    return 0.5 * xi - 0.5 * (xi * xi + (-1) ** a * eta * eta) / norm


def delta_charge_2q(form: TwoQubitClosedForm, a: int) -> DualValue:
    """Teleported charge shift for decision bit a."""
    xi, eta = charge_correlators_2q(form)
    r2 = form.r**2
    paper = 0.5 * (1.0 - (1.0 + (-1) ** a * r2) / math.sqrt(1.0 + r2))
    return DualValue(framework=_maximal_shift(xi, eta, a), paper=paper)


def delta_energy_2q(form: TwoQubitClosedForm, a: int) -> DualValue:
    """Teleported energy shift for decision bit a."""
    xi, eta = energy_correlators_2q(form)
    r2 = form.r**2
    h2, j2 = form.h**2, form.j**2
    paper = (
        form.h
        + form.j * form.r
        - (h2 + (-1) ** a * j2) * (1.0 + (-1) ** a * r2) / math.sqrt((h2 + j2) * (1.0 + r2))
    )
    return DualValue(framework=_maximal_shift(xi, eta, a), paper=paper)
