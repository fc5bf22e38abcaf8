import math

import numpy as np
import pytest

import oracles
from qct import linalg, models, protocol


def _config(kind="star", n=1, j=1.0, h=1.0, **kwargs):
    return protocol.ProtocolConfig(spec=models.ModelSpec(kind=kind, n=n, j=j, h=h), **kwargs)


def test_alice_projector_single_qubit():
    proj = protocol.alice_projector(linalg.PAULI["X"], 0)
    assert np.allclose(proj, 0.5 * np.array([[1, -1], [-1, 1]]))


def test_alice_projectors_resolve_identity():
    x0 = linalg.pauli_on_site("X", 0, 2)
    p0 = protocol.alice_projector(x0, 0)
    p1 = protocol.alice_projector(x0, 1)
    assert np.max(np.abs(p0 + p1 - np.eye(4))) < 1e-15
    assert np.max(np.abs(p0 @ p1)) < 1e-15
    assert np.max(np.abs(p0 @ p0 - p0)) < 1e-15


def test_alice_projector_rejects_non_involution():
    with pytest.raises(protocol.ProtocolError):
        protocol.alice_projector(np.diag([1.0, 0.5]).astype(complex), 0)


def test_run_exact_charge_two_qubits():
    result = protocol.run_on_ground_state(_config())
    assert result.xi == pytest.approx(0.894427, abs=5e-7)
    assert result.eta == pytest.approx(-0.447214, abs=5e-7)
    assert result.delta == pytest.approx(-0.052786, abs=5e-7)
    # independent pipeline (entrywise operators, scipy expm) at the same angle
    reference = oracles.pipeline_delta("star", 1, 1.0, 1.0, "x", "charge", 0, result.theta)
    assert result.delta == pytest.approx(reference, abs=1e-12)


def test_run_exact_flipped_bit():
    base = protocol.run_on_ground_state(_config())
    flipped = protocol.run_on_ground_state(_config(a=1, theta=base.theta))
    assert flipped.delta == pytest.approx(0.147214, abs=5e-7)
    reference = oracles.pipeline_delta("star", 1, 1.0, 1.0, "x", "charge", 1, base.theta)
    assert flipped.delta == pytest.approx(reference, abs=1e-12)


def test_zero_coupling_gives_zero_shift():
    for observable in ("charge", "energy"):
        result = protocol.run_on_ground_state(_config(j=0.0, observable=observable))
        assert result.delta == pytest.approx(0.0, abs=1e-12)
        assert result.eta == pytest.approx(0.0, abs=1e-12)


def test_optimal_theta_pure_xi():
    theta = protocol.optimal_theta(-1.0, 0.0)
    assert theta == pytest.approx(np.pi / 2)
    assert protocol.closed_form_delta(-1.0, 0.0, 0) == pytest.approx(-1.0)


def test_optimal_theta_pure_eta():
    # delta at the extraction angle is -1/2 regardless of the angle's sign
    theta = protocol.optimal_theta(0.0, 1.0)
    assert abs(theta) == pytest.approx(np.pi / 4)
    assert protocol.closed_form_delta(0.0, 1.0, 0) == pytest.approx(-0.5)
    assert protocol.delta_at_angle(0.0, 1.0, theta, 0) == pytest.approx(-0.5)


def test_optimal_theta_degenerate_pair():
    with pytest.raises(protocol.ProtocolError):
        protocol.optimal_theta(0.0, 0.0)


def test_optimal_theta_matches_grid_scan():
    # dense scan of the independent pipeline: the extraction extremum sits at
    # atan2(-eta, xi)/2, i.e. at +0.231824 for (0.894427, -0.447214)
    result = protocol.run_on_ground_state(_config())
    best_theta, best_delta = oracles.grid_scan_theta("star", 1, 1.0, 1.0, "x", "charge", 0)
    assert abs(best_theta - result.theta) < 2e-4  # grid resolution
    assert best_delta == pytest.approx(result.delta, abs=1e-7)
    assert result.theta == pytest.approx(0.231824, abs=5e-7)


@pytest.mark.parametrize("kind,n,basis", [("star", 1, "x"), ("star", 3, "x"), ("nn", 2, "x"), ("nn", 3, "y")])
@pytest.mark.parametrize("observable", ["charge", "energy"])
@pytest.mark.parametrize("a", [0, 1])
def test_pipeline_agrees_with_closed_form(kind, n, basis, observable, a):
    for j, h in ((0.5, 1.0), (1.0, 1.0), (2.0, 0.7)):
        config = protocol.ProtocolConfig(
            spec=models.ModelSpec(kind=kind, n=n, j=j, h=h),
            basis=basis, observable=observable, a=a,
        )
        result = protocol.run_on_ground_state(config)
        closed = protocol.closed_form_delta(result.xi, result.eta, a)
        assert abs(result.delta - closed) < 1e-10


def test_charge_sign_law():
    for kind, n in (("star", 1), ("star", 2), ("nn", 2), ("nn", 3)):
        for j in (0.5, 1.0, 2.0, 3.0):
            zero = protocol.run_on_ground_state(_config(kind=kind, n=n, j=j))
            one = protocol.run_on_ground_state(_config(kind=kind, n=n, j=j, a=1, theta=zero.theta))
            assert zero.delta <= 1e-12
            assert one.delta >= -1e-12
            if abs(zero.eta) > 1e-9:
                assert zero.delta < 0
                assert one.delta > 0


def test_branch_probabilities_are_half():
    for kind, n in (("star", 1), ("nn", 3)):
        result = protocol.run_on_ground_state(_config(kind=kind, n=n))
        assert np.isclose(sum(result.branch_probabilities), 1.0, atol=1e-10)
        assert result.branch_probabilities[0] == pytest.approx(0.5, abs=1e-10)


def test_star_energy_closed_form():
    # a=0 shift: -<H_B> - sqrt((h^2+J^2)(<Z>^2+<XX>^2))
    spec = models.ModelSpec(kind="star", n=1, j=2.0, h=1.0)
    gs = models.ground_spectrum(spec).ground_state
    z = linalg.expectation(gs, linalg.pauli_on_site("Z", 1, 2))
    xx = linalg.expectation(gs, linalg.pauli_on_site("X", 0, 2) @ linalg.pauli_on_site("X", 1, 2))
    expected = -(spec.h * z + spec.j * xx) - math.sqrt((spec.h**2 + spec.j**2) * (z * z + xx * xx))
    result = protocol.teleport_components(protocol.ProtocolConfig(spec=spec, observable="energy"))
    assert result.delta == pytest.approx(expected, abs=1e-10)
    assert result.xi == pytest.approx(-2.0 * (spec.h * z + spec.j * xx), abs=1e-10)
    assert result.eta == pytest.approx(2.0 * spec.h * xx - 2.0 * spec.j * z, abs=1e-10)


def test_components_sum_to_aggregate():
    for kind, n, basis in (("star", 1, "x"), ("nn", 2, "x"), ("nn", 2, "y")):
        config = protocol.ProtocolConfig(
            spec=models.ModelSpec(kind=kind, n=n, j=1.4, h=0.9), basis=basis, observable="energy"
        )
        result = protocol.teleport_components(config)
        total = sum(part.delta for part in result.delta_components.values())
        assert total == pytest.approx(result.delta, abs=1e-10)


def test_component_closed_form():
    # each addend at the sum-optimal angle:
    # delta_i = xi_i/2 - (xi_i xi + (-1)^a eta_i eta) / (2 sqrt(xi^2 + eta^2))
    config = protocol.ProtocolConfig(
        spec=models.ModelSpec(kind="star", n=1, j=2.0, h=1.0), observable="energy"
    )
    result = protocol.teleport_components(config)
    norm = math.hypot(result.xi, result.eta)
    for part in result.delta_components.values():
        closed = 0.5 * part.xi - 0.5 * (part.xi * result.xi + part.eta * result.eta) / norm
        assert part.delta == pytest.approx(closed, abs=1e-10)


def test_chain_x_basis_correlator_formulas():
    # xi = -2<H_B>, eta = 2h<X0 XN> - 2J<X0 X_{N-1} Z_N> on the chain
    spec = models.ModelSpec(kind="nn", n=2, j=1.0, h=1.0)
    gs = models.ground_spectrum(spec).ground_state
    nq = spec.n_qubits
    z2 = linalg.expectation(gs, linalg.pauli_on_site("Z", 2, nq))
    x1x2 = linalg.expectation(gs, linalg.pauli_on_site("X", 1, nq) @ linalg.pauli_on_site("X", 2, nq))
    x0x2 = linalg.expectation(gs, linalg.pauli_on_site("X", 0, nq) @ linalg.pauli_on_site("X", 2, nq))
    x0x1z2 = linalg.expectation(
        gs,
        linalg.pauli_on_site("X", 0, nq) @ linalg.pauli_on_site("X", 1, nq) @ linalg.pauli_on_site("Z", 2, nq),
    )
    result = protocol.run_on_ground_state(
        protocol.ProtocolConfig(spec=spec, basis="x", observable="energy")
    )
    assert result.xi == pytest.approx(-2.0 * (spec.h * z2 + spec.j * x1x2), abs=1e-9)
    assert result.eta == pytest.approx(2.0 * spec.h * x0x2 - 2.0 * spec.j * x0x1z2, abs=1e-9)


def test_chain_x_basis_expanded_shift_formula():
    # the fully expanded a-dependent shift in the four chain correlators;
    # published displays of this expansion carry a flipped cross-term sign
    # and the wrong J^2 correlator, so the coefficients here come from
    # expanding xi and eta directly
    spec = models.ModelSpec(kind="nn", n=2, j=1.0, h=1.0)
    gs = models.ground_spectrum(spec).ground_state
    nq = spec.n_qubits
    z = linalg.expectation(gs, linalg.pauli_on_site("Z", 2, nq))
    xx = linalg.expectation(gs, linalg.pauli_on_site("X", 1, nq) @ linalg.pauli_on_site("X", 2, nq))
    x0x2 = linalg.expectation(gs, linalg.pauli_on_site("X", 0, nq) @ linalg.pauli_on_site("X", 2, nq))
    x0x1z2 = linalg.expectation(
        gs,
        linalg.pauli_on_site("X", 0, nq) @ linalg.pauli_on_site("X", 1, nq) @ linalg.pauli_on_site("Z", 2, nq),
    )
    h, j = spec.h, spec.j
    base = protocol.run_on_ground_state(
        protocol.ProtocolConfig(spec=spec, basis="x", observable="energy")
    )
    for a in (0, 1):
        s = (-1) ** a
        num = (h * h * (z * z + s * x0x2 * x0x2)
               + 2 * h * j * (z * xx - s * x0x2 * x0x1z2)
               + j * j * (xx * xx + s * x0x1z2 * x0x1z2))
        den = math.sqrt(h * h * (z * z + x0x2 * x0x2)
                        + 2 * h * j * (z * xx - x0x2 * x0x1z2)
                        + j * j * (xx * xx + x0x1z2 * x0x1z2))
        expanded = -h * z - j * xx - num / den
        pipeline = protocol.run_on_ground_state(
            protocol.ProtocolConfig(spec=spec, basis="x", observable="energy", a=a, theta=base.theta)
        ).delta
        assert pipeline == pytest.approx(expanded, abs=1e-9)


def test_chain_y_basis_correlator_formulas():
    # xi = -2h<Z_N>; the coupling addend contributes no xi; the eta correlator
    # is <Y0 Y_N> (its <Y0 X_N> variant vanishes identically in the ground state)
    spec = models.ModelSpec(kind="nn", n=2, j=1.0, h=1.0)
    gs = models.ground_spectrum(spec).ground_state
    nq = spec.n_qubits
    z2 = linalg.expectation(gs, linalg.pauli_on_site("Z", 2, nq))
    y0y2 = linalg.expectation(gs, linalg.pauli_on_site("Y", 0, nq) @ linalg.pauli_on_site("Y", 2, nq))
    y0x2 = linalg.expectation(gs, linalg.pauli_on_site("Y", 0, nq) @ linalg.pauli_on_site("X", 2, nq))
    result = protocol.teleport_components(
        protocol.ProtocolConfig(spec=spec, basis="y", observable="energy")
    )
    assert y0x2 == pytest.approx(0.0, abs=1e-12)
    assert result.xi == pytest.approx(-2.0 * spec.h * z2, abs=1e-9)
    assert result.eta == pytest.approx(-2.0 * spec.h * y0y2, abs=1e-9)
    assert result.delta_components["coupling"].xi == pytest.approx(0.0, abs=1e-10)


def test_components_rejected_for_single_term_observable():
    with pytest.raises(protocol.ProtocolError):
        protocol.teleport_components(_config(observable="charge"))


def test_run_exact_dimension_mismatch():
    with pytest.raises(protocol.ProtocolError):
        protocol.run_exact(_config(), np.zeros(8, dtype=complex))


def test_fixed_theta_row_matches_formula():
    config = _config(theta=0.17, a=1)
    result = protocol.run_on_ground_state(config)
    assert result.theta == 0.17
    assert result.delta == pytest.approx(
        protocol.delta_at_angle(result.xi, result.eta, 0.17, 1), abs=1e-12
    )
