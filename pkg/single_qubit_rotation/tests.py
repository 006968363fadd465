import cmath
import math

import numpy as np
from django.test import SimpleTestCase

from pulses.models import PulseEnvelope
from quantum_core.models import StateVector
from quantum_core.services import PropagationService, StateService

from .exceptions import InfeasibleDesignError
from .models import (
    LAMBDA_LABELS,
    QUBIT_LABELS,
    MixingAngles,
    RabiDesign,
    RamanConfig,
    RotationSpec,
    wrap_angle,
)
from .services import RotationService

INVERSION_ANGLES = MixingAngles(phi=5 * math.pi / 4, eta=math.pi)


def random_qubit_state(rng):
    amplitudes = rng.normal(size=2) + 1j * rng.normal(size=2)
    return StateVector(QUBIT_LABELS, amplitudes / np.linalg.norm(amplitudes))


class CoupledUncoupledBasisTests(SimpleTestCase):

    def test_trivial_angles(self):
        coupled, uncoupled = RotationService.coupled_uncoupled_basis(MixingAngles(0.0, 0.0))
        np.testing.assert_array_equal(coupled.amplitudes, [1.0, 0.0])
        np.testing.assert_array_equal(uncoupled.amplitudes, [0.0, 1.0])

    def test_equal_superposition(self):
        coupled, _ = RotationService.coupled_uncoupled_basis(MixingAngles(math.pi / 4, 0.0))
        np.testing.assert_allclose(coupled.amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)

    def test_orthogonal_for_any_angles(self):
        rng = np.random.default_rng(11)
        for phi, eta in rng.uniform(0.0, 2 * math.pi, size=(25, 2)):
            coupled, uncoupled = RotationService.coupled_uncoupled_basis(MixingAngles(phi, eta))
            self.assertLessEqual(abs(coupled.inner(uncoupled)), 1e-15)


class LambdaHamiltonianTests(SimpleTestCase):

    def test_no_drive_is_diagonal(self):
        h = RotationService.build_lambda_hamiltonian(
            MixingAngles(0.4, 1.0), PulseEnvelope.gaussian(0.0, 0.0, 1.0), 1.5
        )
        np.testing.assert_array_equal(h.evaluate(0.3), np.diag([0.0, 0.0, 1.5]))

    def test_phi_zero_decouples_upper_qubit_state(self):
        h = RotationService.build_lambda_hamiltonian(
            MixingAngles(0.0, 0.7), PulseEnvelope.gaussian(2.0, 0.0, 1.0), -0.4
        )
        matrix = h.evaluate(0.2)
        self.assertEqual(abs(matrix[1, 2]), 0.0)
        self.assertEqual(abs(matrix[2, 1]), 0.0)
        self.assertNotEqual(matrix[0, 2], 0.0)

    def test_interaction_frame_is_hermitian_without_detuning_term(self):
        h = RotationService.build_lambda_hamiltonian(
            INVERSION_ANGLES, PulseEnvelope.gaussian(1.0 + 0.5j, 0.0, 2.0), 3.0, frame="interaction"
        )
        for t in (-1.0, 0.0, 0.8):
            matrix = h.evaluate(t)
            self.assertEqual(h.hermiticity_error(t), 0.0)
            self.assertEqual(matrix[2, 2], 0.0)

    def test_rejects_unknown_frame(self):
        with self.assertRaises(ValueError):
            RotationService.build_lambda_hamiltonian(
                INVERSION_ANGLES, PulseEnvelope.gaussian(1.0, 0.0, 1.0), 1.0, frame="lab"
            )


class RabiTransferMatrixTests(SimpleTestCase):

    def test_resonant_two_pi_pulse(self):
        tm = RotationService.rabi_transfer_matrix(2.0, 0.0, math.pi)
        self.assertAlmostEqual(tm.alpha, -1.0, places=12)
        self.assertLessEqual(abs(tm.beta), 1e-12)

    def test_inversion_parameters(self):
        tm = RotationService.rabi_transfer_matrix(2.0, -2 / math.sqrt(3), math.pi * math.sqrt(3))
        self.assertLessEqual(abs(tm.alpha + 1.0), 1e-12)
        self.assertLessEqual(abs(tm.beta), 1e-12)
        self.assertAlmostEqual(abs(tm.phase_shift), math.pi, places=10)

    def test_unitary_for_random_inputs(self):
        rng = np.random.default_rng(3)
        for Omega, Delta, T in zip(
            rng.uniform(-5, 5, 50), rng.uniform(-5, 5, 50), rng.uniform(0, 20, 50)
        ):
            tm = RotationService.rabi_transfer_matrix(Omega, Delta, T)
            self.assertAlmostEqual(abs(tm.alpha) ** 2 + abs(tm.beta) ** 2, 1.0, delta=1e-12)

    def test_zero_drive_limit(self):
        tm = RotationService.rabi_transfer_matrix(0.0, 0.0, 4.0)
        self.assertEqual((tm.alpha, tm.beta), (1.0, 0.0))

    def test_negative_duration(self):
        with self.assertRaises(ValueError):
            RotationService.rabi_transfer_matrix(1.0, 0.0, -1.0)

    def test_matches_numerical_two_level_propagation(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            Omega, Delta, T = rng.uniform(0.5, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(0.5, 5.0)
            analytic = RotationService.rabi_transfer_matrix(Omega, Delta, T)
            numeric = RotationService.propagate_two_level(Omega, Delta, T)
            self.assertLessEqual(abs(analytic.alpha - numeric.alpha), 1e-6)
            self.assertLessEqual(abs(analytic.beta - numeric.beta), 1e-6)


class RabiDesignTests(SimpleTestCase):

    def test_inversion_design(self):
        design = RotationService.rabi_design(2, math.pi, 2.0)
        self.assertAlmostEqual(design.Delta, -2 / math.sqrt(3), places=12)
        self.assertAlmostEqual(design.T, math.pi * math.sqrt(3), places=12)
        self.assertAlmostEqual(design.T, 5.441, places=3)
        self.assertAlmostEqual(design.wrapped_delta, math.pi, places=12)

    def test_resonant_when_delta_is_m_pi(self):
        design = RotationService.rabi_design(3, 3 * math.pi, 1.5)
        self.assertEqual(design.Delta, 0.0)
        self.assertAlmostEqual(design.T, 2 * math.pi * 3 / 1.5, places=12)

    def test_boundary_is_infeasible(self):
        with self.assertRaisesMessage(InfeasibleDesignError, "(0, 2*pi)"):
            RotationService.rabi_design(1, 2 * math.pi, 1.0)
        with self.assertRaises(InfeasibleDesignError):
            RotationService.rabi_design(2, -0.1, 1.0)

    def test_round_trip_through_transfer_matrix(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            m = int(rng.integers(1, 4))
            delta = rng.uniform(0.05, 2 * m * math.pi - 0.05)
            design = RotationService.rabi_design(m, delta, rng.uniform(0.5, 4.0))
            tm = RotationService.rabi_transfer_matrix(design.Omega, design.Delta, design.T)
            self.assertLessEqual(abs(tm.beta), 1e-12)
            self.assertLessEqual(abs(wrap_angle(np.angle(tm.alpha) + delta)), 1e-10)

    def test_delta_reported_in_principal_range(self):
        design = RotationService.rabi_design(3, 4.5 * math.pi, 1.0)
        self.assertAlmostEqual(design.delta, 4.5 * math.pi, places=9)
        self.assertAlmostEqual(design.wrapped_delta, 0.5 * math.pi, places=9)

    def test_area_invariant_enforced(self):
        with self.assertRaises(ValueError):
            RabiDesign(Omega=1.0, Delta=0.0, T=1.0, m=1)


class RamanPhaseTests(SimpleTestCase):

    def test_no_drive(self):
        pulse = PulseEnvelope.gaussian(0.0, 0.0, 1.0)
        self.assertEqual(RotationService.raman_phase(pulse, 5.0, -3.0, 3.0), 0.0)

    def test_rectangular(self):
        pulse = PulseEnvelope.rectangular(1.0, 10.0, 20.0)
        self.assertAlmostEqual(RotationService.raman_phase(pulse, 10.0, 0.0, 20.0), -0.5, places=14)

    def test_gaussian(self):
        pulse = PulseEnvelope.gaussian(1.0, 0.0, 2.0)
        delta = RotationService.raman_phase(pulse, 20.0, -16.0, 16.0)
        self.assertAlmostEqual(delta, -2.0 * math.sqrt(math.pi / 2) / 80.0, places=10)
        self.assertAlmostEqual(delta, -0.03133, places=5)

    def test_validity_ratio_ignores_detuning_sign(self):
        pulse = PulseEnvelope.gaussian(2.0, 10.0, 3.0)
        self.assertAlmostEqual(RotationService.raman_validity_ratio(pulse, 20.0), 0.05, places=15)
        self.assertAlmostEqual(RotationService.raman_validity_ratio(pulse, -20.0), 0.05, places=15)

    def test_zero_detuning(self):
        with self.assertRaises(ValueError):
            RotationService.raman_phase(PulseEnvelope.gaussian(1.0, 0.0, 1.0), 0.0, -1.0, 1.0)

    def test_validity_warning(self):
        pulse = PulseEnvelope.gaussian(1.0, 0.0, 1.0)
        with self.assertLogs("single_qubit_rotation.services", level="WARNING"):
            RotationService.raman_phase(pulse, 2.0, -8.0, 8.0)


class RotationOperatorTests(SimpleTestCase):

    def test_zero_angle_is_identity(self):
        spec = RotationSpec((0.0, 0.6, 0.8), 0.0)
        np.testing.assert_array_equal(RotationService.rotation_operator(spec), np.eye(2))

    def test_inversion_rotation_is_bit_flip(self):
        spec = RotationSpec.from_angles(INVERSION_ANGLES, math.pi)
        np.testing.assert_allclose(spec.axis, (-1.0, 0.0, 0.0), atol=1e-15)
        np.testing.assert_allclose(
            RotationService.rotation_operator(spec), [[0.0, 1.0], [1.0, 0.0]], atol=1e-12
        )

    def test_composition(self):
        axis = (2 / 3, -1 / 3, 2 / 3)
        first = RotationService.rotation_operator(RotationSpec(axis, 0.7))
        second = RotationService.rotation_operator(RotationSpec(axis, 1.9))
        combined = RotationService.rotation_operator(RotationSpec(axis, 2.6))
        np.testing.assert_allclose(first @ second, combined, atol=1e-12)

    def test_matches_coupled_state_phase(self):
        angles = MixingAngles(0.35, 2.2)
        coupled, uncoupled = RotationService.coupled_uncoupled_basis(angles)
        operator = RotationService.rotation_operator(RotationSpec.from_angles(angles, 1.3))
        np.testing.assert_allclose(operator @ uncoupled.amplitudes, uncoupled.amplitudes, atol=1e-14)
        np.testing.assert_allclose(
            operator @ coupled.amplitudes, cmath.exp(-1.3j) * coupled.amplitudes, atol=1e-14
        )

    def test_rejects_non_unit_axis(self):
        with self.assertRaises(ValueError):
            RotationSpec((1.0, 1.0, 0.0), 0.5)


class TransferUnitaryTests(SimpleTestCase):

    def test_lower_state_columns_match_propagation(self):
        angles = MixingAngles(0.3, 1.1)
        Omega, Delta, T = 1.7, 0.9, 2.3
        unitary = RotationService.transfer_unitary(
            RotationService.rabi_transfer_matrix(Omega, Delta, T), angles
        )
        np.testing.assert_allclose(unitary.conj().T @ unitary, np.eye(3), atol=1e-12)

        h = RotationService.build_lambda_hamiltonian(
            angles, PulseEnvelope.rectangular(Omega, 0.5 * T, T), Delta
        )
        for column, label in enumerate(QUBIT_LABELS):
            psi0 = StateVector.basis(LAMBDA_LABELS, label)
            final = PropagationService.propagate(h, psi0, 0.0, T).final_state
            np.testing.assert_allclose(final.amplitudes, unitary[:, column], atol=1e-8)


class SimulateRotationTests(SimpleTestCase):

    def test_inversion_run(self):
        design = RotationService.rabi_design(2, math.pi, 2.0)
        result = RotationService.simulate_rotation(
            INVERSION_ANGLES, design, StateVector.basis(QUBIT_LABELS, "0")
        )
        populations = result.final_state.populations()
        self.assertGreaterEqual(populations["1"], 0.999)
        self.assertLessEqual(populations["e"], 1e-3)
        self.assertGreater(result.max_excited_population, 0.01)
        self.assertGreaterEqual(result.fidelity, 1 - 1e-9)
        self.assertLessEqual(result.trajectory.norm_drift, 1e-9)
        self.assertEqual(result.trajectory.times[-1], design.T)

    def test_frames_agree(self):
        design = RotationService.rabi_design(2, math.pi, 2.0)
        psi_i = StateVector.basis(QUBIT_LABELS, "0")
        rotating = RotationService.simulate_rotation(INVERSION_ANGLES, design, psi_i)
        interaction = RotationService.simulate_rotation(
            INVERSION_ANGLES, design, psi_i, frame="interaction"
        )
        np.testing.assert_allclose(
            rotating.trajectory.populations, interaction.trajectory.populations, atol=1e-8
        )

    def test_no_drive_leaves_state(self):
        psi_i = StateVector(QUBIT_LABELS, [0.6, 0.8j])
        config = RamanConfig(PulseEnvelope.gaussian(0.0, 0.0, 1.0), 5.0, -3.0, 3.0)
        result = RotationService.simulate_rotation(MixingAngles(0.2, 0.1), config, psi_i)
        np.testing.assert_array_equal(
            result.final_state.restricted(QUBIT_LABELS).amplitudes, psi_i.amplitudes
        )
        self.assertEqual(result.delta, 0.0)

    def test_uncoupled_state_is_invariant(self):
        rng = np.random.default_rng(23)
        pulse = PulseEnvelope.gaussian(1.5 - 0.5j, 0.0, 2.0)
        for phi, eta in rng.uniform(0.0, 2 * math.pi, size=(5, 2)):
            angles = MixingAngles(phi, eta)
            _, uncoupled = RotationService.coupled_uncoupled_basis(angles)
            h = RotationService.build_lambda_hamiltonian(angles, pulse, 0.7)
            psi0 = uncoupled.embedded(LAMBDA_LABELS)
            final = PropagationService.propagate(h, psi0, -10.0, 10.0, dt=1e-2).final_state
            self.assertGreaterEqual(StateService.fidelity(psi0, final), 1 - 1e-9)

    def test_random_rotations_including_global_phase(self):
        rng = np.random.default_rng(2005)
        for _ in range(20):
            angles = MixingAngles(rng.uniform(0.0, math.pi), rng.uniform(0.0, 2 * math.pi))
            delta = rng.uniform(0.2, 2 * math.pi - 0.2)
            design = RotationService.rabi_design(1, delta, rng.uniform(1.0, 3.0))
            result = RotationService.simulate_rotation(
                angles, design, random_qubit_state(rng), dt=2e-3
            )
            self.assertGreaterEqual(result.fidelity, 1 - 1e-6)
            self.assertLessEqual(abs(result.overlap - 1.0), 1e-6)

    def test_raman_limit_rectangular(self):
        angles = MixingAngles(math.pi / 3, 0.4)
        coupled, _ = RotationService.coupled_uncoupled_basis(angles)
        config = RamanConfig(PulseEnvelope.rectangular(1.0, 10.0, 20.0), 10.0, 0.0, 20.0)
        result = RotationService.simulate_rotation(angles, config, coupled)
        measured = RotationService.coupled_state_phase(result.final_state, angles)
        self.assertAlmostEqual(result.delta, -0.5, places=12)
        self.assertLessEqual(abs(measured - result.delta), 0.02 * abs(result.delta))
        self.assertEqual(result.flags, ())

    def test_raman_limit_gaussian(self):
        angles = MixingAngles(0.9, 2.0)
        coupled, _ = RotationService.coupled_uncoupled_basis(angles)
        config = RamanConfig(PulseEnvelope.gaussian(1.0, 0.0, 2.0), 20.0, -16.0, 16.0)
        result = RotationService.simulate_rotation(angles, config, coupled)
        measured = RotationService.coupled_state_phase(result.final_state, angles)
        self.assertLessEqual(abs(measured - result.delta), 0.02 * abs(result.delta))
        self.assertAlmostEqual(result.validity_ratio, 0.025, places=12)

    def test_rejects_three_level_initial_state(self):
        design = RotationService.rabi_design(1, 1.0, 1.0)
        with self.assertRaises(ValueError):
            RotationService.simulate_rotation(
                INVERSION_ANGLES, design, StateVector.basis(LAMBDA_LABELS, "0")
            )
