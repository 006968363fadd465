import cmath
import math

import numpy as np
from django.test import SimpleTestCase

from pulses.exceptions import UnsupportedShapeError
from pulses.models import PulseEnvelope
from quantum_core.models import StateVector
from quantum_core.services import StateService
from single_qubit_rotation.models import RotationSpec
from single_qubit_rotation.services import RotationService

from .exceptions import DegenerateCouplingError
from .models import (
    CLOSED5_LABELS,
    TRANSFER_LABELS,
    VACUUM_LABELS,
    CavitySystemParams,
    full_labels,
    ket,
)
from .services import AdiabaticityService, CavityService, DarkStateService

STIRAP_PAIR = CavitySystemParams.gaussian_pair(-2.0, 3.0, 23.0, 17.0, 6.5, 0.0, 40.0)


def fractional_pair(theta=math.pi / 4, xi=0.0, **overrides):
    pulse_A, pulse_B = CavityService.fractional_stirap_pulses(-2.0, 38.5, 25.0, 10.0, theta, xi)
    return CavitySystemParams(
        g=3.0, pulse_A=pulse_A, pulse_B=pulse_B, t_start=0.0, t_end=60.0, **overrides
    )


def frozen(Omega_A, Omega_B, g, Delta_prime=0.0, n_max=2):
    """Params whose couplings equal (Omega_A, Omega_B) at t = 0."""
    return CavitySystemParams(
        g=g,
        pulse_A=PulseEnvelope.gaussian(Omega_A, 0.0, 1.0),
        pulse_B=PulseEnvelope.gaussian(Omega_B, 0.0, 1.0),
        t_start=-1.0,
        t_end=1.0,
        Delta_prime=Delta_prime,
        n_max=n_max,
    )


def random_couplings(rng):
    a = complex(*rng.normal(size=2))
    b = complex(*rng.normal(size=2))
    return a, b, rng.uniform(0.2, 4.0), rng.uniform(-2.0, 2.0)


def bright_values(Omega_A, Omega_B, g):
    """Non-zero eigenvalues of the closed subspace at zero detuning."""
    total = 2 * g**2 + abs(Omega_A) ** 2 + abs(Omega_B) ** 2
    inner = math.sqrt((abs(Omega_A) ** 2 - abs(Omega_B) ** 2) ** 2 + 4 * g**4)
    upper = 0.5 * math.sqrt((total + inner) / 2)
    lower = 0.5 * math.sqrt((total - inner) / 2)
    return sorted([-upper, -lower, lower, upper])


class ClosedHamiltonianTests(SimpleTestCase):

    def test_no_coupling_is_diagonal(self):
        matrix = CavityService.build_hamiltonian_closed5(frozen(0.0, 0.0, 0.0, 0.7), 0.0)
        np.testing.assert_array_equal(matrix, np.diag([0.0, 0.7, 0.0, 0.7, 0.0]))

    def test_hermitian_with_trace_two_delta_prime(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            a, b, g, dp = random_couplings(rng)
            matrix = CavityService.build_hamiltonian_closed5(frozen(a, b, g, dp), 0.0)
            self.assertLessEqual(np.max(np.abs(matrix - matrix.conj().T)), 1e-15)
            self.assertAlmostEqual(np.trace(matrix).real, 2 * dp, places=14)

    def test_equal_couplings_spectrum_is_symmetric(self):
        report = AdiabaticityService.analytic_eigensystem(1.3, 1.3, 1.3, 0.0)
        values = np.sort(report.values)
        np.testing.assert_allclose(values, -values[::-1], atol=1e-12)
        self.assertLessEqual(np.min(np.abs(values)), 1e-12)


class FullHamiltonianTests(SimpleTestCase):

    def test_closed_subspace_has_no_outside_couplings(self):
        labels = full_labels(2)
        matrix = CavityService.build_hamiltonian_full(frozen(0.8 - 0.3j, -1.1 + 0.2j, 2.5, 0.4), 0.0)
        inside = [labels.index(label) for label in CLOSED5_LABELS]
        outside = [i for i in range(len(labels)) if i not in inside]
        self.assertEqual(np.count_nonzero(matrix[np.ix_(outside, inside)]), 0)

    def test_restriction_matches_closed_form(self):
        rng = np.random.default_rng(13)
        labels = full_labels(3)
        inside = [labels.index(label) for label in CLOSED5_LABELS]
        for _ in range(10):
            params = frozen(*random_couplings(rng), n_max=3)
            full = CavityService.build_hamiltonian_full(params, 0.0)
            closed = CavityService.build_hamiltonian_closed5(params, 0.0)
            np.testing.assert_allclose(full[np.ix_(inside, inside)], closed, atol=1e-15)

    def test_uncoupled_diagonal(self):
        labels = full_labels(2)
        matrix = CavityService.build_hamiltonian_full(frozen(0.0, 0.0, 0.0, 0.6), 0.0)
        expected = [0.6 * label.count("e'") for label in labels]
        np.testing.assert_array_equal(matrix, np.diag(expected))

    def test_rejects_empty_cavity_cutoff(self):
        with self.assertRaises(ValueError):
            CavityService.build_hamiltonian_full(STIRAP_PAIR, 0.0, n_max=0)


class DarkStateTests(SimpleTestCase):

    def test_limits(self):
        early = DarkStateService.dark_states(1e-6, 1.0, 2.0).psi_I
        late = DarkStateService.dark_states(1.0, 1e-6, 2.0).psi_I
        self.assertGreaterEqual(early.population(ket("0", "1", 0)), 1 - 1e-10)
        self.assertGreaterEqual(late.population(ket("1", "0", 0)), 1 - 1e-10)

    def test_states_are_annihilated(self):
        rng = np.random.default_rng(42)
        labels = full_labels(2)
        for _ in range(100):
            a, b, g, dp = random_couplings(rng)
            pair = DarkStateService.dark_states(a, b, g)
            params = frozen(a, b, g, dp)
            closed = CavityService.build_hamiltonian_closed5(params, 0.0)
            full = CavityService.build_hamiltonian_full(params, 0.0)
            self.assertLessEqual(
                np.linalg.norm(closed @ pair.psi_I.amplitudes), 1e-12 * np.linalg.norm(closed, 2)
            )
            for state in (pair.psi_I, pair.psi_II):
                vector = state.embedded(labels).amplitudes
                self.assertLessEqual(np.linalg.norm(full @ vector), 1e-12 * np.linalg.norm(full, 2))

    def test_pair_is_orthogonal(self):
        pair = DarkStateService.dark_states(-2.0, 0.5j, 3.0)
        self.assertEqual(pair.psi_II.inner(pair.psi_I.embedded(TRANSFER_LABELS)), 0)

    def test_degenerate_couplings(self):
        with self.assertRaises(DegenerateCouplingError):
            DarkStateService.dark_states(0.0, 0.0, 1.0)
        with self.assertRaises(DegenerateCouplingError):
            DarkStateService.dark_states(1.0, 0.0, 0.0)

    def test_derivative_matches_finite_difference(self):
        h = 1e-5
        for t in (12.0, 20.0, 26.5):
            analytic = DarkStateService.dark_state_derivative(STIRAP_PAIR, t)
            forward = DarkStateService.dark_components(*STIRAP_PAIR.couplings(t + h), STIRAP_PAIR.g)
            backward = DarkStateService.dark_components(*STIRAP_PAIR.couplings(t - h), STIRAP_PAIR.g)
            np.testing.assert_allclose(analytic, (forward - backward) / (2 * h), atol=1e-8)


class EigenSystemTests(SimpleTestCase):

    def test_cavity_chain_without_drives(self):
        report = AdiabaticityService.analytic_eigensystem(0.0, 0.0, 2.0, 0.0)
        expected = [-2 / math.sqrt(2), 0.0, 0.0, 0.0, 2 / math.sqrt(2)]
        np.testing.assert_allclose(report.values, expected, atol=1e-12)

    def test_numerical_pairs(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            a, b, g, dp = random_couplings(rng)
            report = AdiabaticityService.analytic_eigensystem(a, b, g, dp)
            matrix = CavityService.build_hamiltonian_closed5(frozen(a, b, g, dp), 0.0)
            scale = np.linalg.norm(matrix, 2)
            for value, vector in zip(report.values, report.vectors):
                residual = matrix @ vector.amplitudes - value * vector.amplitudes
                self.assertLessEqual(np.linalg.norm(residual), 1e-10 * scale)
            bright = [report.values[k] for k in report.bright_indices]
            self.assertAlmostEqual(sum(bright), 2 * dp, delta=1e-10)
            zero_mode = report.vectors[report.zero_mode_index]
            dark = DarkStateService.dark_states(a, b, g).psi_I
            self.assertLessEqual(abs(report.values[report.zero_mode_index]), 1e-10 * scale)
            self.assertGreaterEqual(StateService.fidelity(zero_mode, dark), 1 - 1e-10)

    def test_bright_values_match_corrected_closed_form(self):
        for a, b, g in ((1.0, 0.5, 3.0), (-2.0, 0.3j, 1.5), (0.7, 0.7, 2.0)):
            report = AdiabaticityService.analytic_eigensystem(a, b, g, 0.0)
            bright = sorted(report.values[k] for k in report.bright_indices)
            np.testing.assert_allclose(bright, bright_values(a, b, g), atol=1e-10)

    def test_closed_forms_are_flagged(self):
        with self.assertLogs("two_qubit_cavity.services", level="WARNING"):
            report = AdiabaticityService.analytic_eigensystem(1.0, 0.5, 3.0, 0.0)
        self.assertFalse(report.consistent)
        self.assertGreater(report.value_discrepancy, 1e-3)
        self.assertEqual(len(report.analytic_residuals), 4)

    def test_spectrum_symmetric_under_relabeling(self):
        forward = AdiabaticityService.analytic_eigensystem(1.2, -1.2j, 2.0, 0.3)
        swapped = AdiabaticityService.analytic_eigensystem(-1.2j, 1.2, 2.0, 0.3)
        np.testing.assert_allclose(forward.values, swapped.values, atol=1e-12)
        np.testing.assert_allclose(
            sorted(forward.analytic_values), sorted(swapped.analytic_values), atol=1e-12
        )


class AdiabaticityTests(SimpleTestCase):

    def test_static_point_has_zero_metric(self):
        params = CavitySystemParams.gaussian_pair(-2.0, 3.0, 20.0, 20.0, 6.5, 0.0, 40.0)
        self.assertEqual(AdiabaticityService.adiabaticity_metric(params, 20.0), 0.0)

    def test_time_rescaling(self):
        stretched = CavitySystemParams(
            g=STIRAP_PAIR.g,
            pulse_A=STIRAP_PAIR.pulse_A.time_scaled(2.0),
            pulse_B=STIRAP_PAIR.pulse_B.time_scaled(2.0),
            t_start=0.0,
            t_end=80.0,
        )
        for t in (10.0, 17.0, 20.0, 23.0, 30.0):
            original = AdiabaticityService.adiabaticity_metric(STIRAP_PAIR, t)
            rescaled = AdiabaticityService.adiabaticity_metric(stretched, 2.0 * t)
            self.assertLessEqual(abs(rescaled - 0.5 * original), 1e-6 * original)

    def test_pulse_crossing_is_adiabatic(self):
        metric = AdiabaticityService.adiabaticity_metric(STIRAP_PAIR, 20.0)
        self.assertGreater(metric, 0.0)
        self.assertLess(metric, 0.5)
        profile = AdiabaticityService.adiabaticity_profile(STIRAP_PAIR, np.linspace(0.0, 40.0, 81))
        self.assertEqual(profile.shape, (81,))
        self.assertTrue(np.all(profile >= 0.0))

    def test_vanishing_bright_eigenvalue_is_reported(self):
        # drives are below 1e-17 this far ahead of the pulses
        params = CavitySystemParams.gaussian_pair(-2.0, 3.0, 23.0, 17.0, 6.5, -40.0, 40.0)
        metric, mode = AdiabaticityService.adiabaticity_terms(params, -25.0)
        self.assertEqual(metric, math.inf)
        self.assertIsNotNone(mode)
        with self.assertLogs("two_qubit_cavity.services", level="WARNING") as logs:
            self.assertEqual(AdiabaticityService.adiabaticity_metric(params, -25.0), math.inf)
        self.assertIn(f"Bright mode {mode}", logs.output[0])

    def test_rectangular_pulses_have_no_metric(self):
        params = CavitySystemParams(
            g=1.0,
            pulse_A=PulseEnvelope.rectangular(1.0, 5.0, 4.0),
            pulse_B=PulseEnvelope.rectangular(1.0, 3.0, 4.0),
            t_start=0.0,
            t_end=8.0,
        )
        with self.assertRaises(UnsupportedShapeError):
            AdiabaticityService.adiabaticity_metric(params, 4.0)


class TransferTests(SimpleTestCase):

    def test_transfer_to_second_squid(self):
        result = CavityService.run_transfer(STIRAP_PAIR, 1.0, 0.0)
        self.assertGreaterEqual(result.final_populations[ket("1", "0", 0)], 0.95)
        self.assertGreaterEqual(result.fidelity_target, 0.95)
        self.assertLess(result.excited_peak_population, 0.1)
        self.assertLessEqual(result.trajectory.norm_drift, 1e-9)
        self.assertEqual(result.flags, ())
        start_ratio, end_ratio = result.pulse_order
        self.assertAlmostEqual(start_ratio, math.exp(240 / 42.25), delta=1e-6 * start_ratio)
        self.assertAlmostEqual(end_ratio, math.exp(240 / 42.25), delta=1e-6 * end_ratio)
        self.assertGreater(result.dark_overlap[0], 0.999)

    def test_transfer_duration_and_adiabaticity(self):
        result = CavityService.run_transfer(STIRAP_PAIR, 1.0, 0.0, dt=5e-3)
        duration = result.rise_time(ket("1", "0", 0))
        self.assertGreaterEqual(duration, 10.0)
        self.assertLessEqual(duration, 30.0)
        self.assertAlmostEqual(duration, 10.04, delta=0.05)
        self.assertAlmostEqual(result.adiabaticity_max, 0.906, delta=0.005)
        self.assertAlmostEqual(result.cavity_peak_population, 0.128, delta=0.005)
        self.assertIsNone(result.rise_time(ket("1", "1", 1)))

    def test_dark_state_annihilated_along_run(self):
        for t in np.linspace(0.0, 40.0, 41):
            a, b = STIRAP_PAIR.couplings(t)
            matrix = CavityService.build_hamiltonian_closed5(STIRAP_PAIR, t)
            psi = DarkStateService.dark_states(a, b, STIRAP_PAIR.g).psi_I
            self.assertLessEqual(
                np.linalg.norm(matrix @ psi.amplitudes), 1e-12 * np.linalg.norm(matrix, 2)
            )

    def test_static_dark_state_is_kept(self):
        result = CavityService.run_transfer(STIRAP_PAIR, 0.0, 1.0, dt=1e-2)
        np.testing.assert_array_equal(
            result.trajectory.population_of(ket("1", "1", 0)), np.ones(len(result.trajectory.times))
        )
        self.assertEqual(result.fidelity_target, 1.0)

    def test_superposition_keeps_relative_phase(self):
        c = 1 / math.sqrt(2)
        result = CavityService.run_transfer(STIRAP_PAIR, c, c)
        self.assertGreaterEqual(result.fidelity_target, 0.95)
        self.assertGreater(result.overlap.real, 0.95)

    def test_full_space_agrees_with_closed_subspace(self):
        closed = CavityService.run_transfer(STIRAP_PAIR, 1.0, 0.0, dt=5e-3)
        full_params = CavitySystemParams.gaussian_pair(
            -2.0, 3.0, 23.0, 17.0, 6.5, 0.0, 40.0, space="full", n_max=2
        )
        full = CavityService.run_transfer(full_params, 1.0, 0.0, dt=5e-3)
        self.assertLessEqual(full.trajectory.norm_drift, 1e-9)
        for label in TRANSFER_LABELS:
            self.assertAlmostEqual(
                full.final_populations[label], closed.final_populations[label], delta=1e-8
            )
        outside = [
            i for i, label in enumerate(full.trajectory.labels) if label not in TRANSFER_LABELS
        ]
        self.assertLessEqual(full.trajectory.populations[:, outside].sum(axis=1).max(), 1e-10)

    def test_intuitive_order_is_flagged(self):
        swapped = CavitySystemParams.gaussian_pair(-2.0, 3.0, 17.0, 23.0, 6.5, 0.0, 40.0)
        with self.assertLogs("two_qubit_cavity.services", level="WARNING"):
            result = CavityService.run_transfer(swapped, 1.0, 0.0, dt=1e-2)
        self.assertIn("pulse_order", result.flags)

    def test_rejects_unnormalized_amplitudes(self):
        with self.assertRaises(ValueError):
            CavityService.run_transfer(STIRAP_PAIR, 1.0, 1.0)

    def test_robust_to_ten_percent_changes(self):
        points = CavityService.robustness_scan(STIRAP_PAIR, 0.1, dt=5e-3)
        self.assertEqual(len(points), 7)
        baseline = points[0].transfer_population
        for point in points[1:]:
            self.assertLessEqual(abs(point.transfer_population - baseline), 0.05, point)

    def test_stronger_cavity_coupling_suppresses_photons(self):
        weak = CavityService.cavity_peak_population(STIRAP_PAIR, dt=5e-3)
        strong = CavityService.cavity_peak_population(
            CavitySystemParams.gaussian_pair(-2.0, 6.0, 23.0, 17.0, 6.5, 0.0, 40.0), dt=5e-3
        )
        self.assertLess(strong, weak)


class FractionalStirapTests(SimpleTestCase):

    def test_pulses_switch_off_with_target_ratio(self):
        theta, xi = math.pi / 6, 0.7
        pulse_A, pulse_B = CavityService.fractional_stirap_pulses(-2.0, 38.5, 25.0, 10.0, theta, xi)
        for t in (10.0, 30.0, 45.0):
            gauss_A = math.exp(-((t - 38.5) ** 2) / 100.0)
            gauss_B = math.exp(-((t - 25.0) ** 2) / 100.0)
            self.assertAlmostEqual(pulse_A.evaluate(t), -2.0 * math.cos(theta) * gauss_A, places=14)
            self.assertAlmostEqual(
                pulse_B.evaluate(t),
                -2.0 * (gauss_B + math.sin(theta) * cmath.exp(1j * xi) * gauss_A),
                places=14,
            )

    def test_generic_angle_and_phase(self):
        for theta, xi in ((math.pi / 6, 0.7), (math.pi / 3, -1.0)):
            result = CavityService.run_fractional_stirap(fractional_pair(theta, xi), theta, xi, dt=2e-3)
            self.assertGreaterEqual(result.fidelity_target, 0.99, (theta, xi))
            self.assertNotIn("late_ratio", result.flags)
            post_selected = CavityService.post_select_vacuum(result.final_state)
            self.assertGreaterEqual(
                StateService.fidelity(post_selected, CavityService.entangled_target(theta, xi)), 0.99
            )
            self.assertAlmostEqual(result.concurrence, abs(math.sin(2 * theta)), delta=0.05)

    def test_quarter_pi_entangles(self):
        result = CavityService.run_fractional_stirap(fractional_pair(), math.pi / 4, 0.0, dt=2e-3)
        self.assertGreaterEqual(result.fidelity_target, 0.95)
        self.assertGreaterEqual(result.concurrence, 0.9)
        self.assertEqual(result.flags, ())

    def test_zero_angle_is_full_transfer(self):
        result = CavityService.run_fractional_stirap(fractional_pair(theta=0.0), 0.0, 0.0, dt=2e-3)
        self.assertGreaterEqual(result.fidelity_target, 0.99)
        self.assertGreaterEqual(result.final_populations[ket("1", "0", 0)], 0.99)

    def test_right_angle_leaves_initial_state(self):
        result = CavityService.run_fractional_stirap(fractional_pair(theta=math.pi / 2), math.pi / 2, 0.0, dt=2e-3)
        self.assertGreaterEqual(result.fidelity_target, 0.99)
        self.assertGreaterEqual(result.final_populations[ket("0", "1", 0)], 0.99)

    def test_late_ratio_mismatch_is_flagged(self):
        with self.assertLogs("two_qubit_cavity.services", level="WARNING"):
            result = CavityService.run_fractional_stirap(fractional_pair(), 0.0, 0.0, dt=1e-2)
        self.assertIn("late_ratio", result.flags)


class EntangledTargetTests(SimpleTestCase):

    def test_flipped_target_at_zero_angle(self):
        target = CavityService.flipped_entangled_target(0.0, 1.0)
        np.testing.assert_array_equal(target.amplitudes, [1.0, 0.0, 0.0, 0.0])

    def test_flipped_bell_state(self):
        target = CavityService.flipped_entangled_target(math.pi / 4, 0.0)
        self.assertAlmostEqual(CavityService.concurrence(target), 1.0, places=14)

    def test_inverting_qubit_a_gives_flipped_target(self):
        flip = RotationService.rotation_operator(RotationSpec((-1.0, 0.0, 0.0), math.pi))
        for theta, xi in ((0.3, 0.0), (math.pi / 4, 1.2), (1.1, -2.5)):
            flipped = CavityService.apply_to_qubit_a(flip, CavityService.entangled_target(theta, xi))
            np.testing.assert_allclose(
                flipped.amplitudes,
                CavityService.flipped_entangled_target(theta, xi).amplitudes,
                atol=1e-12,
            )


class ConcurrenceTests(SimpleTestCase):

    def test_product_state(self):
        self.assertEqual(CavityService.concurrence(StateVector.basis(VACUUM_LABELS, ket("0", "1", 0))), 0.0)

    def test_bell_state(self):
        state = StateVector(VACUUM_LABELS, [0.0, 2**-0.5, 2**-0.5, 0.0])
        self.assertAlmostEqual(CavityService.concurrence(state), 1.0, places=15)

    def test_closed_form(self):
        for theta in np.linspace(0.0, math.pi, 9):
            state = CavityService.entangled_target(theta, 0.0)
            self.assertAlmostEqual(
                CavityService.concurrence(state), abs(math.sin(2 * theta)), places=14
            )

    def test_post_selection_from_transfer_basis(self):
        state = StateVector.from_components(
            TRANSFER_LABELS, {ket("0", "1", 0): 0.6, ket("1", "1", 1): 0.8}
        )
        self.assertEqual(CavityService.concurrence(state), 0.0)
        with self.assertRaises(ValueError):
            CavityService.concurrence(StateVector.basis(TRANSFER_LABELS, ket("1", "1", 1)))
