import numpy as np
from django.test import SimpleTestCase
from scipy import integrate

from .exceptions import BoundaryLeakageError, NoDoubleWellError
from .models import GridSpec, SquidParams
from .services import DeviceService


def lc_circuit(**overrides):
    return SquidParams.reference_device(I_c=0.0, **overrides)


class PotentialTests(SimpleTestCase):

    def test_parabola_minimum_without_junction(self):
        params = lc_circuit()
        self.assertEqual(DeviceService.potential(params, params.Phi_x), 0.0)

    def test_reference_device_is_a_double_well(self):
        params = SquidParams.reference_device()
        values = DeviceService.potential(params, np.linspace(-1.0, 0.0, 20001))
        minima, maxima = DeviceService.local_extrema(values)
        self.assertEqual(len(minima), 2)
        self.assertEqual(len(maxima), 1)
        self.assertTrue(minima[0] < maxima[0] < minima[1])
        self.assertAlmostEqual(params.beta_L, 1.2, delta=0.01)

    def test_profile_spans_default_window(self):
        params = SquidParams.reference_device()
        phi, values = DeviceService.potential_profile(params)
        self.assertEqual(len(phi), SquidParams.DEFAULT_POINTS)
        self.assertAlmostEqual(phi[0], params.Phi_x - SquidParams.DEFAULT_HALF_WIDTH, places=12)
        self.assertAlmostEqual(phi[-1], params.Phi_x + SquidParams.DEFAULT_HALF_WIDTH, places=12)
        np.testing.assert_array_equal(values, DeviceService.potential(params, phi))

    def test_reflection_symmetry_at_half_flux(self):
        params = SquidParams.reference_device(Phi_x=-0.5)
        for x in (0.01, 0.1, 0.17, 0.4):
            left = DeviceService.potential(params, -0.5 - x)
            right = DeviceService.potential(params, -0.5 + x)
            self.assertAlmostEqual(left, right, delta=1e-9 * abs(left))


class StationaryStateTests(SimpleTestCase):

    def test_lc_spectrum_matches_oscillator(self):
        params = lc_circuit()
        self.assertAlmostEqual(params.plasma_frequency, 500.0, places=6)
        spectrum = DeviceService.stationary_states(params, 6)
        for n, energy in enumerate(spectrum.energies):
            expected = 500.0 * (n + 0.5)
            self.assertLessEqual(abs(energy - expected), 1e-3 * expected)
        spacings = np.diff(spectrum.energies)
        np.testing.assert_allclose(spacings, 500.0, rtol=1e-3)

    def test_wavefunctions_orthonormal(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(), 5)
        psi = spectrum.wavefunctions
        gram = np.array(
            [[integrate.trapezoid(psi[i] * psi[j], spectrum.phi) for j in range(5)] for i in range(5)]
        )
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-8)

    def test_second_order_convergence(self):
        energies = []
        for n_points in (501, 1001, 2001):
            params = lc_circuit(grid=GridSpec(-1.251, 0.249, n_points))
            energies.append(DeviceService.stationary_states(params, 1).energies[0])
        coarse, medium, fine = energies
        self.assertLessEqual(coarse, medium + 1e-6)
        self.assertLessEqual(medium, fine + 1e-6)
        ratio = (medium - coarse) / (fine - medium)
        self.assertTrue(3.5 < ratio < 4.5, ratio)

    def test_two_lowest_states_in_distinct_wells(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(), 6)
        barrier = spectrum.barrier_phi
        mean0 = DeviceService.flux_matrix_element(spectrum, 0, 0)
        mean1 = DeviceService.flux_matrix_element(spectrum, 1, 1)
        self.assertLess((mean0 - barrier) * (mean1 - barrier), 0.0)
        self.assertEqual({spectrum.well_assignments[0], spectrum.well_assignments[1]}, {"left", "right"})

    def test_narrow_grid_leaks(self):
        params = lc_circuit(grid=GridSpec(-0.521, -0.481, 201))
        with self.assertRaises(BoundaryLeakageError):
            DeviceService.stationary_states(params, 1)


class ClassificationTests(SimpleTestCase):

    def test_reference_device_levels(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(), 6)
        levels = DeviceService.classify_levels(spectrum)
        self.assertEqual((levels.idx0, levels.idx1), (0, 1))
        self.assertGreater(spectrum.energies[levels.idxE], spectrum.barrier_top)
        self.assertFalse(levels.degenerate)
        frequencies = DeviceService.transition_frequencies(spectrum, levels)
        self.assertGreater(frequencies["0e"], frequencies["1e"])
        self.assertGreater(frequencies["1e"], 0.0)

    def test_symmetric_bias_reports_degenerate_wells(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(Phi_x=-0.5), 6)
        with self.assertLogs("squid_device.services", level="WARNING"):
            levels = DeviceService.classify_levels(spectrum)
        self.assertTrue(levels.degenerate)
        self.assertEqual((levels.idx0, levels.idx1), (0, 1))

    def test_single_well_rejected(self):
        params = SquidParams.reference_device(I_c=1.0)
        self.assertLess(params.beta_L, 1.0)
        spectrum = DeviceService.stationary_states(params, 4)
        with self.assertRaises(NoDoubleWellError):
            DeviceService.classify_levels(spectrum)


class FluxMatrixElementTests(SimpleTestCase):

    def test_parity_of_centered_oscillator(self):
        spectrum = DeviceService.stationary_states(lc_circuit(Phi_x=0.0), 2)
        self.assertAlmostEqual(DeviceService.flux_matrix_element(spectrum, 0, 0), 0.0, places=10)

    def test_lambda_couplings_exceed_qubit_coupling(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(), 6)
        levels = DeviceService.classify_levels(spectrum)
        qubit = abs(DeviceService.flux_matrix_element(spectrum, levels.idx0, levels.idx1))
        self.assertGreater(abs(DeviceService.flux_matrix_element(spectrum, levels.idx0, levels.idxE)), qubit)
        self.assertGreater(abs(DeviceService.flux_matrix_element(spectrum, levels.idx1, levels.idxE)), qubit)

    def test_symmetric_in_indices(self):
        spectrum = DeviceService.stationary_states(SquidParams.reference_device(), 4)
        for i in range(4):
            for j in range(4):
                self.assertAlmostEqual(
                    DeviceService.flux_matrix_element(spectrum, i, j),
                    DeviceService.flux_matrix_element(spectrum, j, i),
                    delta=1e-12,
                )
