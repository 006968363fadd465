import math

import numpy as np
from django.test import SimpleTestCase
from scipy.special import erf

from .exceptions import UnsupportedShapeError
from .models import PulseEnvelope
from .services import PulseService


def fractional_pulse_b(theta=math.pi / 4):
    omega_bar, tau_a, tau_b, tau_p = -2.0, 38.5, 25.0, 10.0
    return PulseEnvelope.scaled_sum(
        [
            (1.0, PulseEnvelope.gaussian(omega_bar, tau_b, tau_p)),
            (math.cos(theta), PulseEnvelope.gaussian(omega_bar, tau_a, tau_p)),
        ]
    )


class EvaluateTests(SimpleTestCase):

    def test_gaussian_peak(self):
        pulse = PulseEnvelope.gaussian(-2.0, 23.0, 6.5)
        self.assertEqual(pulse.evaluate(23.0), -2.0 + 0j)

    def test_rectangular_support(self):
        pulse = PulseEnvelope.rectangular(1.5, 2.0, 2.0)
        self.assertEqual(pulse.evaluate(3.5), 0j)
        self.assertEqual(pulse.evaluate(0.5), 0j)
        self.assertEqual(pulse.evaluate(1.0), 1.5 + 0j)
        self.assertEqual(pulse.evaluate(3.0), 1.5 + 0j)

    def test_composite_matches_closed_form(self):
        value = fractional_pulse_b().evaluate(38.5)
        expected = -2.0 * (math.exp(-1.8225) + math.cos(math.pi / 4))
        self.assertAlmostEqual(value.real, expected, places=12)
        self.assertAlmostEqual(value.imag, 0.0, places=15)

    def test_scaled_sum_is_sum_of_members(self):
        a = PulseEnvelope.gaussian(1.0 + 0.5j, 1.0, 2.0)
        b = PulseEnvelope.sech(-0.7, 3.0, 1.5)
        total = PulseEnvelope.scaled_sum([(2.0, a), (1j, b)])
        for t in np.linspace(-5.0, 10.0, 31):
            self.assertEqual(total.evaluate(t), 2.0 * a.evaluate(t) + 1j * b.evaluate(t))

    def test_vectorised_sampling(self):
        pulse = PulseEnvelope.gaussian(1.0, 0.0, 1.0)
        values = PulseService.sample(pulse, [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(values, [math.exp(-1), 1.0, math.exp(-1)], rtol=1e-15)

    def test_time_shift_covariance(self):
        pulse = PulseEnvelope.gaussian(0.75, 2.0, 1.5)
        shifted = pulse.shifted(0.5)
        for t in (0.25, 1.0, 2.5, 4.75):
            self.assertEqual(shifted.evaluate(t), pulse.evaluate(t - 0.5))

    def test_widened_keeps_center(self):
        pulse = fractional_pulse_b().widened(1.1)
        self.assertEqual(pulse.terms[0][1].width, 10.0 * 1.1)
        self.assertEqual(pulse.terms[1][1].center, 38.5)
        with self.assertRaises(ValueError):
            pulse.widened(0.0)

    def test_time_scaled_envelope(self):
        pulse = PulseEnvelope.sech(1.0 - 1.0j, 3.0, 1.5)
        stretched = pulse.time_scaled(2.0)
        for t in (-1.0, 0.5, 3.0, 7.25):
            self.assertEqual(stretched.evaluate(2.0 * t), pulse.evaluate(t))

    def test_sech_far_tail_is_finite(self):
        pulse = PulseEnvelope.sech(1.0, 0.0, 1.0)
        self.assertEqual(pulse.evaluate(2000.0), 0j)
        self.assertAlmostEqual(pulse.evaluate(0.0).real, 1.0, places=15)

    def test_invalid_widths(self):
        with self.assertRaises(ValueError):
            PulseEnvelope.gaussian(1.0, 0.0, 0.0)
        with self.assertRaises(ValueError):
            PulseEnvelope.rectangular(1.0, 0.0, -1.0)
        with self.assertRaises(ValueError):
            PulseEnvelope("triangle")


class DerivativeTests(SimpleTestCase):

    def test_gaussian_extremum(self):
        self.assertEqual(PulseEnvelope.gaussian(-2.0, 23.0, 6.5).derivative(23.0), 0j)

    def test_gaussian_closed_form(self):
        value = PulseEnvelope.gaussian(1.0, 0.0, 1.0).derivative(1.0)
        self.assertAlmostEqual(value.real, -2.0 * math.exp(-1.0), places=15)

    def test_matches_central_difference(self):
        h = 1e-4
        for pulse in (
            PulseEnvelope.gaussian(1.0 - 0.3j, 1.0, 2.0),
            PulseEnvelope.sech(2.0, -1.0, 0.8),
            fractional_pulse_b(),
        ):
            for t in (-2.3, 0.4, 3.7, 30.1):
                analytic = pulse.derivative(t)
                numeric = (pulse.evaluate(t + h) - pulse.evaluate(t - h)) / (2 * h)
                if abs(analytic) > 1e-6:
                    self.assertLessEqual(abs(analytic - numeric), 1e-6 * abs(analytic))

    def test_composite_is_sum_of_member_derivatives(self):
        pulse = fractional_pulse_b()
        t = 31.0
        expected = sum(c * p.derivative(t) for c, p in pulse.terms)
        self.assertEqual(pulse.derivative(t), expected)

    def test_rectangular_unsupported(self):
        with self.assertRaises(UnsupportedShapeError):
            PulseEnvelope.rectangular(1.0, 0.0, 1.0).derivative(0.0)
        composite = PulseEnvelope.scaled_sum([(1.0, PulseEnvelope.rectangular(1.0, 0.0, 1.0))])
        self.assertFalse(composite.is_differentiable)


class AbsSquareIntegralTests(SimpleTestCase):

    def test_rectangular_exact(self):
        pulse = PulseEnvelope.rectangular(1.5, 2.0, 4.0)
        self.assertEqual(PulseService.abs_square_integral(pulse, 0.0, 4.0), 2.25 * 4.0)
        self.assertEqual(PulseService.abs_square_integral(pulse, 1.0, 3.0), 2.25 * 2.0)

    def test_gaussian_full_support(self):
        pulse = PulseEnvelope.gaussian(-2.0, 0.0, 3.0)
        value = PulseService.abs_square_integral(pulse, -100.0, 100.0)
        expected = 4.0 * 3.0 * math.sqrt(math.pi / 2)
        self.assertLessEqual(abs(value - expected), 1e-10 * expected)

    def test_gaussian_window(self):
        tau, tau_p = 23.0, 6.5
        pulse = PulseEnvelope.gaussian(-2.0, tau, tau_p)
        value = PulseService.abs_square_integral(pulse, 0.0, 40.0)
        scale = math.sqrt(2) / tau_p
        expected = 4.0 * tau_p * math.sqrt(math.pi / 2) / 2 * (
            erf(scale * (40.0 - tau)) - erf(scale * (0.0 - tau))
        )
        self.assertLessEqual(abs(value - expected), 1e-8 * expected)

    def test_amplitude_scaling(self):
        pulse = PulseEnvelope.sech(0.8, 1.0, 2.0)
        base = PulseService.abs_square_integral(pulse, -10.0, 12.0)
        scaled = PulseService.abs_square_integral(pulse.scaled(2.0 - 1.0j), -10.0, 12.0)
        self.assertAlmostEqual(scaled / base, 5.0, places=9)

    def test_sech_full_support(self):
        pulse = PulseEnvelope.sech(1.0, 0.0, 2.0)
        self.assertAlmostEqual(PulseService.abs_square_integral(pulse, -200.0, 200.0), 4.0, places=9)

    def test_pulse_area_gaussian(self):
        pulse = PulseEnvelope.gaussian(-2.0, 0.0, 6.5)
        self.assertAlmostEqual(
            PulseService.pulse_area(pulse, -100.0, 100.0), 2.0 * 6.5 * math.sqrt(math.pi), places=8
        )

    def test_rejects_empty_window(self):
        with self.assertRaises(ValueError):
            PulseService.abs_square_integral(PulseEnvelope.gaussian(1.0, 0.0, 1.0), 1.0, 1.0)
