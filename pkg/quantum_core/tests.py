import math

import numpy as np
from django.test import SimpleTestCase

from .exceptions import (
    DimensionMismatchError,
    LabelMismatchError,
    NonHermitianError,
    NormalizationError,
    PropagationError,
)
from .models import HamiltonianModel, StateVector
from .services import PropagationService, SpectralService, StateService

QUBIT = ("0", "1")


def constant_model(matrix, labels):
    matrix = np.asarray(matrix, dtype=complex)
    return HamiltonianModel(labels, lambda t: matrix, name="constant")


class StateVectorTests(SimpleTestCase):

    def test_rejects_non_unit_norm(self):
        with self.assertRaises(NormalizationError):
            StateVector(QUBIT, [1.0, 1.0])

    def test_rejects_duplicate_labels(self):
        with self.assertRaises(ValueError):
            StateVector(("0", "0"), [1.0, 0.0])

    def test_rejects_length_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            StateVector(QUBIT, [1.0])

    def test_embedding_keeps_components(self):
        psi = StateVector(QUBIT, [0.6, 0.8j])
        wide = psi.embedded(("0", "1", "e"))
        self.assertEqual(wide.amplitude("1"), 0.8j)
        self.assertEqual(wide.population("e"), 0.0)


class FidelityTests(SimpleTestCase):

    def test_self_fidelity_is_one(self):
        psi = StateVector(QUBIT, [0.6, 0.8j])
        self.assertAlmostEqual(StateService.fidelity(psi, psi), 1.0, places=14)

    def test_orthogonal_kets(self):
        zero = StateVector.basis(QUBIT, "0")
        one = StateVector.basis(QUBIT, "1")
        self.assertEqual(StateService.fidelity(zero, one), 0.0)

    def test_half_overlap_and_symmetry(self):
        zero = StateVector.basis(QUBIT, "0")
        plus = StateVector(QUBIT, np.array([1.0, 1.0]) / math.sqrt(2))
        self.assertAlmostEqual(StateService.fidelity(zero, plus), 0.5, places=14)
        self.assertEqual(StateService.fidelity(zero, plus), StateService.fidelity(plus, zero))

    def test_label_mismatch(self):
        with self.assertRaises(LabelMismatchError):
            StateService.fidelity(
                StateVector.basis(QUBIT, "0"), StateVector.basis(("a", "b"), "a")
            )


class EigendecomposeTests(SimpleTestCase):

    def test_identity(self):
        pairs = SpectralService.eigendecompose(np.eye(3))
        for k, pair in enumerate(pairs):
            self.assertAlmostEqual(pair.value, 1.0, places=14)
            np.testing.assert_allclose(pair.vector.amplitudes, np.eye(3)[k], atol=1e-14)

    def test_pauli_x(self):
        pairs = SpectralService.eigendecompose(np.array([[0.0, 1.0], [1.0, 0.0]]))
        self.assertEqual([round(p.value, 12) for p in pairs], [-1.0, 1.0])
        # largest component (lowest index on ties) is real and positive
        for pair in pairs:
            self.assertGreater(pair.vector.amplitudes[0].real, 0.0)
            self.assertEqual(pair.vector.amplitudes[0].imag, 0.0)

    def test_random_hermitian_residuals_and_trace(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            m = (a + a.conj().T) / 2
            pairs = SpectralService.eigendecompose(m)
            norm = np.linalg.norm(m, 2)
            values = [p.value for p in pairs]
            self.assertEqual(values, sorted(values))
            self.assertAlmostEqual(sum(values), float(np.trace(m).real), delta=1e-10)
            vectors = np.array([p.vector.amplitudes for p in pairs]).T
            np.testing.assert_allclose(vectors.conj().T @ vectors, np.eye(5), atol=1e-10)
            for pair in pairs:
                v = pair.vector.amplitudes
                self.assertLessEqual(np.linalg.norm(m @ v - pair.value * v), 1e-10 * norm)

    def test_rejects_non_hermitian(self):
        with self.assertRaises(NonHermitianError):
            SpectralService.eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


class PropagateTests(SimpleTestCase):

    def test_null_generator_keeps_state(self):
        labels = ("a", "b", "c")
        psi0 = StateVector(labels, np.array([1.0, 1j, -1.0]) / math.sqrt(3))
        trajectory = PropagationService.propagate(
            constant_model(np.zeros((3, 3)), labels), psi0, 0.0, 1.0, dt=0.01
        )
        for row in trajectory.amplitudes:
            np.testing.assert_allclose(row, psi0.amplitudes, atol=0.0)

    def test_resonant_pi_pulse_inverts(self):
        omega = 2.0
        h = constant_model([[0.0, omega / 2], [omega / 2, 0.0]], QUBIT)
        trajectory = PropagationService.propagate(
            h, StateVector.basis(QUBIT, "0"), 0.0, math.pi / omega, dt=1e-3
        )
        self.assertLessEqual(abs(trajectory.final_state.population("1") - 1.0), 1e-8)
        self.assertEqual(trajectory.times[-1], math.pi / omega)
        self.assertLessEqual(trajectory.norm_drift, 1e-9)

    def test_step_halving(self):
        omega, delta = 1.3, 0.7
        h = HamiltonianModel(
            QUBIT,
            lambda t: np.array(
                [[0.0, omega * math.cos(t) / 2], [omega * math.cos(t) / 2, delta]],
                dtype=complex,
            ),
        )
        psi0 = StateVector.basis(QUBIT, "0")
        coarse = PropagationService.propagate(h, psi0, 0.0, 5.0, dt=1e-3)
        fine = PropagationService.propagate(h, psi0, 0.0, 5.0, dt=5e-4)
        np.testing.assert_allclose(
            coarse.populations[-1], fine.populations[-1], rtol=0.0, atol=1e-8
        )

    def test_linearity(self):
        labels = ("a", "b", "c")
        h = HamiltonianModel(
            labels,
            lambda t: np.array(
                [[0.0, 0.5 * math.exp(-t), 0.0], [0.5 * math.exp(-t), 0.3, 0.4j], [0.0, -0.4j, -0.2]],
                dtype=complex,
            ),
        )
        a = StateVector.basis(labels, "a")
        b = StateVector.basis(labels, "c")
        c0, c1 = 0.3 - 0.2j, 1.1j
        mixed = StateVector(labels, c0 * a.amplitudes + c1 * b.amplitudes, normalized=False)
        run = lambda psi: PropagationService.propagate(h, psi, 0.0, 2.0, dt=1e-3).final_state
        combined = c0 * run(a).amplitudes + c1 * run(b).amplitudes
        np.testing.assert_allclose(run(mixed).amplitudes, combined, atol=1e-9)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            PropagationService.propagate(
                constant_model(np.zeros((3, 3)), ("a", "b", "c")),
                StateVector.basis(QUBIT, "0"),
                0.0,
                1.0,
            )

    def test_non_finite_generator(self):
        h = HamiltonianModel(
            QUBIT,
            lambda t: np.full((2, 2), np.nan if t > 0.55 else 0.0, dtype=complex),
        )
        with self.assertRaises(PropagationError):
            PropagationService.propagate(h, StateVector.basis(QUBIT, "0"), 0.0, 1.0, dt=0.1)

    def test_rejects_bad_window(self):
        h = constant_model(np.zeros((2, 2)), QUBIT)
        psi0 = StateVector.basis(QUBIT, "0")
        with self.assertRaises(ValueError):
            PropagationService.propagate(h, psi0, 0.0, 1.0, dt=0.0)
        with self.assertRaises(ValueError):
            PropagationService.propagate(h, psi0, 1.0, 1.0)
