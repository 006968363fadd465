import logging
import math
from typing import Optional, Sequence

import numpy as np
from django.conf import settings
from scipy import linalg

from .exceptions import (
    DimensionMismatchError,
    LabelMismatchError,
    NonHermitianError,
    PropagationError,
)
from .models import Eigenpair, HamiltonianModel, StateVector, Trajectory

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-12
PHASE_TIE_TOLERANCE = 1e-12


class SpectralService:

    @staticmethod
    def check_hermitian(matrix: np.ndarray, tolerance: float = HERMITIAN_TOLERANCE):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"Expected a square matrix, got {matrix.shape}")
        scale = max(1.0, float(np.linalg.norm(matrix, 2))) if matrix.size else 1.0
        error = float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))
        if error > tolerance * scale:
            raise NonHermitianError(f"Matrix deviates from Hermitian by {error:.3e}")
        return matrix

    @staticmethod
    def fix_phase(vector: np.ndarray) -> np.ndarray:
        """Largest-magnitude component made real and positive (lowest index wins ties)."""
        magnitudes = np.abs(vector)
        pivot = int(np.flatnonzero(magnitudes >= magnitudes.max() - PHASE_TIE_TOLERANCE)[0])
        fixed = vector * (magnitudes[pivot] / vector[pivot])
        fixed[pivot] = magnitudes[pivot]
        return fixed

    @staticmethod
    def eigendecompose(
        matrix: np.ndarray, labels: Optional[Sequence[str]] = None
    ) -> list[Eigenpair]:
        matrix = SpectralService.check_hermitian(matrix)
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(len(matrix)))
        if len(labels) != len(matrix):
            raise DimensionMismatchError(f"{len(labels)} labels for a {len(matrix)}-dim matrix")

        values, vectors = linalg.eigh((matrix + matrix.conj().T) / 2)
        pairs = []
        for k, value in enumerate(values):
            vector = SpectralService.fix_phase(vectors[:, k])
            pairs.append(Eigenpair(float(value), StateVector(labels, vector, normalized=False)))
        return pairs


class StateService:

    @staticmethod
    def fidelity(a: StateVector, b: StateVector) -> float:
        if a.labels != b.labels:
            raise LabelMismatchError(f"Bases differ: {a.labels} vs {b.labels}")
        return float(min(1.0, abs(a.inner(b)) ** 2))


class PropagationService:

    @staticmethod
    def _checked(h: HamiltonianModel, t: float) -> np.ndarray:
        matrix = h.evaluate(t)
        if not np.isfinite(matrix).all():
            logger.error(f"Non-finite entries in {h.name or 'Hamiltonian'} at t={t!r}")
            raise PropagationError(f"Non-finite Hamiltonian entries at t={t!r} ns")
        return matrix

    @staticmethod
    def propagate(
        h: HamiltonianModel,
        psi0: StateVector,
        t_start: float,
        t_end: float,
        dt: Optional[float] = None,
    ) -> Trajectory:
        """Fixed-step fourth-order Runge-Kutta solution of i d|psi>/dt = H(t)|psi>.

        The window is split into ceil((t_end - t_start)/dt) equal steps so the
        last sample sits exactly on t_end.
        """
        dt = getattr(settings, "DEFAULT_DT", 1e-3) if dt is None else dt
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if t_end <= t_start:
            raise ValueError(f"t_end ({t_end}) must exceed t_start ({t_start})")
        if psi0.dimension != h.dimension:
            raise DimensionMismatchError(
                f"State has dimension {psi0.dimension}, Hamiltonian {h.dimension}"
            )
        if psi0.labels != h.labels:
            raise LabelMismatchError(f"State basis {psi0.labels} != {h.labels}")

        for t in (t_start, 0.5 * (t_start + t_end), t_end):
            SpectralService.check_hermitian(PropagationService._checked(h, t))

        n_steps = max(1, math.ceil((t_end - t_start) / dt - 1e-9))
        times = np.linspace(t_start, t_end, n_steps + 1)
        amplitudes = np.empty((n_steps + 1, h.dimension), dtype=complex)
        psi = psi0.amplitudes.copy()
        amplitudes[0] = psi

        h_now = PropagationService._checked(h, times[0])
        for k in range(n_steps):
            step = times[k + 1] - times[k]
            h_mid = PropagationService._checked(h, times[k] + 0.5 * step)
            h_next = PropagationService._checked(h, times[k + 1])

            k1 = -1j * (h_now @ psi)
            k2 = -1j * (h_mid @ (psi + 0.5 * step * k1))
            k3 = -1j * (h_mid @ (psi + 0.5 * step * k2))
            k4 = -1j * (h_next @ (psi + step * k3))
            psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

            amplitudes[k + 1] = psi
            h_now = h_next

        if not np.isfinite(amplitudes[-1]).all():
            raise PropagationError("Propagated state is not finite")

        norms = np.linalg.norm(amplitudes, axis=1)
        norm_drift = float(np.max(np.abs(norms - norms[0])))
        logger.debug(
            f"Propagated {h.name or 'Hamiltonian'} over [{t_start}, {t_end}] ns in "
            f"{n_steps} steps, norm drift {norm_drift:.2e}"
        )
        return Trajectory(h.labels, times, amplitudes, norm_drift)
