import cmath
import logging
import math
from typing import Optional, Union

import numpy as np

from pulses.models import PulseEnvelope
from pulses.services import PulseService
from quantum_core.exceptions import LabelMismatchError
from quantum_core.models import HamiltonianModel, StateVector
from quantum_core.services import PropagationService

from .exceptions import InfeasibleDesignError
from .models import (
    FRAME_CHOICES,
    LAMBDA_LABELS,
    QUBIT_LABELS,
    MixingAngles,
    RabiDesign,
    RamanConfig,
    RotationResult,
    RotationSpec,
    TransferMatrix,
)

logger = logging.getLogger(__name__)

# max|Omega| / (2|Delta|) above which adiabatic elimination of |e> is unreliable
RAMAN_VALIDITY_THRESHOLD = 0.2


class RotationService:

    @staticmethod
    def coupled_uncoupled_basis(angles: MixingAngles) -> tuple[StateVector, StateVector]:
        c, s = math.cos(angles.phi), math.sin(angles.phi)
        phase = cmath.exp(1j * angles.eta)
        coupled = StateVector(QUBIT_LABELS, [c, phase * s])
        uncoupled = StateVector(QUBIT_LABELS, [-s, phase * c])
        return coupled, uncoupled

    @staticmethod
    def build_lambda_hamiltonian(
        angles: MixingAngles,
        pulse: PulseEnvelope,
        Delta: float,
        frame: str = "rotating",
    ) -> HamiltonianModel:
        """Lambda system over (|0>, |1>, |e>) at two-photon resonance.

        The rotating frame keeps Delta on |e><e|; the interaction frame moves it
        into exp(-i Delta t) factors on the couplings. Both give the same
        lower-state amplitudes.
        """
        if frame not in FRAME_CHOICES:
            raise ValueError(f"Unknown frame {frame!r}; expected one of {FRAME_CHOICES}")
        weight_0 = 0.5 * math.cos(angles.phi)
        weight_1 = 0.5 * cmath.exp(1j * angles.eta) * math.sin(angles.phi)

        def generator(t: float) -> np.ndarray:
            omega = pulse.evaluate(t)
            if frame == "interaction":
                omega *= cmath.exp(-1j * Delta * t)
            matrix = np.zeros((3, 3), dtype=complex)
            matrix[0, 2] = weight_0 * omega
            matrix[1, 2] = weight_1 * omega
            matrix[2, 0] = np.conj(matrix[0, 2])
            matrix[2, 1] = np.conj(matrix[1, 2])
            if frame == "rotating":
                matrix[2, 2] = Delta
            return matrix

        return HamiltonianModel(LAMBDA_LABELS, generator, name=f"lambda[{frame}]")

    @staticmethod
    def rabi_transfer_matrix(Omega: float, Delta: float, T: float) -> TransferMatrix:
        if T < 0:
            raise ValueError(f"Pulse duration must be non-negative, got {T}")
        omega_tilde = math.hypot(Omega, Delta)
        if omega_tilde == 0.0:
            return TransferMatrix(1.0, 0.0)
        half = 0.5 * omega_tilde * T
        phase = cmath.exp(-0.5j * Delta * T)
        alpha = (math.cos(half) + 1j * (Delta / omega_tilde) * math.sin(half)) * phase
        beta = -1j * (Omega / omega_tilde) * math.sin(half) * phase
        return TransferMatrix(alpha, beta)

    @staticmethod
    def rabi_design(m: int, delta: float, Omega: float) -> RabiDesign:
        """Detuning and duration giving pulse area 2 pi m and rotation angle delta."""
        if int(m) != m or m < 1:
            raise ValueError(f"m must be a positive integer, got {m}")
        if Omega <= 0:
            raise ValueError(f"Omega must be positive, got {Omega}")
        m = int(m)
        ratio = delta / (m * math.pi) - 1.0
        if abs(ratio) >= 1.0:
            logger.warning(f"Infeasible Rabi design: delta={delta}, m={m}")
            raise InfeasibleDesignError(
                f"delta={delta} cannot be reached with m={m}; admissible interval is (0, {2 * m}*pi)"
            )
        omega_tilde = Omega / math.sqrt(1.0 - ratio**2)
        design = RabiDesign(
            Omega=Omega, Delta=ratio * omega_tilde, T=2 * math.pi * m / omega_tilde, m=m
        )
        logger.info(
            f"Rabi design m={m}, delta={delta:.6f}: Delta={design.Delta:.6f} rad/ns, T={design.T:.6f} ns"
        )
        return design

    @staticmethod
    def raman_validity_ratio(pulse: PulseEnvelope, Delta: float) -> float:
        return pulse.peak_magnitude() / (2.0 * abs(Delta))

    @staticmethod
    def raman_phase(pulse: PulseEnvelope, Delta: float, t_i: float, t_f: float) -> float:
        """delta = -(1/4 Delta) * integral of |Omega|^2 over [t_i, t_f]."""
        if Delta == 0:
            raise ValueError("Raman phase is undefined at zero detuning")
        ratio = RotationService.raman_validity_ratio(pulse, Delta)
        if ratio > RAMAN_VALIDITY_THRESHOLD:
            logger.warning(
                f"max|Omega|/(2|Delta|) = {ratio:.3f} exceeds {RAMAN_VALIDITY_THRESHOLD}; "
                "adiabatic elimination of |e> is questionable"
            )
        return -PulseService.abs_square_integral(pulse, t_i, t_f) / (4.0 * Delta)

    @staticmethod
    def rotation_operator(spec: RotationSpec) -> np.ndarray:
        """exp(-i delta/2) R_n(delta) on (|0>, |1>)."""
        nx, ny, nz = spec.axis
        n_sigma = np.array([[nz, nx - 1j * ny], [nx + 1j * ny, -nz]], dtype=complex)
        half = 0.5 * spec.delta
        rotation = math.cos(half) * np.eye(2) - 1j * math.sin(half) * n_sigma
        return cmath.exp(-1j * half) * rotation

    @staticmethod
    def transfer_unitary(tm: TransferMatrix, angles: MixingAngles) -> np.ndarray:
        """The (|NC>, |C>, |e>) transfer matrix written over (|0>, |1>, |e>)."""
        coupled, uncoupled = RotationService.coupled_uncoupled_basis(angles)
        change = np.zeros((3, 3), dtype=complex)
        change[:2, 0] = uncoupled.amplitudes
        change[:2, 1] = coupled.amplitudes
        change[2, 2] = 1.0
        block = np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, tm.alpha, -np.conj(tm.beta)],
                [0.0, tm.beta, np.conj(tm.alpha)],
            ],
            dtype=complex,
        )
        return change @ block @ change.conj().T

    @staticmethod
    def propagate_two_level(
        Omega: float, Delta: float, T: float, dt: Optional[float] = None
    ) -> TransferMatrix:
        """(alpha, beta) read off a numerical propagation of the {|C>, |e>} system."""
        if T < 0:
            raise ValueError(f"Pulse duration must be non-negative, got {T}")
        if T == 0:
            return TransferMatrix(1.0, 0.0)
        matrix = np.array([[0.0, 0.5 * Omega], [0.5 * Omega, Delta]], dtype=complex)
        h = HamiltonianModel(("C", "e"), lambda t: matrix, name="two-level")
        psi0 = StateVector.basis(("C", "e"), "C")
        final = PropagationService.propagate(h, psi0, 0.0, T, dt).final_state
        return TransferMatrix(*final.amplitudes)

    @staticmethod
    def coupled_state_phase(psi_final: StateVector, angles: MixingAngles) -> float:
        """delta such that the |C> component of psi_final is |.| exp(-i delta)."""
        lower = psi_final
        if psi_final.labels != QUBIT_LABELS:
            lower = psi_final.restricted(QUBIT_LABELS)
        coupled, _ = RotationService.coupled_uncoupled_basis(angles)
        overlap = coupled.inner(lower)
        if abs(overlap) < 1e-12:
            raise ValueError("State has no coupled-state component to read a phase from")
        return -cmath.phase(overlap)

    @staticmethod
    def simulate_rotation(
        angles: MixingAngles,
        design: Union[RabiDesign, RamanConfig],
        psi_i: StateVector,
        frame: str = "rotating",
        dt: Optional[float] = None,
    ) -> RotationResult:
        """Propagate the full Lambda system and compare with the ideal rotation."""
        if psi_i.labels != QUBIT_LABELS:
            raise LabelMismatchError(f"Initial state must be over {QUBIT_LABELS}, got {psi_i.labels}")

        flags = []
        validity_ratio = None
        if isinstance(design, RabiDesign):
            pulse, Delta = design.pulse(), design.Delta
            t_start, t_end = 0.0, design.T
            delta = design.delta
        else:
            pulse, Delta = design.pulse, design.Delta
            t_start, t_end = design.t_start, design.t_end
            delta = RotationService.raman_phase(pulse, Delta, t_start, t_end)
            validity_ratio = RotationService.raman_validity_ratio(pulse, Delta)
            if validity_ratio > RAMAN_VALIDITY_THRESHOLD:
                flags.append("raman_validity")

        h = RotationService.build_lambda_hamiltonian(angles, pulse, Delta, frame)
        trajectory = PropagationService.propagate(
            h, psi_i.embedded(LAMBDA_LABELS), t_start, t_end, dt
        )

        spec = RotationSpec.from_angles(angles, delta)
        target = StateVector(
            QUBIT_LABELS, RotationService.rotation_operator(spec) @ psi_i.amplitudes, normalized=False
        )
        final = trajectory.final_state
        overlap = target.inner(final.restricted(QUBIT_LABELS))
        excited = trajectory.population_of("e")

        logger.info(
            f"Rotation delta={delta:.6f} about n={spec.axis}: fidelity {abs(overlap) ** 2:.9f}, "
            f"P_e={excited[-1]:.2e}"
        )
        return RotationResult(
            angles=angles,
            spec=spec,
            frame=frame,
            trajectory=trajectory,
            target=target,
            overlap=overlap,
            fidelity=float(min(1.0, abs(overlap) ** 2)),
            excited_population=float(excited[-1]),
            max_excited_population=float(excited.max()),
            flags=tuple(flags),
            validity_ratio=validity_ratio,
        )
