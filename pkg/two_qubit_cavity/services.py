import cmath
import logging
import math
from dataclasses import replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from pulses.models import PulseEnvelope
from quantum_core.models import HamiltonianModel, StateVector, Trajectory
from quantum_core.services import PropagationService, SpectralService

from .exceptions import DegenerateCouplingError
from .models import (
    CLOSED5_LABELS,
    STATIC_DARK_LABEL,
    TRANSFER_LABELS,
    VACUUM_LABELS,
    CavitySystemParams,
    DarkStatePair,
    EigenSystemReport,
    RobustnessPoint,
    TransferResult,
    ket,
)

logger = logging.getLogger(__name__)

PULSE_ORDER_THRESHOLD = 10.0
LATE_RATIO_TOLERANCE = 0.01
ANALYTIC_RESIDUAL_TOLERANCE = 1e-8
ZERO_EIGENVALUE_TOLERANCE = 1e-12
AMPLITUDE_TOLERANCE = 1e-12
ADIABATICITY_SAMPLES = 401

INITIAL_LABEL = ket("0", "1", 0)
TRANSFERRED_LABEL = ket("1", "0", 0)
CAVITY_LABEL = ket("1", "1", 1)


def _closed5_matrix(Omega_A: complex, Omega_B: complex, g: float, Delta_prime: float) -> np.ndarray:
    matrix = np.zeros((5, 5), dtype=complex)
    matrix[0, 1] = Omega_A
    matrix[1, 0] = np.conj(Omega_A)
    matrix[1, 1] = matrix[3, 3] = 2.0 * Delta_prime
    matrix[1, 2] = matrix[2, 1] = g
    matrix[2, 3] = matrix[3, 2] = g
    matrix[3, 4] = np.conj(Omega_B)
    matrix[4, 3] = Omega_B
    return 0.5 * matrix


@lru_cache(maxsize=None)
def _full_operators(n_max: int) -> dict[str, np.ndarray]:
    """Static pieces of the two-SQUID + cavity Hamiltonian, levels ordered (0, 1, e')."""
    qutrit = np.eye(3)
    cavity = np.eye(n_max + 1)
    lower_0 = np.zeros((3, 3))
    lower_0[0, 2] = 1.0  # |0><e'|
    lower_1 = np.zeros((3, 3))
    lower_1[1, 2] = 1.0  # |1><e'|
    excited = np.diag([0.0, 0.0, 1.0])
    create = np.diag(np.sqrt(np.arange(1, n_max + 1)), -1)

    def on_a(op, cavity_op=cavity):
        return np.kron(np.kron(op, qutrit), cavity_op)

    def on_b(op, cavity_op=cavity):
        return np.kron(np.kron(qutrit, op), cavity_op)

    return {
        "excited": on_a(excited) + on_b(excited),
        "drive_A": on_a(lower_0),
        "drive_B": on_b(lower_0),
        "cavity": on_a(lower_1, create) + on_b(lower_1, create),
    }


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0.0:
        return math.inf if numerator > 0 else math.nan
    return numerator / denominator


class DarkStateService:

    @staticmethod
    def dark_components(Omega_A, Omega_B, g: float) -> np.ndarray:
        """Normalized |psi^I> amplitudes over the closed subspace; one column per coupling sample."""
        a = np.asarray(Omega_A, dtype=complex)
        b = np.asarray(Omega_B, dtype=complex)
        zero = np.zeros_like(a)
        unnormalized = np.array(
            [np.conj(b) * g, zero, -np.conj(a) * np.conj(b), zero, np.conj(a) * g]
        )
        weight = (np.abs(a) ** 2 + np.abs(b) ** 2) * g**2 + np.abs(a) ** 2 * np.abs(b) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            return unnormalized / np.sqrt(weight)

    @staticmethod
    def dark_states(Omega_A: complex, Omega_B: complex, g: float) -> DarkStatePair:
        """The two zero-energy states of the cavity system.

        psi^I is proportional to conj(Omega_B) g |0,1,0> - conj(Omega_A Omega_B) |1,1,1>
        + conj(Omega_A) g |1,0,0>; psi^II is |1,1,0> and never moves.
        """
        weight = (abs(Omega_A) ** 2 + abs(Omega_B) ** 2) * g**2 + abs(Omega_A) ** 2 * abs(Omega_B) ** 2
        if weight == 0.0:
            raise DegenerateCouplingError(
                f"Dark state undefined for Omega_A={Omega_A}, Omega_B={Omega_B}, g={g}"
            )
        psi_I = StateVector(CLOSED5_LABELS, DarkStateService.dark_components(Omega_A, Omega_B, g))
        psi_II = StateVector.basis(TRANSFER_LABELS, STATIC_DARK_LABEL)
        return DarkStatePair(psi_I=psi_I, psi_II=psi_II)

    @staticmethod
    def dark_state_derivative(params: CavitySystemParams, t: float) -> np.ndarray:
        """d|psi^I>/dt from the envelope derivatives (product rule through the normalization)."""
        a, b = params.couplings(t)
        da, db = params.pulse_A.derivative(t), params.pulse_B.derivative(t)
        g = params.g
        ca, cb, cda, cdb = a.conjugate(), b.conjugate(), da.conjugate(), db.conjugate()

        unnormalized = np.array([cb * g, 0.0, -ca * cb, 0.0, ca * g], dtype=complex)
        rate = np.array([cdb * g, 0.0, -(cda * cb + ca * cdb), 0.0, cda * g], dtype=complex)

        weight = (abs(a) ** 2 + abs(b) ** 2) * g**2 + abs(a) ** 2 * abs(b) ** 2
        if weight == 0.0:
            raise DegenerateCouplingError(f"Dark state undefined at t={t}")
        weight_rate = 2.0 * (ca * da).real * (g**2 + abs(b) ** 2) + 2.0 * (cb * db).real * (
            g**2 + abs(a) ** 2
        )
        norm = weight**-0.5
        norm_rate = -0.5 * weight**-1.5 * weight_rate
        return norm_rate * unnormalized + norm * rate


class AdiabaticityService:

    @staticmethod
    def _zero_mode(pairs, Omega_A, Omega_B, g) -> int:
        try:
            dark = DarkStateService.dark_states(Omega_A, Omega_B, g).psi_I
        except DegenerateCouplingError:
            values = np.array([pair.value for pair in pairs])
            return int(np.argmin(np.abs(values)))
        overlaps = [abs(np.vdot(pair.vector.amplitudes, dark.amplitudes)) for pair in pairs]
        return int(np.argmax(overlaps))

    @staticmethod
    def _closed_form_eigenvalues(Omega_A, Omega_B, g, Delta) -> list[float]:
        omega_sq = 2 * g**2 + abs(Omega_A) ** 2 + abs(Omega_B) ** 2
        inner = math.sqrt((abs(Omega_A) ** 2 - abs(Omega_B) ** 2) ** 2 + 4 * g**4)
        values = []
        for outer_sign in (1.0, -1.0):
            for inner_sign in (1.0, -1.0):
                radicand = 4 * Delta**2 + 2 * omega_sq + inner_sign * 2 * inner
                values.append(0.5 * Delta + outer_sign * 0.5 * math.sqrt(max(radicand, 0.0)))
        return values

    @staticmethod
    def _closed_form_eigenvector(Omega_A, Omega_B, g, Delta, epsilon) -> Optional[np.ndarray]:
        shift = 4 * epsilon * (Delta - epsilon)
        vector = np.array(
            [
                g**2 * Omega_A,
                2 * g**2 * epsilon,
                -g * (abs(Omega_A) ** 2 + shift),
                -2 * epsilon * (g**2 + abs(Omega_A) ** 2 + shift),
                -Omega_B * (g**2 + abs(Omega_A) ** 2 + shift),
            ],
            dtype=complex,
        )
        norm = np.linalg.norm(vector)
        return None if norm == 0.0 else vector / norm

    @staticmethod
    def analytic_eigensystem(
        Omega_A: complex, Omega_B: complex, g: float, Delta_prime: float = 0.0
    ) -> EigenSystemReport:
        """Closed-subspace eigensystem, cross-checked against the closed forms.

        The closed forms are evaluated literally, with Delta read as Delta'.
        Direct diagonalization is what gets returned; when the closed forms
        leave residuals above 1e-8 the report is marked inconsistent.
        """
        matrix = _closed5_matrix(Omega_A, Omega_B, g, Delta_prime)
        pairs = SpectralService.eigendecompose(matrix, CLOSED5_LABELS)
        values = np.array([pair.value for pair in pairs])
        zero_index = AdiabaticityService._zero_mode(pairs, Omega_A, Omega_B, g)

        analytic_values = AdiabaticityService._closed_form_eigenvalues(Omega_A, Omega_B, g, Delta_prime)
        residuals = []
        for epsilon in analytic_values:
            vector = AdiabaticityService._closed_form_eigenvector(
                Omega_A, Omega_B, g, Delta_prime, epsilon
            )
            if vector is None:
                residuals.append(math.inf)
            else:
                residuals.append(float(np.linalg.norm(matrix @ vector - epsilon * vector)))

        bright = np.sort(np.delete(values, zero_index))
        discrepancy = float(np.max(np.abs(bright - np.sort(analytic_values))))
        consistent = max(residuals) <= ANALYTIC_RESIDUAL_TOLERANCE and (
            discrepancy <= ANALYTIC_RESIDUAL_TOLERANCE
        )
        if not consistent:
            logger.warning(
                f"Closed-form eigensystem disagrees with diagonalization at Omega_A={Omega_A}, "
                f"Omega_B={Omega_B}, g={g}, Delta'={Delta_prime}: max residual {max(residuals):.3e}, "
                f"eigenvalue discrepancy {discrepancy:.3e}; using numerical eigenpairs"
            )
        return EigenSystemReport(
            values=values,
            vectors=tuple(pair.vector for pair in pairs),
            zero_mode_index=zero_index,
            analytic_values=tuple(analytic_values),
            analytic_residuals=tuple(residuals),
            value_discrepancy=discrepancy,
            consistent=consistent,
        )

    @staticmethod
    def adiabaticity_terms(params: CavitySystemParams, t: float) -> tuple[float, Optional[int]]:
        """max_k |<psi_k|d psi^I/dt>| / |epsilon_k| over the four bright modes.

        The second item is the bright mode k whose eigenvalue vanishes, in
        which case the metric is infinite; otherwise None.
        """
        a, b = params.couplings(t)
        matrix = _closed5_matrix(a, b, params.g, params.Delta_prime)
        pairs = SpectralService.eigendecompose(matrix, CLOSED5_LABELS)
        zero_index = AdiabaticityService._zero_mode(pairs, a, b, params.g)
        rate = DarkStateService.dark_state_derivative(params, t)
        scale = max(1.0, float(np.linalg.norm(matrix, 2)))

        metric = 0.0
        for k, pair in enumerate(pairs):
            if k == zero_index:
                continue
            if abs(pair.value) <= ZERO_EIGENVALUE_TOLERANCE * scale:
                return math.inf, k
            coupling = abs(np.vdot(pair.vector.amplitudes, rate))
            metric = max(metric, coupling / abs(pair.value))
        return metric, None

    @staticmethod
    def adiabaticity_metric(params: CavitySystemParams, t: float) -> float:
        metric, vanishing = AdiabaticityService.adiabaticity_terms(params, t)
        if vanishing is not None:
            logger.warning(f"Bright mode {vanishing} has a vanishing eigenvalue at t={t}; metric is infinite")
        return metric

    @staticmethod
    def adiabaticity_profile(params: CavitySystemParams, times: Sequence[float]) -> np.ndarray:
        terms = [AdiabaticityService.adiabaticity_terms(params, t) for t in times]
        gapless = [(t, k) for t, (_, k) in zip(times, terms) if k is not None]
        if gapless:
            t, k = gapless[0]
            logger.warning(
                f"Bright mode {k} has a vanishing eigenvalue at {len(gapless)} of {len(terms)} "
                f"sample(s), first at t={t}; metric is infinite there"
            )
        return np.array([metric for metric, _ in terms])


class CavityService:

    @staticmethod
    def build_hamiltonian_closed5(params: CavitySystemParams, t: float) -> np.ndarray:
        a, b = params.couplings(t)
        return _closed5_matrix(a, b, params.g, params.Delta_prime)

    @staticmethod
    def build_hamiltonian_full(
        params: CavitySystemParams, t: float, n_max: Optional[int] = None
    ) -> np.ndarray:
        """Full two-SQUID + cavity matrix over (0, 1, e')^2 x Fock(0..n_max)."""
        n_max = params.n_max if n_max is None else n_max
        if n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {n_max}")
        ops = _full_operators(n_max)
        a, b = params.couplings(t)
        coupling = a * ops["drive_A"] + b * ops["drive_B"] + params.g * ops["cavity"]
        return params.Delta_prime * ops["excited"] + 0.5 * (coupling + coupling.conj().T)

    @staticmethod
    def hamiltonian_model(params: CavitySystemParams) -> HamiltonianModel:
        if params.space == "full":
            return HamiltonianModel(
                params.labels,
                lambda t: CavityService.build_hamiltonian_full(params, t),
                name=f"cavity[full, n_max={params.n_max}]",
            )

        def generator(t: float) -> np.ndarray:
            matrix = np.zeros((6, 6), dtype=complex)
            matrix[:5, :5] = CavityService.build_hamiltonian_closed5(params, t)
            return matrix

        return HamiltonianModel(TRANSFER_LABELS, generator, name="cavity[closed5]")

    @staticmethod
    def pulse_order_ratios(params: CavitySystemParams) -> tuple[float, float]:
        """|Omega_B/Omega_A| at t_start and |Omega_A/Omega_B| at t_end."""
        a_start, b_start = params.couplings(params.t_start)
        a_end, b_end = params.couplings(params.t_end)
        return _ratio(abs(b_start), abs(a_start)), _ratio(abs(a_end), abs(b_end))

    @staticmethod
    def fractional_stirap_pulses(
        Omega_bar: complex, tau_A: float, tau_B: float, tau_p: float, theta: float, xi: float
    ) -> tuple[PulseEnvelope, PulseEnvelope]:
        """Pulse pair switching off with Omega_A : Omega_B = cos(theta) : sin(theta) e^{i xi}."""
        gauss_A = PulseEnvelope.gaussian(Omega_bar, tau_A, tau_p)
        gauss_B = PulseEnvelope.gaussian(Omega_bar, tau_B, tau_p)
        pulse_A = gauss_A.scaled(math.cos(theta))
        pulse_B = PulseEnvelope.scaled_sum(
            [(1.0, gauss_B), (math.sin(theta) * cmath.exp(1j * xi), gauss_A)]
        )
        return pulse_A, pulse_B

    @staticmethod
    def entangled_target(theta: float, xi: float) -> StateVector:
        return StateVector.from_components(
            VACUUM_LABELS,
            {
                ket("1", "0", 0): math.cos(theta),
                ket("0", "1", 0): cmath.exp(-1j * xi) * math.sin(theta),
            },
        )

    @staticmethod
    def flipped_entangled_target(theta: float, xi: float) -> StateVector:
        """The entangled target after inverting SQUID A."""
        return StateVector.from_components(
            VACUUM_LABELS,
            {
                ket("0", "0", 0): math.cos(theta),
                ket("1", "1", 0): cmath.exp(-1j * xi) * math.sin(theta),
            },
        )

    @staticmethod
    def apply_to_qubit_a(unitary: np.ndarray, state: StateVector) -> StateVector:
        if state.labels != VACUUM_LABELS:
            state = CavityService.post_select_vacuum(state)
        amplitudes = np.kron(np.asarray(unitary, dtype=complex), np.eye(2)) @ state.amplitudes
        return StateVector(VACUUM_LABELS, amplitudes, normalized=state.normalized)

    @staticmethod
    def post_select_vacuum(state: StateVector) -> StateVector:
        """Two-qubit state conditioned on an empty cavity and no |e'> excitation."""
        amplitudes = np.array(
            [state.amplitude(label) if label in state.labels else 0.0 for label in VACUUM_LABELS],
            dtype=complex,
        )
        probability = float(np.vdot(amplitudes, amplitudes).real)
        if probability == 0.0:
            raise ValueError("Post-selection on the cavity vacuum has zero probability")
        return StateVector(VACUUM_LABELS, amplitudes / math.sqrt(probability))

    @staticmethod
    def concurrence(two_qubit_state: StateVector) -> float:
        """2 |c00 c11 - c01 c10| of the post-selected pure state."""
        state = CavityService.post_select_vacuum(two_qubit_state)
        c00, c01, c10, c11 = state.amplitudes
        return float(min(1.0, 2.0 * abs(c00 * c11 - c01 * c10)))

    @staticmethod
    def dark_overlap(params: CavitySystemParams, trajectory: Trajectory) -> np.ndarray:
        """|<psi^I(t)|psi(t)>|^2 along a trajectory."""
        a = params.pulse_A.evaluate(trajectory.times)
        b = params.pulse_B.evaluate(trajectory.times)
        dark = DarkStateService.dark_components(a, b, params.g)
        columns = [trajectory.labels.index(label) for label in CLOSED5_LABELS]
        overlap = np.einsum("jn,nj->n", dark.conj(), trajectory.amplitudes[:, columns])
        return np.clip(np.abs(overlap) ** 2, 0.0, 1.0)

    @staticmethod
    def _check_pulse_order(params: CavitySystemParams, flags: list, late: bool = True):
        start_ratio, end_ratio = CavityService.pulse_order_ratios(params)
        if not start_ratio >= PULSE_ORDER_THRESHOLD or (late and not end_ratio >= PULSE_ORDER_THRESHOLD):
            logger.warning(
                f"Pulses are not in counterintuitive order: Omega_B/Omega_A={start_ratio:.3g} "
                f"at t_start, Omega_A/Omega_B={end_ratio:.3g} at t_end (need >= {PULSE_ORDER_THRESHOLD:g})"
            )
            flags.append("pulse_order")
        return start_ratio, end_ratio

    @staticmethod
    def _finish(
        params: CavitySystemParams,
        trajectory: Trajectory,
        target: StateVector,
        flags: list,
        pulse_order: tuple[float, float],
    ) -> TransferResult:
        final = trajectory.final_state
        overlap = target.inner(final)

        adiabaticity_max = None
        if params.pulse_A.is_differentiable and params.pulse_B.is_differentiable:
            samples = np.linspace(params.t_start, params.t_end, ADIABATICITY_SAMPLES)
            adiabaticity_max = float(
                np.max(AdiabaticityService.adiabaticity_profile(params, samples))
            )

        try:
            concurrence = CavityService.concurrence(final)
        except ValueError:
            concurrence = None

        result = TransferResult(
            params=params,
            trajectory=trajectory,
            target=target,
            overlap=overlap,
            fidelity_target=float(min(1.0, abs(overlap) ** 2)),
            dark_overlap=CavityService.dark_overlap(params, trajectory),
            adiabaticity_max=adiabaticity_max,
            concurrence=concurrence,
            pulse_order=pulse_order,
            flags=tuple(flags),
        )
        logger.info(
            f"Cavity run over [{params.t_start}, {params.t_end}] ns ({params.space}): "
            f"fidelity {result.fidelity_target:.6f}, norm drift {trajectory.norm_drift:.1e}"
        )
        return result

    @staticmethod
    def run_transfer(
        params: CavitySystemParams, c0: complex, c1: complex, dt: Optional[float] = None
    ) -> TransferResult:
        """Move (c0|0> + c1|1>)_A |1>_B |0>_c to |1>_A (c0|0> + c1|1>)_B |0>_c."""
        norm = abs(c0) ** 2 + abs(c1) ** 2
        if abs(norm - 1.0) > AMPLITUDE_TOLERANCE:
            raise ValueError(f"|c0|^2 + |c1|^2 = {norm!r}, expected 1")
        flags = []
        pulse_order = CavityService._check_pulse_order(params, flags)

        labels = params.labels
        psi0 = StateVector.from_components(labels, {INITIAL_LABEL: c0, STATIC_DARK_LABEL: c1})
        target = StateVector.from_components(labels, {TRANSFERRED_LABEL: c0, STATIC_DARK_LABEL: c1})
        trajectory = PropagationService.propagate(
            CavityService.hamiltonian_model(params), psi0, params.t_start, params.t_end, dt
        )
        return CavityService._finish(params, trajectory, target, flags, pulse_order)

    @staticmethod
    def run_fractional_stirap(
        params: CavitySystemParams, theta: float, xi: float, dt: Optional[float] = None
    ) -> TransferResult:
        """Stop the passage halfway to build cos(theta)|1,0> + e^{-i xi} sin(theta)|0,1>."""
        flags = []
        pulse_order = CavityService._check_pulse_order(params, flags, late=False)

        a, b = params.couplings(params.t_end)
        scale = max(abs(a), abs(b))
        mismatch = abs(b * math.cos(theta) - a * math.sin(theta) * cmath.exp(1j * xi))
        if scale == 0.0 or mismatch > LATE_RATIO_TOLERANCE * scale:
            logger.warning(
                f"Pulses do not switch off with Omega_A:Omega_B = cos(theta):sin(theta)e^(i xi) "
                f"(mismatch {mismatch:.3g} of {scale:.3g})"
            )
            flags.append("late_ratio")

        labels = params.labels
        psi0 = StateVector.basis(labels, INITIAL_LABEL)
        target = StateVector.from_components(
            labels,
            {
                TRANSFERRED_LABEL: math.cos(theta),
                INITIAL_LABEL: cmath.exp(-1j * xi) * math.sin(theta),
            },
        )
        trajectory = PropagationService.propagate(
            CavityService.hamiltonian_model(params), psi0, params.t_start, params.t_end, dt
        )
        return CavityService._finish(params, trajectory, target, flags, pulse_order)

    @staticmethod
    def cavity_peak_population(params: CavitySystemParams, dt: Optional[float] = None) -> float:
        """Time-maximum population of |1,1,1> during a plain transfer from |0,1,0>."""
        return CavityService.run_transfer(params, 1.0, 0.0, dt).cavity_peak_population

    @staticmethod
    def robustness_scan(
        params: CavitySystemParams, fraction: float = 0.1, dt: Optional[float] = None
    ) -> list[RobustnessPoint]:
        """Final |1,0,0> population with Omega_bar, g and tau_p each moved by +-fraction."""
        if not 0 < fraction < 1:
            raise ValueError(f"fraction must lie in (0, 1), got {fraction}")

        def perturbed(parameter: str, factor: float) -> CavitySystemParams:
            if parameter == "Omega_bar":
                return replace(
                    params, pulse_A=params.pulse_A.scaled(factor), pulse_B=params.pulse_B.scaled(factor)
                )
            if parameter == "g":
                return replace(params, g=params.g * factor)
            return replace(
                params, pulse_A=params.pulse_A.widened(factor), pulse_B=params.pulse_B.widened(factor)
            )

        def transferred(p: CavitySystemParams) -> float:
            return CavityService.run_transfer(p, 1.0, 0.0, dt).final_state.population(TRANSFERRED_LABEL)

        points = [RobustnessPoint("baseline", 1.0, transferred(params))]
        for parameter in ("Omega_bar", "g", "tau_p"):
            for factor in (1.0 - fraction, 1.0 + fraction):
                points.append(
                    RobustnessPoint(parameter, factor, transferred(perturbed(parameter, factor)))
                )
        spread = max(abs(p.transfer_population - points[0].transfer_population) for p in points)
        logger.info(f"Robustness scan at +-{fraction:.0%}: largest population change {spread:.4f}")
        return points
