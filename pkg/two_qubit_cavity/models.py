from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pulses.models import PulseEnvelope
from quantum_core.models import StateVector, Trajectory

LEVELS = ("0", "1", "e'")
SPACE_CHOICES = ("closed5", "full")


def ket(a: str, b: str, n: int) -> str:
    """Label of |a>_A |b>_B |n>_c."""
    return f"{a},{b},{n}"


CLOSED5_LABELS = (
    ket("0", "1", 0),
    ket("e'", "1", 0),
    ket("1", "1", 1),
    ket("1", "e'", 0),
    ket("1", "0", 0),
)
STATIC_DARK_LABEL = ket("1", "1", 0)
# the closed subspace plus the static dark state, so c0|0,1,0> + c1|1,1,0> fits
TRANSFER_LABELS = CLOSED5_LABELS + (STATIC_DARK_LABEL,)
VACUUM_LABELS = tuple(ket(a, b, 0) for a in ("0", "1") for b in ("0", "1"))


def full_labels(n_max: int) -> tuple[str, ...]:
    return tuple(ket(a, b, n) for a in LEVELS for b in LEVELS for n in range(n_max + 1))


@dataclass(frozen=True)
class CavitySystemParams:
    """Two Lambda SQUIDs sharing one cavity mode.

    Frequencies in rad/ns, times in ns. ``pulse_A``/``pulse_B`` drive the
    |0>-|e'> transitions; ``g`` couples |1>-|e'> to the cavity.
    """

    g: float
    pulse_A: PulseEnvelope
    pulse_B: PulseEnvelope
    t_start: float
    t_end: float
    Delta_prime: float = 0.0
    space: str = "closed5"
    n_max: int = 2

    def __post_init__(self):
        if isinstance(self.g, complex) and self.g.imag != 0:
            raise ValueError(f"Cavity coupling g must be real, got {self.g}")
        object.__setattr__(self, "g", float(np.real(self.g)))
        if self.t_end <= self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        if self.space not in SPACE_CHOICES:
            raise ValueError(f"Unknown space {self.space!r}; expected one of {SPACE_CHOICES}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    @classmethod
    def gaussian_pair(
        cls,
        Omega_bar: complex,
        g: float,
        tau_A: float,
        tau_B: float,
        tau_p: float,
        t_start: float,
        t_end: float,
        **kwargs,
    ) -> "CavitySystemParams":
        return cls(
            g=g,
            pulse_A=PulseEnvelope.gaussian(Omega_bar, tau_A, tau_p),
            pulse_B=PulseEnvelope.gaussian(Omega_bar, tau_B, tau_p),
            t_start=t_start,
            t_end=t_end,
            **kwargs,
        )

    @property
    def labels(self) -> tuple[str, ...]:
        return TRANSFER_LABELS if self.space == "closed5" else full_labels(self.n_max)

    def couplings(self, t):
        return self.pulse_A.evaluate(t), self.pulse_B.evaluate(t)

    def as_dict(self) -> dict:
        return {
            "g": self.g,
            "Delta_prime": self.Delta_prime,
            "pulse_A": self.pulse_A.as_dict(),
            "pulse_B": self.pulse_B.as_dict(),
            "t_start": self.t_start,
            "t_end": self.t_end,
            "space": self.space,
            "n_max": self.n_max,
        }


@dataclass(frozen=True)
class DarkStatePair:
    psi_I: StateVector
    psi_II: StateVector


@dataclass(frozen=True, eq=False)
class EigenSystemReport:
    """Closed-subspace eigensystem at one instant.

    ``values``/``vectors`` come from direct diagonalization and are
    authoritative; the ``analytic_*`` fields hold the closed forms
    and their residuals against the same matrix.
    """

    values: np.ndarray
    vectors: tuple[StateVector, ...]
    zero_mode_index: int
    analytic_values: tuple[float, ...]
    analytic_residuals: tuple[float, ...]
    value_discrepancy: float
    consistent: bool

    @property
    def bright_indices(self) -> tuple[int, ...]:
        return tuple(k for k in range(len(self.values)) if k != self.zero_mode_index)


@dataclass(frozen=True)
class RobustnessPoint:
    parameter: str
    factor: float
    transfer_population: float


@dataclass(frozen=True, eq=False)
class TransferResult:
    params: CavitySystemParams
    trajectory: Trajectory
    target: StateVector
    overlap: complex
    fidelity_target: float
    dark_overlap: np.ndarray
    adiabaticity_max: Optional[float]
    concurrence: Optional[float]
    pulse_order: tuple[float, float]
    flags: tuple[str, ...] = field(default=())

    @property
    def final_state(self) -> StateVector:
        return self.trajectory.final_state

    @property
    def final_populations(self) -> dict[str, float]:
        return self.trajectory.final_populations()

    @property
    def cavity_peak_population(self) -> float:
        return float(self.trajectory.population_of(ket("1", "1", 1)).max())

    @property
    def excited_peak_population(self) -> float:
        """Time-maximum of the total population in kets containing |e'>."""
        columns = [i for i, label in enumerate(self.trajectory.labels) if "e'" in label]
        return float(self.trajectory.populations[:, columns].sum(axis=1).max())

    def rise_time(self, label: str, low: float = 0.05, high: float = 0.95) -> Optional[float]:
        """Time for P(label) to first climb from ``low`` to ``high``; None if it never does."""
        population = self.trajectory.population_of(label)
        above_low = np.flatnonzero(population >= low)
        above_high = np.flatnonzero(population >= high)
        if not len(above_low) or not len(above_high):
            return None
        times = self.trajectory.times
        return float(times[above_high[0]] - times[above_low[0]])
