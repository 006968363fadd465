from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import constants

FLUX_QUANTUM = constants.physical_constants["mag. flux quantum"][0]  # Wb
PER_SECOND_TO_PER_NS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Flux grid in units of the flux quantum, endpoints included."""

    phi_min: float
    phi_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"Grid needs at least 3 points, got {self.n_points}")
        if self.phi_max <= self.phi_min:
            raise ValueError(f"phi_max ({self.phi_max}) must exceed phi_min ({self.phi_min})")

    @property
    def spacing(self) -> float:
        return (self.phi_max - self.phi_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.phi_min, self.phi_max, self.n_points)


@dataclass(frozen=True)
class SquidParams:
    """rf-SQUID parameters: L in pH, C in fF, I_c in uA, Phi_x in flux quanta."""

    L: float
    C: float
    I_c: float
    Phi_x: float
    grid: Optional[GridSpec] = None

    DEFAULT_HALF_WIDTH = 0.75
    DEFAULT_POINTS = 2001

    def __post_init__(self):
        if self.L <= 0 or self.C <= 0:
            raise ValueError(f"L and C must be positive, got L={self.L}, C={self.C}")
        if self.I_c < 0:
            raise ValueError(f"I_c must be non-negative, got {self.I_c}")

    @classmethod
    def reference_device(cls, **overrides) -> "SquidParams":
        values = {"L": 100.0, "C": 40.0, "I_c": 3.95, "Phi_x": -0.501}
        values.update(overrides)
        return cls(**values)

    @property
    def resolved_grid(self) -> GridSpec:
        if self.grid is not None:
            return self.grid
        return GridSpec(
            self.Phi_x - self.DEFAULT_HALF_WIDTH,
            self.Phi_x + self.DEFAULT_HALF_WIDTH,
            self.DEFAULT_POINTS,
        )

    @property
    def inductive_scale(self) -> float:
        """Phi_0^2 / (2 L hbar) in rad/ns."""
        return FLUX_QUANTUM**2 / (2 * self.L * 1e-12 * constants.hbar) * PER_SECOND_TO_PER_NS

    @property
    def josephson_scale(self) -> float:
        """E_J / hbar = I_c Phi_0 / (2 pi hbar) in rad/ns."""
        return self.I_c * 1e-6 * FLUX_QUANTUM / (2 * np.pi * constants.hbar) * PER_SECOND_TO_PER_NS

    @property
    def charging_scale(self) -> float:
        """hbar / (2 C Phi_0^2) in rad/ns: the kinetic prefactor in the flux-quantum coordinate."""
        return constants.hbar / (2 * self.C * 1e-15 * FLUX_QUANTUM**2) * PER_SECOND_TO_PER_NS

    @property
    def beta_L(self) -> float:
        return 2 * np.pi * self.L * 1e-12 * self.I_c * 1e-6 / FLUX_QUANTUM

    @property
    def plasma_frequency(self) -> float:
        """1/sqrt(LC) in rad/ns."""
        return 1.0 / np.sqrt(self.L * 1e-12 * self.C * 1e-15) * PER_SECOND_TO_PER_NS

    def as_dict(self) -> dict:
        grid = self.resolved_grid
        return {
            "L": self.L,
            "C": self.C,
            "I_c": self.I_c,
            "Phi_x": self.Phi_x,
            "grid": {"phi_min": grid.phi_min, "phi_max": grid.phi_max, "n_points": grid.n_points},
        }


@dataclass(frozen=True, eq=False)
class DeviceSpectrum:
    """Lowest stationary states on the flux grid.

    ``wavefunctions`` has one row per level, normalized under the trapezoidal
    rule on ``phi``. ``barrier_top``/``barrier_phi`` are None for a single well.
    """

    params: SquidParams
    phi: np.ndarray
    potential: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray
    minima_phi: tuple[float, ...]
    barrier_phi: Optional[float]
    barrier_top: Optional[float]
    well_assignments: tuple[str, ...]

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    @property
    def is_double_well(self) -> bool:
        return self.barrier_phi is not None


@dataclass(frozen=True)
class LevelClassification:
    idx0: int
    idx1: int
    idxE: int
    degenerate: bool = False
