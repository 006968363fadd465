import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from pulses.models import PulseEnvelope
from quantum_core.models import StateVector, Trajectory

QUBIT_LABELS = ("0", "1")
LAMBDA_LABELS = ("0", "1", "e")
FRAME_CHOICES = ("rotating", "interaction")

AXIS_TOLERANCE = 1e-12
UNITARITY_TOLERANCE = 1e-10
PULSE_AREA_TOLERANCE = 1e-10
ANGLE_TOLERANCE = 1e-12


def wrap_angle(angle: float) -> float:
    """Angle reduced into (-pi, pi]."""
    wrapped = math.remainder(angle, 2 * math.pi)
    # -pi up to rounding belongs to the upper end
    return wrapped + 2 * math.pi if wrapped <= -math.pi + ANGLE_TOLERANCE else wrapped


@dataclass(frozen=True)
class MixingAngles:
    """Fixed angles splitting one drive into the |0>-|e> and |1>-|e> couplings."""

    phi: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.phi) and math.isfinite(self.eta)):
            raise ValueError(f"Mixing angles must be finite, got phi={self.phi}, eta={self.eta}")


@dataclass(frozen=True)
class RotationSpec:
    axis: tuple[float, float, float]
    delta: float

    def __post_init__(self):
        axis = tuple(float(x) for x in self.axis)
        if len(axis) != 3:
            raise ValueError(f"Rotation axis needs 3 components, got {len(axis)}")
        if abs(math.hypot(*axis) - 1.0) > AXIS_TOLERANCE:
            raise ValueError(f"Rotation axis must be a unit vector, |n| = {math.hypot(*axis)!r}")
        object.__setattr__(self, "axis", axis)

    @classmethod
    def from_angles(cls, angles: MixingAngles, delta: float) -> "RotationSpec":
        s, c = math.sin(2 * angles.phi), math.cos(2 * angles.phi)
        return cls((s * math.cos(angles.eta), s * math.sin(angles.eta), c), delta)


@dataclass(frozen=True)
class TransferMatrix:
    """Coupled-state block of a two-level propagator.

    ``alpha`` is the amplitude left in |C> and ``beta`` the amplitude moved to
    |e> when the pulse starts in |C>.
    """

    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        total = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(total - 1.0) > UNITARITY_TOLERANCE:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {total!r}, expected 1")

    @property
    def phase_shift(self) -> float:
        """delta with alpha = exp(-i delta), in (-pi, pi]."""
        return wrap_angle(-np.angle(self.alpha))


@dataclass(frozen=True)
class RabiDesign:
    """Rectangular pulse of amplitude Omega and length T at detuning Delta.

    The generalized pulse area sqrt(Omega^2 + Delta^2) T equals 2 pi m, so the
    excited state is empty again when the pulse ends.
    """

    Omega: float
    Delta: float
    T: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        area = math.hypot(self.Omega, self.Delta) * self.T
        target = 2 * math.pi * self.m
        if abs(area - target) > PULSE_AREA_TOLERANCE * target:
            raise ValueError(f"Generalized pulse area {area!r} differs from 2*pi*{self.m}")

    @property
    def effective_rabi_frequency(self) -> float:
        return math.hypot(self.Omega, self.Delta)

    @property
    def delta(self) -> float:
        """Rotation angle (Delta/Omega~ + 1) m pi, unreduced."""
        return (self.Delta / self.effective_rabi_frequency + 1.0) * self.m * math.pi

    @property
    def wrapped_delta(self) -> float:
        return wrap_angle(self.delta)

    def pulse(self) -> PulseEnvelope:
        return PulseEnvelope.rectangular(self.Omega, 0.5 * self.T, self.T)

    def as_dict(self) -> dict:
        return {
            "model": "rabi",
            "Omega": self.Omega,
            "Delta": self.Delta,
            "T": self.T,
            "m": self.m,
            "delta": self.wrapped_delta,
        }


@dataclass(frozen=True)
class RamanConfig:
    """Far-detuned pulse; the rotation angle follows from adiabatic elimination of |e>."""

    pulse: PulseEnvelope
    Delta: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.Delta == 0:
            raise ValueError("Raman coupling needs a non-zero detuning")
        if self.t_end <= self.t_start:
            raise ValueError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")

    def as_dict(self) -> dict:
        return {
            "model": "raman",
            "pulse": self.pulse.as_dict(),
            "Delta": self.Delta,
            "t_start": self.t_start,
            "t_end": self.t_end,
        }


@dataclass(frozen=True, eq=False)
class RotationResult:
    angles: MixingAngles
    spec: RotationSpec
    frame: str
    trajectory: Trajectory
    target: StateVector
    overlap: complex
    fidelity: float
    excited_population: float
    max_excited_population: float
    flags: tuple[str, ...] = field(default=())
    validity_ratio: Optional[float] = None

    @property
    def final_state(self) -> StateVector:
        return self.trajectory.final_state

    @property
    def delta(self) -> float:
        return self.spec.delta
