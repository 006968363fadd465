from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    LabelMismatchError,
    NormalizationError,
)

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes over an ordered, labeled basis.

    ``normalized=False`` skips the unit-norm check; propagated states and the
    superpositions used for linearity checks are built that way.
    """

    labels: tuple[str, ...]
    amplitudes: np.ndarray
    normalized: bool = field(default=True, repr=False)

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amplitudes)

        if len(set(labels)) != len(labels):
            raise ValueError(f"Basis labels must be unique: {labels}")
        if amplitudes.size != len(labels):
            raise DimensionMismatchError(
                f"{amplitudes.size} amplitudes for {len(labels)} labels"
            )
        if self.normalized and abs(self.norm - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"State norm is {self.norm!r}, expected 1")

    @classmethod
    def basis(cls, labels: Sequence[str], label: str) -> "StateVector":
        labels = tuple(labels)
        amplitudes = np.zeros(len(labels), dtype=complex)
        amplitudes[labels.index(label)] = 1.0
        return cls(labels, amplitudes)

    @classmethod
    def from_components(
        cls,
        labels: Sequence[str],
        components: Mapping[str, complex],
        normalized: bool = True,
    ) -> "StateVector":
        labels = tuple(labels)
        unknown = set(components) - set(labels)
        if unknown:
            raise LabelMismatchError(f"Unknown basis labels {sorted(unknown)}")
        amplitudes = [components.get(label, 0.0) for label in labels]
        return cls(labels, amplitudes, normalized=normalized)

    @property
    def dimension(self) -> int:
        return len(self.labels)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def amplitude(self, label: str) -> complex:
        return complex(self.amplitudes[self.index(label)])

    def population(self, label: str) -> float:
        return float(abs(self.amplitudes[self.index(label)]) ** 2)

    def populations(self) -> dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, np.abs(self.amplitudes) ** 2)}

    def inner(self, other: "StateVector") -> complex:
        """<self|other>"""
        if self.labels != other.labels:
            raise LabelMismatchError(f"Bases differ: {self.labels} vs {other.labels}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def restricted(self, labels: Sequence[str]) -> "StateVector":
        """Components on ``labels`` only, without renormalizing."""
        return StateVector(
            tuple(labels),
            [self.amplitudes[self.index(label)] for label in labels],
            normalized=False,
        )

    def embedded(self, labels: Sequence[str]) -> "StateVector":
        """The same state written in a larger basis that contains this one."""
        labels = tuple(labels)
        missing = set(self.labels) - set(labels)
        if missing:
            raise LabelMismatchError(f"Target basis lacks {sorted(missing)}")
        amplitudes = np.zeros(len(labels), dtype=complex)
        for label, value in zip(self.labels, self.amplitudes):
            amplitudes[labels.index(label)] = value
        return StateVector(labels, amplitudes, normalized=self.normalized)


@dataclass(frozen=True)
class HamiltonianModel:
    """Time-dependent Hermitian generator in rad/ns (hbar = 1)."""

    labels: tuple[str, ...]
    generator: Callable[[float], np.ndarray]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def evaluate(self, t: float) -> np.ndarray:
        matrix = np.asarray(self.generator(t), dtype=complex)
        if matrix.shape != (self.dimension, self.dimension):
            raise DimensionMismatchError(
                f"{self.name or 'Hamiltonian'} returned shape {matrix.shape} "
                f"for {self.dimension} basis labels"
            )
        return matrix

    def hermiticity_error(self, t: float) -> float:
        matrix = self.evaluate(t)
        return float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))


@dataclass(frozen=True)
class Eigenpair:
    value: float
    vector: StateVector


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of i d|psi>/dt = H|psi>.

    ``amplitudes`` has one row per entry of ``times``.
    """

    labels: tuple[str, ...]
    times: np.ndarray
    amplitudes: np.ndarray
    norm_drift: float

    def __post_init__(self):
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("Trajectory times must be strictly increasing")

    @cached_property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def states(self) -> list[StateVector]:
        return [self.state_at(i) for i in range(len(self.times))]

    @property
    def final_state(self) -> StateVector:
        return self.state_at(-1)

    def state_at(self, index: int) -> StateVector:
        return StateVector(self.labels, self.amplitudes[index], normalized=False)

    def population_of(self, label: str) -> np.ndarray:
        return self.populations[:, self.labels.index(label)]

    def final_populations(self) -> dict[str, float]:
        return {label: float(p) for label, p in zip(self.labels, self.populations[-1])}

    def strided(self, stride: int) -> "Trajectory":
        """Every ``stride``-th sample, always keeping the last one."""
        indices = np.arange(0, len(self.times), max(1, stride))
        if indices[-1] != len(self.times) - 1:
            indices = np.append(indices, len(self.times) - 1)
        return Trajectory(
            self.labels, self.times[indices], self.amplitudes[indices], self.norm_drift
        )
