from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .exceptions import UnsupportedShapeError

TimeLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PulseEnvelope:
    """Complex Rabi-frequency envelope Omega(t) in rad/ns.

    gaussian:    A exp(-(t - center)^2 / width^2)
    sech:        A sech((t - center) / width)
    rectangular: A on [center - duration/2, center + duration/2], else 0
    scaled_sum:  sum of coefficient * member(t) over ``terms``
    """

    SHAPE_CHOICES = ("rectangular", "gaussian", "sech", "scaled_sum")
    TRUNCATION_WIDTHS = {"gaussian": 8.0, "sech": 40.0}

    shape: str
    amplitude: complex = 1.0
    center: float = 0.0
    width: Optional[float] = None
    duration: Optional[float] = None
    terms: tuple = field(default=())

    def __post_init__(self):
        if self.shape not in self.SHAPE_CHOICES:
            raise ValueError(f"Unknown pulse shape {self.shape!r}")
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        if self.shape in ("gaussian", "sech") and not (self.width and self.width > 0):
            raise ValueError(f"{self.shape} pulse needs a positive width, got {self.width}")
        if self.shape == "rectangular" and not (self.duration and self.duration > 0):
            raise ValueError(f"rectangular pulse needs a positive duration, got {self.duration}")
        if self.shape == "scaled_sum":
            terms = tuple((complex(c), p) for c, p in self.terms)
            if not terms:
                raise ValueError("scaled_sum pulse needs at least one term")
            object.__setattr__(self, "terms", terms)

    @classmethod
    def rectangular(cls, amplitude: complex, center: float, duration: float) -> "PulseEnvelope":
        return cls("rectangular", amplitude=amplitude, center=center, duration=duration)

    @classmethod
    def gaussian(cls, amplitude: complex, center: float, width: float) -> "PulseEnvelope":
        return cls("gaussian", amplitude=amplitude, center=center, width=width)

    @classmethod
    def sech(cls, amplitude: complex, center: float, width: float) -> "PulseEnvelope":
        return cls("sech", amplitude=amplitude, center=center, width=width)

    @classmethod
    def scaled_sum(cls, terms) -> "PulseEnvelope":
        return cls("scaled_sum", terms=tuple(terms))

    def evaluate(self, t: TimeLike) -> Union[complex, np.ndarray]:
        value = self._evaluate(np.asarray(t, dtype=float))
        return complex(value) if np.ndim(value) == 0 else value

    def derivative(self, t: TimeLike) -> Union[complex, np.ndarray]:
        value = self._derivative(np.asarray(t, dtype=float))
        return complex(value) if np.ndim(value) == 0 else value

    def _evaluate(self, t: np.ndarray):
        if self.shape == "scaled_sum":
            return sum(c * p._evaluate(t) for c, p in self.terms)
        if self.shape == "rectangular":
            inside = np.abs(t - self.center) <= 0.5 * self.duration
            return np.where(inside, self.amplitude, 0.0 + 0.0j)
        x = (t - self.center) / self.width
        if self.shape == "gaussian":
            return self.amplitude * np.exp(-(x**2))
        return self.amplitude * _sech(x)

    def _derivative(self, t: np.ndarray):
        if self.shape == "scaled_sum":
            return sum(c * p._derivative(t) for c, p in self.terms)
        if self.shape == "rectangular":
            raise UnsupportedShapeError("Rectangular pulses have no derivative at their edges")
        x = (t - self.center) / self.width
        if self.shape == "gaussian":
            return self.amplitude * (-2.0 * x / self.width) * np.exp(-(x**2))
        return -self.amplitude * _sech(x) * np.tanh(x) / self.width

    @property
    def is_differentiable(self) -> bool:
        if self.shape == "scaled_sum":
            return all(p.is_differentiable for _, p in self.terms)
        return self.shape != "rectangular"

    def shifted(self, s: float) -> "PulseEnvelope":
        """The same envelope delayed by ``s`` ns."""
        if self.shape == "scaled_sum":
            return replace(self, terms=tuple((c, p.shifted(s)) for c, p in self.terms))
        return replace(self, center=self.center + s)

    def scaled(self, factor: complex) -> "PulseEnvelope":
        if self.shape == "scaled_sum":
            return replace(self, terms=tuple((factor * c, p) for c, p in self.terms))
        return replace(self, amplitude=factor * self.amplitude)

    def time_scaled(self, s: float) -> "PulseEnvelope":
        """Stretch the time axis by ``s``: the new envelope at s*t equals this one at t."""
        if self.shape == "scaled_sum":
            return replace(self, terms=tuple((c, p.time_scaled(s)) for c, p in self.terms))
        return replace(
            self,
            center=self.center * s,
            width=None if self.width is None else self.width * s,
            duration=None if self.duration is None else self.duration * s,
        )

    def widened(self, s: float) -> "PulseEnvelope":
        """Widths and durations multiplied by ``s``, centers kept."""
        if s <= 0:
            raise ValueError(f"Width factor must be positive, got {s}")
        if self.shape == "scaled_sum":
            return replace(self, terms=tuple((c, p.widened(s)) for c, p in self.terms))
        return replace(
            self,
            width=None if self.width is None else self.width * s,
            duration=None if self.duration is None else self.duration * s,
        )

    def support(self) -> tuple[float, float]:
        """Interval outside of which the envelope is negligible (below 1e-12 relative in |Omega|^2)."""
        if self.shape == "scaled_sum":
            bounds = [p.support() for _, p in self.terms]
            return min(b[0] for b in bounds), max(b[1] for b in bounds)
        half = 0.5 * self.duration if self.shape == "rectangular" else self.TRUNCATION_WIDTHS[self.shape] * self.width
        return self.center - half, self.center + half

    def breakpoints(self) -> list[float]:
        if self.shape == "scaled_sum":
            return sorted({b for _, p in self.terms for b in p.breakpoints()})
        if self.shape == "rectangular":
            return [self.center - 0.5 * self.duration, self.center, self.center + 0.5 * self.duration]
        return [self.center]

    def peak_magnitude(self) -> float:
        """Upper bound of |Omega(t)| (exact for single shapes)."""
        if self.shape == "scaled_sum":
            return float(sum(abs(c) * p.peak_magnitude() for c, p in self.terms))
        return abs(self.amplitude)

    def as_dict(self) -> dict:
        if self.shape == "scaled_sum":
            return {
                "shape": self.shape,
                "terms": [
                    {"coefficient": [c.real, c.imag], "pulse": p.as_dict()} for c, p in self.terms
                ],
            }
        data = {
            "shape": self.shape,
            "amplitude": [self.amplitude.real, self.amplitude.imag],
            "center": self.center,
        }
        if self.width is not None:
            data["width"] = self.width
        if self.duration is not None:
            data["duration"] = self.duration
        return data


def _sech(x):
    # 2 e^{-|x|} / (1 + e^{-2|x|}) stays finite for large |x|
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)
