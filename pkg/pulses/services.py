import logging
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .models import PulseEnvelope

logger = logging.getLogger(__name__)

QUAD_EPSREL = 1e-11
QUAD_EPSABS = 1e-14


class PulseService:

    @staticmethod
    def sample(pulse: PulseEnvelope, times: Sequence[float]) -> np.ndarray:
        return np.asarray(pulse.evaluate(np.asarray(times, dtype=float)), dtype=complex)

    @staticmethod
    def abs_square_integral(pulse: PulseEnvelope, t_i: float, t_f: float) -> float:
        """Integral of |Omega(t)|^2 over [t_i, t_f], in rad^2/ns."""
        if t_f <= t_i:
            raise ValueError(f"t_f ({t_f}) must exceed t_i ({t_i})")
        if pulse.shape == "rectangular":
            lo = max(t_i, pulse.center - 0.5 * pulse.duration)
            hi = min(t_f, pulse.center + 0.5 * pulse.duration)
            return abs(pulse.amplitude) ** 2 * max(0.0, hi - lo)
        return PulseService._quad(lambda t: abs(pulse.evaluate(t)) ** 2, pulse, t_i, t_f)

    @staticmethod
    def pulse_area(pulse: PulseEnvelope, t_i: float, t_f: float) -> float:
        """Integral of |Omega(t)| over [t_i, t_f], in rad."""
        if t_f <= t_i:
            raise ValueError(f"t_f ({t_f}) must exceed t_i ({t_i})")
        if pulse.shape == "rectangular":
            lo = max(t_i, pulse.center - 0.5 * pulse.duration)
            hi = min(t_f, pulse.center + 0.5 * pulse.duration)
            return abs(pulse.amplitude) * max(0.0, hi - lo)
        return PulseService._quad(lambda t: abs(pulse.evaluate(t)), pulse, t_i, t_f)

    @staticmethod
    def _quad(
        integrand: Callable[[float], float], pulse: PulseEnvelope, t_i: float, t_f: float
    ) -> float:
        lo, hi = pulse.support()
        a, b = max(t_i, lo), min(t_f, hi)
        if b <= a:
            return 0.0
        points = [x for x in pulse.breakpoints() if a < x < b]
        value, error = integrate.quad(
            integrand,
            a,
            b,
            points=points or None,
            epsabs=QUAD_EPSABS,
            epsrel=QUAD_EPSREL,
            limit=500,
        )
        logger.debug(f"quad over [{a}, {b}] = {value!r} (error estimate {error:.1e})")
        return float(value)
