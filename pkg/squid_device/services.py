import logging
from typing import Union

import numpy as np
from scipy import integrate, linalg

from .exceptions import (
    BoundaryLeakageError,
    EigensolverError,
    NoDoubleWellError,
    NoExcitedLevelError,
)
from .models import DeviceSpectrum, LevelClassification, SquidParams

logger = logging.getLogger(__name__)

LEAKAGE_TOLERANCE = 1e-8
# fraction of the well separation within which <phi> counts as sitting on the barrier
DEGENERATE_WELL_FRACTION = 1e-3


class DeviceService:

    @staticmethod
    def potential(params: SquidParams, phi: Union[float, np.ndarray]):
        """U(phi)/hbar in rad/ns, phi in flux quanta."""
        phi = np.asarray(phi, dtype=float)
        value = params.inductive_scale * (phi - params.Phi_x) ** 2 - params.josephson_scale * np.cos(
            2 * np.pi * phi
        )
        return float(value) if value.ndim == 0 else value

    @staticmethod
    def potential_profile(params: SquidParams) -> tuple[np.ndarray, np.ndarray]:
        phi = params.resolved_grid.points()
        return phi, DeviceService.potential(params, phi)

    @staticmethod
    def local_extrema(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Interior indices of strict local minima and maxima."""
        inner = values[1:-1]
        minima = np.flatnonzero((inner < values[:-2]) & (inner < values[2:])) + 1
        maxima = np.flatnonzero((inner > values[:-2]) & (inner > values[2:])) + 1
        return minima, maxima

    @staticmethod
    def stationary_states(params: SquidParams, n_levels: int) -> DeviceSpectrum:
        """Lowest eigenpairs of -K d^2/dphi^2 + U(phi) with Dirichlet edges (three-point stencil)."""
        grid = params.resolved_grid
        phi = grid.points()
        potential = DeviceService.potential(params, phi)
        interior = grid.n_points - 2
        if not 1 <= n_levels <= interior:
            raise ValueError(f"n_levels must lie in [1, {interior}], got {n_levels}")

        kinetic = params.charging_scale / grid.spacing**2
        diagonal = 2.0 * kinetic + potential[1:-1]
        off_diagonal = np.full(interior - 1, -kinetic)
        try:
            energies, vectors = linalg.eigh_tridiagonal(
                diagonal, off_diagonal, select="i", select_range=(0, n_levels - 1)
            )
        except linalg.LinAlgError as ex:
            logger.error(f"Flux eigensolve failed for {params}: {str(ex)}")
            raise EigensolverError(f"Eigensolver did not converge: {ex}") from ex

        if np.any(np.diff(energies) <= 0):
            raise EigensolverError(f"Computed energies are not strictly increasing: {energies}")

        wavefunctions = np.zeros((n_levels, grid.n_points))
        for n in range(n_levels):
            psi = vectors[:, n] / np.sqrt(grid.spacing)
            pivot = int(np.argmax(np.abs(psi)))
            psi = psi if psi[pivot] > 0 else -psi
            edge = max(abs(psi[0]), abs(psi[-1])) / abs(psi[pivot])
            if edge > LEAKAGE_TOLERANCE:
                logger.error(f"Level {n} leaks to the grid edge ({edge:.1e}) for {grid}")
                raise BoundaryLeakageError(
                    f"Level {n} reaches {edge:.1e} of its peak at the grid boundary; widen the grid"
                )
            wavefunctions[n, 1:-1] = psi

        minima, maxima = DeviceService.local_extrema(potential)
        minima_phi = tuple(float(phi[i]) for i in minima)
        barrier_phi = barrier_top = None
        if len(minima) >= 2:
            between = [i for i in maxima if minima[0] < i < minima[-1]]
            if between:
                top = max(between, key=lambda i: potential[i])
                barrier_phi, barrier_top = float(phi[top]), float(potential[top])

        expectations = [
            float(integrate.trapezoid(phi * wavefunctions[n] ** 2, phi)) for n in range(n_levels)
        ]
        assignments = []
        for energy, mean_phi in zip(energies, expectations):
            if barrier_phi is None:
                assignments.append("single")
            elif energy > barrier_top:
                assignments.append("above_barrier")
            else:
                assignments.append("left" if mean_phi < barrier_phi else "right")

        logger.info(
            f"Computed {n_levels} levels on {grid.n_points} points "
            f"(beta_L={params.beta_L:.3f}, {len(minima)} minima)"
        )
        return DeviceSpectrum(
            params=params,
            phi=phi,
            potential=potential,
            energies=energies,
            wavefunctions=wavefunctions,
            minima_phi=minima_phi,
            barrier_phi=barrier_phi,
            barrier_top=barrier_top,
            well_assignments=tuple(assignments),
        )

    @staticmethod
    def flux_matrix_element(spectrum: DeviceSpectrum, i: int, j: int) -> float:
        """<i|phi|j> in flux quanta."""
        for level in (i, j):
            if not 0 <= level < spectrum.n_levels:
                raise IndexError(f"Level {level} outside 0..{spectrum.n_levels - 1}")
        density = spectrum.wavefunctions[i] * spectrum.wavefunctions[j]
        return float(integrate.trapezoid(spectrum.phi * density, spectrum.phi))

    @staticmethod
    def classify_levels(spectrum: DeviceSpectrum) -> LevelClassification:
        if spectrum.n_levels < 3:
            raise ValueError(f"Need at least 3 levels to classify, got {spectrum.n_levels}")
        if not spectrum.is_double_well:
            logger.warning(
                f"No double well for beta_L={spectrum.params.beta_L:.3f} "
                f"({len(spectrum.minima_phi)} minima)"
            )
            raise NoDoubleWellError(
                f"Potential has {len(spectrum.minima_phi)} local minimum/minima; "
                f"a double well needs beta_L > 1 (got {spectrum.params.beta_L:.3f})"
            )

        barrier = spectrum.barrier_phi
        separation = spectrum.minima_phi[-1] - spectrum.minima_phi[0]
        means = [DeviceService.flux_matrix_element(spectrum, n, n) for n in range(spectrum.n_levels)]

        degenerate = abs(means[0] - barrier) < DEGENERATE_WELL_FRACTION * separation
        if degenerate:
            logger.warning(
                "Lowest states are delocalized over both wells (symmetric bias); "
                "using the two lowest levels as the qubit pair"
            )
            idx0, idx1 = 0, 1
        else:
            idx0 = 0
            ground_side = means[0] < barrier
            others = [n for n in range(1, spectrum.n_levels) if (means[n] < barrier) != ground_side]
            if not others:
                raise NoDoubleWellError("No computed level localizes in the second well")
            idx1 = others[0]

        above = [n for n, e in enumerate(spectrum.energies) if e > spectrum.barrier_top]
        if not above:
            raise NoExcitedLevelError(
                f"No level above the barrier top ({spectrum.barrier_top:.3f} rad/ns) "
                f"among {spectrum.n_levels} computed levels"
            )
        return LevelClassification(idx0=idx0, idx1=idx1, idxE=above[0], degenerate=degenerate)

    @staticmethod
    def transition_frequencies(
        spectrum: DeviceSpectrum, levels: LevelClassification
    ) -> dict[str, float]:
        """Drive frequencies of the Lambda system in rad/ns."""
        energies = spectrum.energies
        return {
            "01": float(energies[levels.idx1] - energies[levels.idx0]),
            "0e": float(energies[levels.idxE] - energies[levels.idx0]),
            "1e": float(energies[levels.idxE] - energies[levels.idx1]),
        }
