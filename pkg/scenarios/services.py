import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import django
import numpy as np
from django.conf import settings

from pulses.models import PulseEnvelope
from pulses.services import PulseService
from quantum_core.models import StateVector, Trajectory
from single_qubit_rotation.models import QUBIT_LABELS, MixingAngles, RamanConfig
from single_qubit_rotation.services import RotationService
from squid_device.exceptions import NoDoubleWellError, NoExcitedLevelError
from squid_device.models import GridSpec, SquidParams
from squid_device.services import DeviceService
from two_qubit_cavity.models import TRANSFER_LABELS, CavitySystemParams, TransferResult, ket
from two_qubit_cavity.services import AdiabaticityService, CavityService

from .serializers import PulseSerializer, ScenarioConfigSerializer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

Table = tuple[list[str], np.ndarray]


@dataclass
class ScenarioOutput:
    """What one run produced, before anything is written."""

    summary: dict
    trajectory: Optional[Table] = None
    plotdata: Optional[Table] = None
    tables: dict[str, Table] = field(default_factory=dict)


def exit_code_for(ex: Union[ValueError, ArithmeticError]) -> int:
    return EXIT_NUMERICAL if isinstance(ex, ArithmeticError) else EXIT_VALIDATION


def format_errors(errors) -> str:
    """Flatten DRF error dicts into 'a.b.c: message' lines."""
    lines = []

    def walk(prefix, node):
        if isinstance(node, dict):
            for key, value in node.items():
                walk(f"{prefix}.{key}" if prefix else str(key), value)
        elif isinstance(node, list) and node and not all(isinstance(item, str) for item in node):
            for index, value in enumerate(node):
                walk(f"{prefix}.{index}", value)
        else:
            messages = node if isinstance(node, list) else [node]
            lines.extend(f"{prefix or 'config'}: {message}" for message in messages)

    walk("", errors)
    return "\n".join(lines)


class OutputService:

    @staticmethod
    def jsonable(value):
        """Plain JSON data: complex as [re, im], non-finite floats as null."""
        if isinstance(value, dict):
            return {str(key): OutputService.jsonable(item) for key, item in value.items()}
        if isinstance(value, (list, tuple)):
            return [OutputService.jsonable(item) for item in value]
        if isinstance(value, np.ndarray):
            return OutputService.jsonable(value.tolist())
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, complex):
            return [OutputService.jsonable(value.real), OutputService.jsonable(value.imag)]
        if isinstance(value, np.integer):
            return int(value)
        if isinstance(value, float):
            return float(value) if math.isfinite(value) else None
        if isinstance(value, Path):
            return str(value)
        return value

    @staticmethod
    def format_number(value) -> str:
        if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
            return str(int(value))
        return "%.17g" % float(value)

    @staticmethod
    def write_json(path: Path, data: dict) -> Path:
        text = json.dumps(OutputService.jsonable(data), sort_keys=True, indent=2, allow_nan=False)
        path.write_text(text + "\n", encoding="utf-8", newline="\n")
        return path

    @staticmethod
    def write_csv(path: Path, header: Sequence[str], rows: np.ndarray) -> Path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([OutputService.format_number(value) for value in row])
        return path

    @staticmethod
    def column_name(label: str) -> str:
        return label.replace(",", "")

    @staticmethod
    def trajectory_table(trajectory: Trajectory, stride: int = 1) -> Table:
        """t, then P_<label> per basis ket, then re_/im_ amplitude pairs."""
        sampled = trajectory.strided(stride)
        names = [OutputService.column_name(label) for label in sampled.labels]
        header = ["t"] + [f"P_{name}" for name in names]
        columns = [sampled.times, *sampled.populations.T]
        for name, amplitudes in zip(names, sampled.amplitudes.T):
            header += [f"re_{name}", f"im_{name}"]
            columns += [amplitudes.real, amplitudes.imag]
        return header, np.column_stack(columns)

    @staticmethod
    def write(output: ScenarioOutput, directory: Path, output_config: dict) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        if output.trajectory is not None and output_config["emit_trajectory"]:
            written.append(OutputService.write_csv(directory / "trajectory.csv", *output.trajectory))
        if output.plotdata is not None and output_config["emit_plotdata"]:
            written.append(OutputService.write_csv(directory / "plotdata.csv", *output.plotdata))
        for name, table in output.tables.items():
            written.append(OutputService.write_csv(directory / name, *table))
        if output_config["emit_summary"]:
            written.append(OutputService.write_json(directory / "summary.json", output.summary))
        logger.info(f"Wrote {len(written)} file(s) to {directory}")
        return written


class ScenarioService:

    @staticmethod
    def load_config(
        source: Union[dict, str, Path], dt: Optional[float] = None
    ) -> tuple[Optional[dict], Optional[dict]]:
        """Validate a config dict or JSON file; ``dt`` overrides the integrator step."""
        if isinstance(source, (str, Path)):
            try:
                data = json.loads(Path(source).read_text(encoding="utf-8"))
            except OSError as ex:
                logger.warning(f"Cannot read config {source}: {str(ex)}")
                return None, {"config": [f"Cannot read {source}: {ex.strerror or ex}"]}
            except json.JSONDecodeError as ex:
                logger.warning(f"Config {source} is not valid JSON: {str(ex)}")
                return None, {"config": [f"Invalid JSON in {source}: {ex}"]}
        else:
            data = source

        if dt is not None and isinstance(data, dict):
            integrator = data.get("integrator")
            data = {**data, "integrator": {**(integrator if isinstance(integrator, dict) else {}), "dt": dt}}

        serializer = ScenarioConfigSerializer(data=data)
        if not serializer.is_valid():
            logger.warning(f"Config validation failed: {dict(serializer.errors)}")
            return None, serializer.errors
        return dict(serializer.validated_data), None

    @staticmethod
    def output_directory(config: dict, out: Optional[Union[str, Path]] = None) -> Path:
        if out is not None:
            return Path(out)
        if config["output"]["directory"]:
            return Path(config["output"]["directory"])
        return Path(settings.OUTPUT_DIR)

    @staticmethod
    def execute(config: dict) -> ScenarioOutput:
        runners = {
            "single_qubit": ScenarioService._run_single_qubit,
            "two_qubit_transfer": ScenarioService._run_transfer,
            "two_qubit_fstirap": ScenarioService._run_fractional,
            "device_spectrum": ScenarioService._run_device,
        }
        output = runners[config["scenario_type"]](config)
        output.summary["scenario_type"] = config["scenario_type"]
        output.summary["config"] = config
        return output

    @staticmethod
    def run(config: dict, out: Optional[Union[str, Path]] = None) -> tuple[dict, list[Path]]:
        """Execute a validated config and write its files; returns (summary, paths)."""
        directory = ScenarioService.output_directory(config, out)
        try:
            output = ScenarioService.execute(config)
        except (ValueError, ArithmeticError) as ex:
            logger.error(f"{config['scenario_type']} run failed: {str(ex)}")
            raise
        written = OutputService.write(output, directory, config["output"])
        return output.summary, written

    @staticmethod
    def sweep(
        paths: Sequence[Union[str, Path]],
        out: Union[str, Path],
        dt: Optional[float] = None,
        workers: Optional[int] = None,
    ) -> list[tuple[str, int, str]]:
        """Run independent configs concurrently, each into ``out/<config stem>/``.

        Returns one (path, exit code, message) triple per config, in input order.
        """
        stems = [Path(path).stem for path in paths]
        duplicates = sorted({stem for stem in stems if stems.count(stem) > 1})
        if duplicates:
            raise ValueError(f"Sweep configs share output directories: {', '.join(duplicates)}")
        workers = workers or settings.SWEEP_WORKERS
        with ProcessPoolExecutor(max_workers=workers, initializer=django.setup) as pool:
            futures = [
                pool.submit(_sweep_one, str(path), str(Path(out) / stem), dt)
                for path, stem in zip(paths, stems)
            ]
            results = [future.result() for future in futures]
        failed = sum(1 for _, code, _ in results if code != EXIT_OK)
        logger.info(f"Sweep of {len(results)} config(s) finished, {failed} failed")
        return results

    @staticmethod
    def _pulse_columns(times: np.ndarray, *pulses: PulseEnvelope) -> list[np.ndarray]:
        return [np.abs(PulseService.sample(pulse, times)) for pulse in pulses]

    @staticmethod
    def _run_single_qubit(config: dict) -> ScenarioOutput:
        params, scale = config["params"], config["unit_scale"]
        angles = MixingAngles(params["phi"], params["eta"])
        if params["model"] == "rabi":
            design = RotationService.rabi_design(params["m"], params["delta"], params["Omega"] * scale)
            pulse = design.pulse()
        else:
            pulse = PulseSerializer.to_envelope(params["pulse"], scale)
            design = RamanConfig(pulse, params["Delta"] * scale, params["t_start"], params["t_end"])
        psi_i = StateVector(QUBIT_LABELS, params["psi_i"])

        result = RotationService.simulate_rotation(
            angles, design, psi_i, params["frame"], config["integrator"]["dt"]
        )
        trajectory = result.trajectory
        final = result.final_state
        summary = {
            "design": design.as_dict(),
            "delta": result.delta,
            "axis": list(result.spec.axis),
            "frame": result.frame,
            "final_P0": final.population("0"),
            "final_P1": final.population("1"),
            "final_Pe": result.excited_population,
            "max_Pe": result.max_excited_population,
            "fidelity": result.fidelity,
            "overlap": result.overlap,
            "target": result.target.amplitudes,
            "final_state": final.amplitudes,
            "norm_drift": trajectory.norm_drift,
            "validity_ratio": result.validity_ratio,
            "flags": list(result.flags),
        }

        sampled = trajectory.strided(config["output"]["stride"])
        plot_header = ["t", "abs_Omega", "P_0", "P_1", "P_e"]
        plot_rows = np.column_stack(
            [
                sampled.times,
                *ScenarioService._pulse_columns(sampled.times, pulse),
                *sampled.populations.T,
            ]
        )
        return ScenarioOutput(
            summary=summary,
            trajectory=OutputService.trajectory_table(trajectory, config["output"]["stride"]),
            plotdata=(plot_header, plot_rows),
        )

    @staticmethod
    def _cavity_params(params: dict, scale: float, pulse_A, pulse_B) -> CavitySystemParams:
        return CavitySystemParams(
            g=params["g"] * scale,
            pulse_A=pulse_A,
            pulse_B=pulse_B,
            t_start=params["t_start"],
            t_end=params["t_end"],
            Delta_prime=params["Delta_prime"] * scale,
            space=params["space"],
            n_max=params["n_max"],
        )

    @staticmethod
    def _cavity_output(config: dict, result: TransferResult, transfer_window) -> ScenarioOutput:
        params = result.params
        trajectory = result.trajectory
        window = (params.t_start, params.t_end)
        summary = {
            "fidelity_target": result.fidelity_target,
            "overlap": result.overlap,
            "final_populations": result.final_populations,
            "final_P_100": result.final_populations[ket("1", "0", 0)],
            "concurrence": result.concurrence,
            "adiabaticity_max": result.adiabaticity_max,
            "pulse_order": list(result.pulse_order),
            "cavity_peak_population": result.cavity_peak_population,
            "excited_peak_population": result.excited_peak_population,
            "dark_overlap_min": float(result.dark_overlap.min()),
            "pulse_areas": {
                "A": PulseService.pulse_area(params.pulse_A, *window),
                "B": PulseService.pulse_area(params.pulse_B, *window),
                "cavity": abs(params.g) * (params.t_end - params.t_start),
            },
            "transfer_window": transfer_window,
            "norm_drift": trajectory.norm_drift,
            "flags": list(result.flags),
        }

        stride = config["output"]["stride"]
        sampled = trajectory.strided(stride)
        dark_overlap = result.dark_overlap[::stride]
        if len(dark_overlap) < len(sampled.times):
            dark_overlap = np.append(dark_overlap, result.dark_overlap[-1])
        # nan marks samples where the metric is undefined (non-differentiable pulses)
        if params.pulse_A.is_differentiable and params.pulse_B.is_differentiable:
            adiabaticity = AdiabaticityService.adiabaticity_profile(params, sampled.times)
        else:
            adiabaticity = np.full(len(sampled.times), np.nan)

        plot_labels = TRANSFER_LABELS
        plot_header = ["t", "abs_Omega_A", "abs_Omega_B"]
        plot_header += [f"P_{OutputService.column_name(label)}" for label in plot_labels]
        plot_header += ["dark_overlap", "adiabaticity_metric"]
        plot_rows = np.column_stack(
            [
                sampled.times,
                *ScenarioService._pulse_columns(sampled.times, params.pulse_A, params.pulse_B),
                *[sampled.population_of(label) for label in plot_labels],
                dark_overlap,
                adiabaticity,
            ]
        )
        return ScenarioOutput(
            summary=summary,
            trajectory=OutputService.trajectory_table(trajectory, stride),
            plotdata=(plot_header, plot_rows),
        )

    @staticmethod
    def _run_transfer(config: dict) -> ScenarioOutput:
        params, scale = config["params"], config["unit_scale"]
        pulse_A = PulseSerializer.to_envelope(params["pulse_A"], scale)
        pulse_B = PulseSerializer.to_envelope(params["pulse_B"], scale)
        system = ScenarioService._cavity_params(params, scale, pulse_A, pulse_B)
        result = CavityService.run_transfer(
            system, params["c0"], params["c1"], config["integrator"]["dt"]
        )
        window = None
        if pulse_A.shape != "scaled_sum" and pulse_B.shape != "scaled_sum":
            window = abs(pulse_A.center - pulse_B.center)
        output = ScenarioService._cavity_output(config, result, window)
        output.summary["c0"], output.summary["c1"] = params["c0"], params["c1"]
        output.summary["transfer_duration"] = result.rise_time(ket("1", "0", 0))
        return output

    @staticmethod
    def _run_fractional(config: dict) -> ScenarioOutput:
        params, scale = config["params"], config["unit_scale"]
        pulse_A, pulse_B = CavityService.fractional_stirap_pulses(
            params["Omega_bar"] * scale,
            params["tau_A"],
            params["tau_B"],
            params["tau_p"],
            params["theta"],
            params["xi"],
        )
        system = ScenarioService._cavity_params(params, scale, pulse_A, pulse_B)
        result = CavityService.run_fractional_stirap(
            system, params["theta"], params["xi"], config["integrator"]["dt"]
        )
        output = ScenarioService._cavity_output(
            config, result, abs(params["tau_A"] - params["tau_B"])
        )
        output.summary["theta"], output.summary["xi"] = params["theta"], params["xi"]
        return output

    @staticmethod
    def _run_device(config: dict) -> ScenarioOutput:
        params = config["params"]
        grid = params["grid"]
        device = SquidParams(
            L=params["L"],
            C=params["C"],
            I_c=params["I_c"],
            Phi_x=params["Phi_x"],
            grid=GridSpec(grid["phi_min"], grid["phi_max"], grid["n_points"]) if grid else None,
        )
        spectrum = DeviceService.stationary_states(device, params["n_levels"])
        summary = {
            "device": device.as_dict(),
            "beta_L": device.beta_L,
            "plasma_frequency": device.plasma_frequency,
            "energies": spectrum.energies,
            "minima_phi": list(spectrum.minima_phi),
            "barrier_phi": spectrum.barrier_phi,
            "barrier_top": spectrum.barrier_top,
            "well_assignments": list(spectrum.well_assignments),
            "classification": None,
            "flags": [],
        }
        try:
            levels = DeviceService.classify_levels(spectrum)
        except (NoDoubleWellError, NoExcitedLevelError) as ex:
            summary["classification_error"] = str(ex)
        else:
            summary["classification"] = {
                "idx0": levels.idx0,
                "idx1": levels.idx1,
                "idxE": levels.idxE,
                "degenerate": levels.degenerate,
            }
            if levels.degenerate:
                summary["flags"].append("degenerate_wells")
            summary["transition_frequencies"] = DeviceService.transition_frequencies(spectrum, levels)
            summary["flux_matrix_elements"] = {
                "0e": DeviceService.flux_matrix_element(spectrum, levels.idx0, levels.idxE),
                "1e": DeviceService.flux_matrix_element(spectrum, levels.idx1, levels.idxE),
                "01": DeviceService.flux_matrix_element(spectrum, levels.idx0, levels.idx1),
            }

        phi = spectrum.phi
        wave_header = ["phi"] + [f"psi_{n}" for n in range(spectrum.n_levels)]
        return ScenarioOutput(
            summary=summary,
            tables={
                "potential.csv": (["phi", "U"], np.column_stack([phi, spectrum.potential])),
                "wavefunctions.csv": (wave_header, np.column_stack([phi, *spectrum.wavefunctions])),
            },
        )


def _sweep_one(path: str, out: str, dt: Optional[float]) -> tuple[str, int, str]:
    config, errors = ScenarioService.load_config(path, dt=dt)
    if errors:
        return path, EXIT_VALIDATION, format_errors(errors)
    try:
        _, written = ScenarioService.run(config, out)
    except (ValueError, ArithmeticError) as ex:
        return path, exit_code_for(ex), str(ex)
    return path, EXIT_OK, f"wrote {len(written)} file(s) to {out}"
