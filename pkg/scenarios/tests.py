import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from .registry import BUILTIN_SCENARIOS, builtin_config, scenario_names
from .serializers import ComplexField, PulseSerializer, ScenarioConfigSerializer
from .services import EXIT_OK, OutputService, ScenarioService, format_errors


def run_command(*args, **kwargs) -> str:
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO(), **kwargs)
    return out.getvalue()


def read_summary(directory) -> dict:
    return json.loads((Path(directory) / "summary.json").read_text(encoding="utf-8"))


class ComplexFieldTests(SimpleTestCase):

    def test_accepts_number_and_pair(self):
        field = ComplexField()
        self.assertEqual(field.to_internal_value(2), 2 + 0j)
        self.assertEqual(field.to_internal_value([0.5, -1.5]), 0.5 - 1.5j)
        self.assertEqual(field.to_representation(1 - 2j), [1.0, -2.0])

    def test_rejects_other_shapes(self):
        serializer = PulseSerializer(data={"shape": "gaussian", "amplitude": [1, 2, 3], "width": 1.0})
        self.assertFalse(serializer.is_valid())
        self.assertIn("amplitude", serializer.errors)
        for bad in (True, "1+2j", [1, "x"]):
            serializer = PulseSerializer(data={"shape": "gaussian", "amplitude": bad, "width": 1.0})
            self.assertFalse(serializer.is_valid(), bad)


class ConfigSerializerTests(SimpleTestCase):

    def test_builtin_configs_validate(self):
        for name in scenario_names():
            config, errors = ScenarioService.load_config(builtin_config(name))
            self.assertIsNone(errors, name)
            self.assertEqual(config["scenario_type"], BUILTIN_SCENARIOS[name][1]["scenario_type"])

    def test_defaults_are_applied(self):
        config, _ = ScenarioService.load_config(builtin_config("fig4"))
        self.assertEqual(config["unit_scale"], 1.0)
        self.assertEqual(config["integrator"]["dt"], settings.DEFAULT_DT)
        self.assertEqual(config["output"]["stride"], settings.TRAJECTORY_STRIDE)
        self.assertFalse(config["output"]["emit_plotdata"])
        self.assertEqual(config["params"]["n_max"], 2)
        self.assertEqual(config["params"]["pulse_A"]["amplitude"], -2 + 0j)

    def test_non_positive_dt_names_the_field(self):
        for dt in (0.0, -1e-3):
            config, errors = ScenarioService.load_config(builtin_config("fig2"), dt=dt)
            self.assertIsNone(config)
            self.assertIn("dt", errors["integrator"])
            self.assertIn("integrator.dt", format_errors(errors))

    def test_missing_model_fields(self):
        data = builtin_config("fig2")
        del data["params"]["Omega"]
        serializer = ScenarioConfigSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        self.assertIn("Omega", serializer.errors["params"])

    def test_raman_needs_detuning(self):
        data = builtin_config("raman-demo")
        data["params"]["Delta"] = 0.0
        _, errors = ScenarioService.load_config(data)
        self.assertIn("Delta", errors["params"])

    def test_unnormalized_amplitudes(self):
        data = builtin_config("fig4")
        data["params"]["c1"] = 1.0
        _, errors = ScenarioService.load_config(data)
        self.assertIn("c1", errors["params"])
        data = builtin_config("fig2")
        data["params"]["psi_i"] = [1.0, 1.0]
        _, errors = ScenarioService.load_config(data)
        self.assertIn("psi_i", errors["params"])

    def test_pulse_shape_needs_its_width(self):
        data = builtin_config("fig4")
        del data["params"]["pulse_B"]["width"]
        _, errors = ScenarioService.load_config(data)
        self.assertIn("pulse_B", errors["params"])

    def test_nested_scaled_sum(self):
        data = {
            "shape": "scaled_sum",
            "terms": [
                {"coefficient": [0.0, 1.0], "pulse": {"shape": "sech", "amplitude": 2.0, "width": 1.5}},
                {"pulse": {"shape": "rectangular", "amplitude": 1.0, "center": 2.0, "duration": 1.0}},
            ],
        }
        serializer = PulseSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        pulse = PulseSerializer.to_envelope(serializer.validated_data, scale=2.0)
        self.assertAlmostEqual(pulse.evaluate(0.0), 4j, places=15)
        self.assertAlmostEqual(pulse.evaluate(2.0), 2.0 + 4j / math.cosh(2.0 / 1.5), places=12)

        data["terms"][1]["pulse"]["duration"] = -1.0
        serializer = PulseSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        self.assertIn("terms", serializer.errors)

    def test_unknown_scenario_type(self):
        _, errors = ScenarioService.load_config({"scenario_type": "three_qubit", "params": {}})
        self.assertIn("scenario_type", errors)

    def test_unreadable_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "broken.json"
            path.write_text("{not json", encoding="utf-8")
            _, errors = ScenarioService.load_config(path)
            self.assertIn("config", errors)
            _, errors = ScenarioService.load_config(Path(tmp) / "missing.json")
            self.assertIn("config", errors)


class RegistryTests(SimpleTestCase):

    def test_listing_order(self):
        self.assertEqual(scenario_names(), ["fig2", "fig4", "fig5", "device", "raman-demo"])

    def test_builtin_configs_are_copies(self):
        builtin_config("fig2")["params"]["Omega"] = 99.0
        self.assertEqual(builtin_config("fig2")["params"]["Omega"], 2.0)

    def test_unknown_name(self):
        with self.assertRaises(KeyError):
            builtin_config("fig3")


class OutputServiceTests(SimpleTestCase):

    def test_jsonable(self):
        data = {
            "z": 1 - 2j,
            "inf": math.inf,
            "nan": float("nan"),
            "arr": np.array([0.5, 1.5]),
            "flag": np.bool_(True),
            "n": np.int64(3),
            "pair": (np.complex128(0.25j),),
        }
        self.assertEqual(
            OutputService.jsonable(data),
            {
                "z": [1.0, -2.0],
                "inf": None,
                "nan": None,
                "arr": [0.5, 1.5],
                "flag": True,
                "n": 3,
                "pair": [[0.0, 0.25]],
            },
        )

    def test_json_layout(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = OutputService.write_json(Path(tmp) / "s.json", {"b": 1, "a": {"d": 0.1, "c": 2j}})
            text = path.read_bytes().decode("utf-8")
        self.assertTrue(text.endswith("}\n"))
        self.assertNotIn("\r", text)
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertLess(text.index('"c"'), text.index('"d"'))

    def test_csv_layout(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = OutputService.write_csv(
                Path(tmp) / "t.csv", ["t", "x"], np.array([[0.0, 0.1], [1.0, 1.0 / 3.0]])
            )
            text = path.read_bytes().decode("utf-8")
        self.assertEqual(
            text, "t,x\n0,0.10000000000000001\n1,0.33333333333333331\n"
        )

    def test_trajectory_columns(self):
        config, _ = ScenarioService.load_config(builtin_config("fig2"), dt=1e-2)
        output = ScenarioService.execute(config)
        header, rows = output.trajectory
        self.assertEqual(header[:4], ["t", "P_0", "P_1", "P_e"])
        self.assertEqual(header[4:], ["re_0", "im_0", "re_1", "im_1", "re_e", "im_e"])
        self.assertEqual(rows.shape[1], len(header))
        self.assertAlmostEqual(rows[-1, 0], math.pi * math.sqrt(3), places=12)


class RunCommandTests(SimpleTestCase):

    def test_rabi_inversion_scenario(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_command("run", scenario="fig2", out=tmp)
            summary = read_summary(tmp)
            self.assertTrue((Path(tmp) / "trajectory.csv").exists())
            self.assertFalse((Path(tmp) / "plotdata.csv").exists())
        self.assertGreaterEqual(summary["final_P1"], 0.999)
        self.assertLessEqual(summary["final_Pe"], 1e-3)
        self.assertGreater(summary["max_Pe"], 0.01)
        self.assertLessEqual(summary["norm_drift"], 1e-9)
        self.assertEqual(summary["config"]["params"]["m"], 2)
        self.assertEqual(summary["scenario_type"], "single_qubit")

    def test_transfer_scenario(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_command("run", scenario="fig4", out=tmp, dt=5e-3)
            summary = read_summary(tmp)
        self.assertGreaterEqual(summary["fidelity_target"], 0.95)
        self.assertGreaterEqual(summary["final_P_100"], 0.95)
        self.assertEqual(summary["transfer_window"], 6.0)
        self.assertGreaterEqual(summary["transfer_duration"], 10.0)
        self.assertLessEqual(summary["transfer_duration"], 30.0)
        self.assertEqual(summary["config"]["integrator"]["dt"], 5e-3)
        self.assertEqual(summary["flags"], [])

    def test_builtins_are_reproducible_and_norm_preserving(self):
        with tempfile.TemporaryDirectory() as tmp:
            for name in scenario_names():
                first, second = Path(tmp) / name / "first", Path(tmp) / name / "second"
                for directory in (first, second):
                    run_command("run", scenario=name, out=str(directory))
                files = sorted(path.name for path in first.iterdir())
                self.assertEqual(files, sorted(path.name for path in second.iterdir()))
                for file_name in files:
                    self.assertEqual(
                        (first / file_name).read_bytes(),
                        (second / file_name).read_bytes(),
                        f"{name}/{file_name}",
                    )
                summary = read_summary(first)
                if summary["scenario_type"] != "device_spectrum":
                    self.assertLessEqual(summary["norm_drift"], 1e-9, name)

    def test_config_file_with_plotdata(self):
        data = builtin_config("fig5")
        data["output"] = {"emit_plotdata": True, "stride": 50}
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "fig5.json"
            path.write_text(json.dumps(data), encoding="utf-8")
            run_command("run", config=str(path), out=tmp, dt=2e-3)
            summary = read_summary(tmp)
            lines = (Path(tmp) / "plotdata.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(
            lines[0],
            "t,abs_Omega_A,abs_Omega_B,P_010,P_e'10,P_111,P_1e'0,P_100,P_110,"
            "dark_overlap,adiabaticity_metric",
        )
        self.assertEqual(len(lines), 1 + 30000 // 50 + 1)
        for line in lines[1:]:
            self.assertEqual(len(line.split(",")), 11, line)
        metric = np.array([float(line.split(",")[-1]) for line in lines[1:]])
        self.assertTrue(np.all(np.isfinite(metric)))
        self.assertGreater(metric.max(), 0.0)
        self.assertGreaterEqual(summary["fidelity_target"], 0.95)
        self.assertGreaterEqual(summary["concurrence"], 0.9)
        self.assertEqual(summary["transfer_window"], 13.5)

    def test_rectangular_pulses_leave_metric_undefined(self):
        data = builtin_config("fig4")
        for name, center in (("pulse_A", 23.0), ("pulse_B", 17.0)):
            data["params"][name] = {
                "shape": "rectangular", "amplitude": -2.0, "center": center, "duration": 10.0
            }
        data["output"] = {"emit_plotdata": True, "stride": 100}
        config, errors = ScenarioService.load_config(data, dt=1e-2)
        self.assertIsNone(errors)
        header, rows = ScenarioService.execute(config).plotdata
        self.assertEqual(header[-1], "adiabaticity_metric")
        self.assertEqual(rows.shape, (41, len(header)))
        self.assertTrue(np.all(np.isnan(rows[:, -1])))

    def test_non_positive_dt_is_a_validation_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                run_command("run", scenario="fig2", out=tmp, dt=0.0)
            self.assertFalse((Path(tmp) / "summary.json").exists())
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("integrator.dt", str(ctx.exception))

    def test_infeasible_design_is_a_validation_error(self):
        data = builtin_config("fig2")
        data["params"]["delta"] = 5 * math.pi
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_text(json.dumps(data), encoding="utf-8")
            with self.assertRaises(CommandError) as ctx:
                run_command("run", config=str(path), out=tmp)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_numerical_failure_exit_code(self):
        data = builtin_config("device")
        data["params"]["grid"] = {"phi_min": -0.521, "phi_max": -0.481, "n_points": 201}
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "narrow.json"
            path.write_text(json.dumps(data), encoding="utf-8")
            with self.assertRaises(CommandError) as ctx:
                run_command("run", config=str(path), out=tmp)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_sweep_writes_one_directory_per_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = []
            for name in ("fig2", "raman-demo"):
                path = Path(tmp) / f"{name}.json"
                path.write_text(json.dumps(builtin_config(name)), encoding="utf-8")
                paths.append(str(path))
            out = Path(tmp) / "runs"
            results = ScenarioService.sweep(paths, out, dt=1e-2, workers=2)
            self.assertEqual([code for _, code, _ in results], [EXIT_OK, EXIT_OK])
            for name in ("fig2", "raman-demo"):
                self.assertTrue((out / name / "summary.json").exists())
            raman = read_summary(out / "raman-demo")
        self.assertEqual(raman["flags"], [])
        self.assertLessEqual(raman["validity_ratio"], 0.05)
        self.assertGreaterEqual(raman["fidelity"], 0.99)


class ListScenariosCommandTests(SimpleTestCase):

    def test_lists_builtins_in_order(self):
        lines = run_command("list").splitlines()
        self.assertEqual(len(lines), 5)
        self.assertEqual([line.split()[0] for line in lines], scenario_names())


class DeviceSpectrumCommandTests(SimpleTestCase):

    def test_builtin_device(self):
        with tempfile.TemporaryDirectory() as tmp:
            run_command("device_spectrum", out=tmp)
            summary = read_summary(tmp)
            potential = (Path(tmp) / "potential.csv").read_text(encoding="utf-8").splitlines()
            waves = (Path(tmp) / "wavefunctions.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(potential[0], "phi,U")
        self.assertEqual(waves[0], "phi,psi_0,psi_1,psi_2,psi_3,psi_4,psi_5")
        self.assertEqual(len(potential), len(waves))
        self.assertEqual(summary["classification"]["idx0"], 0)
        self.assertEqual(summary["classification"]["idx1"], 1)
        self.assertGreater(summary["beta_L"], 1.0)
        frequencies = summary["transition_frequencies"]
        self.assertGreater(frequencies["0e"], frequencies["1e"])
        elements = summary["flux_matrix_elements"]
        self.assertGreater(abs(elements["0e"]), abs(elements["01"]))

    def test_rejects_other_scenario_types(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "fig2.json"
            path.write_text(json.dumps(builtin_config("fig2")), encoding="utf-8")
            with self.assertRaises(CommandError) as ctx:
                run_command("device_spectrum", config=str(path), out=tmp)
        self.assertEqual(ctx.exception.returncode, 2)
