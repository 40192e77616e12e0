import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from core.exceptions import ScenarioError
from core.trajectory import (
    CircularTrajectory,
    ConstantTrajectory,
    LinearTrajectory,
    ParabolicTrajectory,
    TabulatedTrajectory,
    position,
)
from simulation.runner import RunSettings, ScenarioRunner, resolve_settings
from simulation.scenario import (
    build_config,
    build_trajectory,
    dump_scenario,
    load_scenario,
    parse_scenario,
)
from utils import config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_dict(**overrides):
    data = {
        "schema_version": 1,
        "name": "unit",
        "aperture": {"num_elements": 33},
        "trajectory": {"kind": "parabolic", "z_start": 10.0, "z_end": 60.0, "alpha": 1e-3, "apex_x": 8.0},
        "design": {"method": "parabolic"},
        "grid": {"x_min": 0.0, "x_max": 20.0, "z_min": 1.0, "z_max": 60.0, "nx": 11, "nz": 7},
        "evaluation": {"gammas": [0.0, 0.1]},
    }
    data.update(overrides)
    return data


class TestParseScenario(unittest.TestCase):
    def test_defaults(self):
        scenario = parse_scenario(json.dumps(scenario_dict()))
        self.assertEqual(scenario.aperture.spacing, 0.5)
        self.assertEqual(scenario.design.samples_per_wavelength, 8)
        self.assertEqual(scenario.trajectory.orientation, 1)
        self.assertEqual(scenario.evaluation.baselines, [])
        self.assertEqual(scenario.primary_label, "tabs")

    def test_dump_and_parse_give_the_same_scenario(self):
        scenario = parse_scenario(json.dumps(scenario_dict(threads=2, output_dir="out")))
        self.assertEqual(parse_scenario(dump_scenario(scenario)), scenario)

    def test_baseline_primary_label(self):
        scenario = parse_scenario(json.dumps(scenario_dict(design={"method": "focus", "focal_z": 30.0})))
        self.assertEqual(scenario.primary_label, "focus")

    def test_invalid_documents(self):
        cases = [
            scenario_dict(schema_version=2),
            scenario_dict(extra_field=True),
            scenario_dict(design={"method": "circular"}),
            scenario_dict(design={"method": "beamsteer"}),
            scenario_dict(aperture={"num_elements": 0}),
            scenario_dict(evaluation={"gammas": []}),
            scenario_dict(evaluation={"gammas": [-0.1]}),
            scenario_dict(evaluation={"focal_z": 100.0}),
            scenario_dict(grid={"x_min": 5.0, "x_max": 1.0, "z_min": 1.0, "z_max": 2.0}),
            scenario_dict(trajectory={"kind": "tabulated", "z_start": 0.0, "z_end": 1.0}),
            scenario_dict(trajectory={"kind": "linear", "z_start": 5.0, "z_end": 1.0}),
        ]
        for data in cases:
            with self.assertRaises(ScenarioError):
                parse_scenario(json.dumps(data))

    def test_circle_must_be_centred_on_the_aperture_line(self):
        data = scenario_dict(trajectory={"kind": "circular", "z_start": 0.0, "z_end": 10.0,
                                         "radius": 20.0, "center_z": 1.0},
                             design={"method": "circular"})
        with self.assertRaises(ScenarioError):
            parse_scenario(json.dumps(data))

    def test_bad_json(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario("{not json", source="broken.json")
        self.assertIn("broken.json", str(ctx.exception))


class TestLoadScenario(unittest.TestCase):
    def test_shipped_scenarios_load(self):
        paths = sorted(SCENARIOS.glob("*.json"))
        self.assertGreaterEqual(len(paths), 5)
        for path in paths:
            scenario = load_scenario(path)
            self.assertTrue(scenario.description)
            self.assertEqual(scenario.output_dir, f"output/{scenario.name}")
            build_trajectory(scenario)

    def test_field_map_scenarios_correct_the_main_lobe(self):
        for name in ("circular_r80", "parabolic_a1e-4", "tabulated_parabola"):
            self.assertTrue(load_scenario(SCENARIOS / f"{name}.json").design.lobe_correction, name)
        self.assertFalse(load_scenario(SCENARIOS / "reference_parabolic_n1001.json").design.lobe_correction)

    def test_lobe_correction_reaches_the_designer(self):
        runner = ScenarioRunner(load_scenario(SCENARIOS / "circular_r80.json"),
                                RunSettings(output_dir=Path("unused"), threads=1, samples=100))
        # caustic radius 80 - 1.0233
        self.assertAlmostEqual(runner.design_profile().covered[0], 79.0, places=9)

    def test_table_path_is_relative_to_scenario(self):
        scenario = load_scenario(SCENARIOS / "tabulated_parabola.json")
        self.assertTrue(Path(scenario.trajectory.table_path).is_absolute())
        traj = build_trajectory(scenario)
        self.assertIsInstance(traj, TabulatedTrajectory)
        self.assertAlmostEqual(position(traj, 500.0), 525.0, delta=1e-9)

    def test_missing_files(self):
        with self.assertRaises(ScenarioError):
            load_scenario(SCENARIOS / "does_not_exist.json")
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "s.json"
            path.write_text(json.dumps(scenario_dict(
                trajectory={"kind": "tabulated", "z_start": 0.0, "z_end": 1.0, "table_path": "none.csv"},
                design={"method": "numeric"})))
            scenario = load_scenario(path)
            with self.assertRaises(ScenarioError):
                build_trajectory(scenario)


class TestBuilders(unittest.TestCase):
    def test_trajectory_kinds(self):
        kinds = {
            "constant": ({"x0": 3.0}, ConstantTrajectory),
            "linear": ({"slope": 0.5}, LinearTrajectory),
            "parabolic": ({"alpha": 1e-3, "orientation": -1}, ParabolicTrajectory),
            "circular": ({"radius": 80.0}, CircularTrajectory),
        }
        for kind, (fields, cls) in kinds.items():
            trajectory = {"kind": kind, "z_start": 0.0, "z_end": 50.0, **fields}
            scenario = parse_scenario(json.dumps(scenario_dict(trajectory=trajectory,
                                                               design={"method": "numeric"})))
            self.assertIsInstance(build_trajectory(scenario), cls)

    def test_config(self):
        cfg = build_config(parse_scenario(json.dumps(scenario_dict())))
        self.assertEqual(cfg.num_elements, 33)
        self.assertEqual(cfg.aperture_length, 16.0)


class TestResolveSettings(unittest.TestCase):
    def setUp(self):
        self.scenario = parse_scenario(json.dumps(scenario_dict(threads=3, output_dir="from_scenario")))

    def test_flags_override_scenario(self):
        settings = resolve_settings(self.scenario, out="flag_dir", threads=5, samples=400)
        self.assertEqual(settings.output_dir, Path("flag_dir"))
        self.assertEqual((settings.threads, settings.samples), (5, 400))

    def test_scenario_overrides_environment(self):
        with patch.object(config, "TABS_THREADS", "7"), patch.object(config, "TABS_SAMPLES", "900"):
            settings = resolve_settings(self.scenario)
        self.assertEqual(settings.output_dir, Path("from_scenario"))
        self.assertEqual((settings.threads, settings.samples), (3, 900))

    def test_environment_fallback(self):
        bare = parse_scenario(json.dumps(scenario_dict()))
        with patch.object(config, "TABS_THREADS", "7"), patch.object(config, "TABS_OUTPUT_DIR", "env_dir"):
            settings = resolve_settings(bare)
        self.assertEqual(settings.output_dir, Path("env_dir"))
        self.assertEqual(settings.threads, 7)

    def test_invalid_settings(self):
        with self.assertRaises(ScenarioError):
            resolve_settings(self.scenario, samples=10)
        with self.assertRaises(ScenarioError):
            resolve_settings(self.scenario, threads=0)
        bare = parse_scenario(json.dumps(scenario_dict()))
        with patch.object(config, "TABS_THREADS", "many"):
            with self.assertRaises(ScenarioError):
                resolve_settings(bare)


if __name__ == "__main__":
    unittest.main()
