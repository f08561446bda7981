import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

from edfvd_lab.config_loader import (
    debug_enabled,
    default_paths,
    load_generator_defaults,
    load_simulation_defaults,
    load_sweep_defaults,
    load_yaml,
)
from edfvd_lab.gen import GenParams
from edfvd_lab.sim import HorizonPolicy


class TestConfigLoader(unittest.TestCase):
    def test_repo_defaults(self):
        with mock.patch.dict(os.environ, {"EDFVD_LAB_CONFIG_DIR": "", "EDFVD_LAB_THREADS": ""}):
            gen = load_generator_defaults()
            sim = load_simulation_defaults()
            sweep = load_sweep_defaults()
        self.assertEqual(gen["period_range"], [100, 1000])
        params = GenParams.from_config(gen)
        self.assertEqual(str(params.lambda_), "1/2")
        policy = HorizonPolicy.from_config(sim)
        self.assertEqual((policy.hyperperiod_multiplier, policy.max_period_multiplier), (2, 20))
        self.assertEqual(set(sim), {"hyperperiod_multiplier", "max_period_multiplier"})
        self.assertEqual(sweep["sim_scenarios_per_set"], 5)
        self.assertEqual(sweep["threads"], 4)
        self.assertFalse(sweep["validate_with_sim"])

    def test_config_dir_override(self):
        with tempfile.TemporaryDirectory() as d:
            Path(d, "sweep.yaml").write_text("sweep:\n  threads: 2\n  seed: 11\n", encoding="utf-8")
            with mock.patch.dict(os.environ, {"EDFVD_LAB_CONFIG_DIR": d, "EDFVD_LAB_THREADS": ""}):
                self.assertEqual(default_paths().sweep_file("x"), Path(d) / "sweeps" / "x.json")
                self.assertEqual(load_sweep_defaults(), {"threads": 2, "seed": 11})
                # 缺失的文件退回内置默认值
                self.assertEqual(load_generator_defaults(), {})
                self.assertEqual(load_simulation_defaults(), {})

    def test_threads_env_override(self):
        with mock.patch.dict(os.environ, {"EDFVD_LAB_CONFIG_DIR": "", "EDFVD_LAB_THREADS": "7"}):
            self.assertEqual(load_sweep_defaults()["threads"], 7)
        with mock.patch.dict(os.environ, {"EDFVD_LAB_CONFIG_DIR": "", "EDFVD_LAB_THREADS": "many"}):
            self.assertEqual(load_sweep_defaults()["threads"], 4)

    def test_yaml_must_be_mapping(self):
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "bad.yaml"
            path.write_text("- 1\n- 2\n", encoding="utf-8")
            with self.assertRaises(ValueError):
                load_yaml(path)
            path.write_text("", encoding="utf-8")
            self.assertEqual(load_yaml(path), {})
            with self.assertRaises(FileNotFoundError):
                load_yaml(Path(d) / "missing.yaml")

    def test_debug_flag(self):
        with mock.patch.dict(os.environ, {"EDFVD_LAB_DEBUG": "1"}):
            self.assertTrue(debug_enabled())
        with mock.patch.dict(os.environ, {"EDFVD_LAB_DEBUG": "0"}):
            self.assertFalse(debug_enabled())


if __name__ == "__main__":
    unittest.main()
