import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from edfvd_lab.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, main, run

TWO_TASKS = {
    "model": "IMC",
    "tasks": [
        {"id": "tau1", "period": 9, "criticality": "LO", "wcet_lo": 4, "wcet_hi": 2},
        {"id": "tau2", "period": 10, "criticality": "HI", "wcet_lo": 4, "wcet_hi": 7},
    ],
}
SCHEDULABLE = {
    "tasks": [
        {"id": "tau1", "period": 10, "criticality": "LO", "wcet_lo": 6, "wcet_hi": 3},
        {"id": "tau2", "period": 10, "criticality": "HI", "wcet_lo": 1, "wcet_hi": 5},
    ],
}
DROP = {
    "tasks": [
        {"id": "tau1", "period": 10, "criticality": "LO", "wcet_lo": 2, "wcet_hi": 2, "importance": 1},
        {"id": "tau2", "period": 10, "criticality": "LO", "wcet_lo": 2, "wcet_hi": 1, "importance": 5},
        {"id": "tau3", "period": 10, "criticality": "HI", "wcet_lo": 2, "wcet_hi": 7},
    ],
}
OPTIMIZE = {
    "tasks": [
        {"id": "tau1", "period": 10, "criticality": "LO", "wcet_lo": 4, "wcet_hi": 0, "mandatory_wcet": 1},
        {"id": "tau2", "period": 10, "criticality": "HI", "wcet_lo": 2, "wcet_hi": 4},
    ],
}


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name, payload):
        path = self.dir / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return str(path)

    def test_analyze(self):
        code, out, _ = invoke(["analyze", self.write("ok.json", SCHEDULABLE)])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("SchedulableEDFVD", out)
        self.assertIn("tau2", out)

        code, out, _ = invoke(["analyze", self.write("two.json", TWO_TASKS)])
        self.assertEqual(code, EXIT_NEGATIVE)
        self.assertIn("empty_x_range", out)

    def test_input_errors(self):
        bad_model = {"tasks": [{"id": "a", "period": 10, "criticality": "HI", "wcet_lo": 5, "wcet_hi": 4}]}
        for path in (
            str(self.dir / "missing.json"),
            self.write("broken.json", "{oops"),
            self.write("invalid.json", bad_model),
        ):
            code, _, err = invoke(["analyze", path])
            self.assertEqual(code, EXIT_INPUT, msg=path)
            self.assertIn("运行失败", err)

    def test_unknown_subcommand(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                run(["fly"])
        self.assertEqual(ctx.exception.code, 2)

    def test_simulate_and_check(self):
        ts = self.write("two.json", TWO_TASKS)
        trace = str(self.dir / "trace.json")
        code, out, _ = invoke(
            ["simulate", ts, "--x", "7/10", "--scenario", "switch:tau2:1", "--horizon", "20", "--trace", trace, "--check"]
        )
        self.assertEqual(code, EXIT_OK, msg=out)
        self.assertIn("模式切换：14", out)
        self.assertEqual(json.loads(Path(trace).read_text(encoding="utf-8"))["mode_switch"], 14)

        code, out, _ = invoke(["check", ts, "--x", "7/10", "--trace", trace])
        self.assertEqual(code, EXIT_OK)

    def test_simulate_with_sampled_demands(self):
        ts = self.write("ok.json", SCHEDULABLE)
        code, out, _ = invoke(["simulate", ts, "--scenario", "switch:tau2:0@5", "--check"])
        self.assertEqual(code, EXIT_OK, msg=out)
        self.assertIn("场景 = switch:tau2:0@5", out)
        self.assertIn("模式切换：", out)
        self.assertIn("轨迹检查：0 项违规", out)

    def test_simulate_needs_x_for_rejected_set(self):
        code, _, err = invoke(["simulate", self.write("two.json", TWO_TASKS)])
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("--x", err)

    def test_optimize(self):
        ts = self.write("opt.json", OPTIMIZE)
        applied = self.dir / "applied.json"
        code, out, _ = invoke(["optimize", ts, "--x", "1/3", "--apply", str(applied)])
        self.assertEqual(code, EXIT_OK)
        plan = json.loads(out)
        self.assertEqual(plan["increments"], {"tau1": 4})
        self.assertEqual(plan["budget_cap"], "7/10")
        self.assertEqual(plan["wtq_before"], 0)
        tasks = json.loads(applied.read_text(encoding="utf-8"))["tasks"]
        self.assertEqual(tasks[0]["wcet_hi"], 4)

    def test_optimize_infeasible(self):
        payload = {
            "tasks": [
                {"id": "a", "period": 10, "criticality": "LO", "wcet_lo": 6, "wcet_hi": 0, "mandatory_wcet": 5},
                {"id": "h", "period": 10, "criticality": "HI", "wcet_lo": 1, "wcet_hi": 5},
            ]
        }
        code, _, err = invoke(["optimize", self.write("inf.json", payload), "--x", "1/4"])
        self.assertEqual(code, EXIT_NEGATIVE)
        self.assertIn("1/30", err)

    def test_optimize_x_above_high_mode_bound(self):
        payload = {
            "tasks": [
                {"id": "b", "period": 10, "criticality": "LO", "wcet_lo": 4, "wcet_hi": 2, "importance": 4},
                {"id": "a", "period": 10, "criticality": "LO", "wcet_lo": 2, "wcet_hi": 1, "importance": 4},
                {"id": "h", "period": 10, "criticality": "HI", "wcet_lo": 1, "wcet_hi": 5},
            ]
        }
        applied = self.dir / "applied.json"
        code, _, err = invoke(["optimize", self.write("hi.json", payload), "--x", "9/10", "--apply", str(applied)])
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("HI 模式上界", err)
        self.assertFalse(applied.exists())

    def test_drop(self):
        out_path = self.dir / "dropped.json"
        code, out, _ = invoke(["drop", self.write("drop.json", DROP), "--output", str(out_path)])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("丢弃顺序：tau1", out)
        tasks = json.loads(out_path.read_text(encoding="utf-8"))["tasks"]
        self.assertEqual(tasks[0]["wcet_hi"], 0)

    def test_speedup(self):
        code, out, _ = invoke(["speedup", "--alpha", "0.5", "--lambda", "0.5"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("f = 1.20"), msg=out)

        code, out, _ = invoke(["speedup", "--table"])
        lines = out.splitlines()
        self.assertEqual(lines[0], "lambda,alpha,f")
        self.assertEqual(len(lines), 50)

        code, out, _ = invoke(["speedup", "--max", "--step", "0.01"])
        self.assertEqual(code, EXIT_OK)
        self.assertIn("f* = 1.33", out)

        code, _, _ = invoke(["speedup", "--alpha", "0.5"])
        self.assertEqual(code, EXIT_INPUT)

    def test_generate(self):
        out_dir = self.dir / "sets"
        code, _, _ = invoke(["generate", "-n", "2", "--seed", "5", "--u-target", "0.6", "--out", str(out_dir)])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((out_dir / "taskset_0001.json").exists())
        self.assertTrue((out_dir / "taskset_0002.json").exists())
        manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
        self.assertEqual([s["seed"] for s in manifest["sets"]], [5, 6])
        self.assertEqual(manifest["params"]["u_target"], "3/5")

        code, out, _ = invoke(["analyze", str(out_dir / "taskset_0001.json")])
        self.assertIn(code, (EXIT_OK, EXIT_NEGATIVE))

    def test_sweep(self):
        cfg = self.write(
            "sweep.json",
            {"axis": "Uavg", "axis_values": [0.5, 0.9], "sets_per_point": 4, "tests": ["EDFVD", "WorstCaseEDF"], "seed": 3},
        )
        csv_path = self.dir / "out" / "sweep.csv"
        code, _, _ = invoke(["--quiet", "--threads", "2", "sweep", "--config", cfg, "--out", str(csv_path)])
        self.assertEqual(code, EXIT_OK)
        lines = csv_path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "axis,value,test,accepted,total,ratio,sim_misses")
        self.assertEqual(len(lines), 5)
        self.assertTrue(lines[1].startswith("Uavg,0.5,EDFVD,"))

        code, out, _ = invoke(["--quiet", "sweep", "--config", cfg, "--sets-per-point", "2"])
        self.assertEqual(code, EXIT_OK)
        self.assertIn(",2,", out.splitlines()[1])

    def test_sweep_config_errors(self):
        code, _, _ = invoke(["sweep", "--config", "no_such_sweep"])
        self.assertEqual(code, EXIT_INPUT)
        cfg = self.write("bad.json", {"axis": "Lambda", "axis_values": [2.0]})
        code, _, err = invoke(["sweep", "--config", cfg])
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("Lambda", err)

    def test_main_exits_with_code(self):
        with redirect_stdout(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["speedup", "--alpha", "1", "--lambda", "0"])
        self.assertEqual(ctx.exception.code, 0)


if __name__ == "__main__":
    unittest.main()
