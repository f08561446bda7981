import json
import tempfile
import unittest
from fractions import Fraction as F
from pathlib import Path

from edfvd_lab.model import Criticality, ModelKind, validate
from edfvd_lab.parsing.taskset_json import (
    TaskSetFormatError,
    dump_task_set,
    load_task_set,
    task_set_from_dict,
    task_set_to_dict,
)
from edfvd_lab.utils.json_utils import format_rational, parse_rational


class TestRationalJson(unittest.TestCase):
    def test_parse_forms(self):
        self.assertEqual(parse_rational(4), F(4))
        self.assertEqual(parse_rational(0.1), F(1, 10))
        self.assertEqual(parse_rational("7/10"), F(7, 10))
        self.assertEqual(parse_rational(" 0.25 "), F(1, 4))

    def test_parse_rejects(self):
        for bad in (True, None, "", "abc", "1/0", [1]):
            with self.assertRaises(ValueError):
                parse_rational(bad)

    def test_format(self):
        self.assertEqual(format_rational(F(6, 3)), 2)
        self.assertEqual(format_rational(F(7, 10)), "7/10")


class TestTaskSetJson(unittest.TestCase):
    def test_defaults_and_enums(self):
        ts = task_set_from_dict(
            {
                "tasks": [
                    {"id": "tau1", "period": 9, "criticality": "lo", "wcet_lo": 4, "wcet_hi": "2"},
                    {"id": "tau2", "period": 10, "criticality": "HI", "wcet_lo": 4, "wcet_hi": 7},
                ]
            }
        )
        self.assertIs(ts.model_kind, ModelKind.IMC)
        t1 = ts.task("tau1")
        self.assertIs(t1.criticality, Criticality.LO)
        self.assertEqual(t1.importance, 1)
        self.assertEqual(t1.mandatory_wcet, 0)
        self.assertEqual(t1.deadline, 9)

    def test_emc_round_trip(self):
        data = {
            "model": "EMC",
            "tasks": [
                {"id": "a", "period": 10, "criticality": "LO", "wcet_lo": "5/2", "wcet_hi": "5/2", "extended_period": 25},
                {"id": "b", "period": 20, "criticality": "HI", "wcet_lo": 2, "wcet_hi": 6},
            ],
        }
        ts = task_set_from_dict(data)
        self.assertEqual(ts.task("a").extended_period, 25)
        self.assertEqual(validate(ts), [])
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "set.json"
            dump_task_set(ts, path)
            self.assertEqual(load_task_set(path), ts)
            raw = json.loads(path.read_text(encoding="utf-8"))
        self.assertEqual(raw["tasks"][0]["wcet_lo"], "5/2")
        self.assertEqual(task_set_to_dict(ts)["model"], "EMC")

    def test_missing_field(self):
        with self.assertRaises(TaskSetFormatError) as ctx:
            task_set_from_dict({"tasks": [{"id": "a", "period": 10, "criticality": "LO", "wcet_lo": 1}]})
        self.assertIn("wcet_hi", str(ctx.exception))

    def test_unknown_criticality_and_model(self):
        with self.assertRaises(TaskSetFormatError):
            task_set_from_dict({"tasks": [{"id": "a", "period": 10, "criticality": "MID", "wcet_lo": 1, "wcet_hi": 1}]})
        with self.assertRaises(TaskSetFormatError):
            task_set_from_dict({"model": "XMC", "tasks": []})

    def test_bad_number_and_shape(self):
        with self.assertRaises(TaskSetFormatError):
            task_set_from_dict({"tasks": [{"id": "a", "period": "ten", "criticality": "LO", "wcet_lo": 1, "wcet_hi": 1}]})
        with self.assertRaises(TaskSetFormatError):
            task_set_from_dict({"tasks": {}})

    def test_model_invariants_are_left_to_validate(self):
        ts = task_set_from_dict({"tasks": [{"id": "a", "period": 10, "deadline": 8, "criticality": "LO", "wcet_lo": 1, "wcet_hi": 1}]})
        self.assertEqual([v.field for v in validate(ts)], ["deadline"])

    def test_malformed_file(self):
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "bad.json"
            path.write_text("{not json", encoding="utf-8")
            with self.assertRaises(TaskSetFormatError):
                load_task_set(path)
            path.write_text("[1, 2]", encoding="utf-8")
            with self.assertRaises(TaskSetFormatError):
                load_task_set(path)


if __name__ == "__main__":
    unittest.main()
