import unittest
from dataclasses import replace
from fractions import Fraction as F

from edfvd_lab.gen import GenParams, generate_task_set
from edfvd_lab.model import (
    Criticality,
    InvalidTaskSetError,
    ModelKind,
    Task,
    TaskSet,
    UtilizationSummary,
    ensure_valid,
    hyperperiod,
    utilizations,
    validate,
)


def lo(task_id, period, c_lo, c_hi, **kw):
    return Task(id=task_id, period=F(period), criticality=Criticality.LO, wcet_lo=F(c_lo), wcet_hi=F(c_hi), **kw)


def hi(task_id, period, c_lo, c_hi, **kw):
    return Task(id=task_id, period=F(period), criticality=Criticality.HI, wcet_lo=F(c_lo), wcet_hi=F(c_hi), **kw)


class TestUtilizations(unittest.TestCase):
    def test_two_task_example(self):
        ts = TaskSet((lo("tau1", 9, 4, 2), hi("tau2", 10, 4, 7)))
        u = utilizations(ts)
        self.assertEqual(u.u_lo_lo, F(4, 9))
        self.assertEqual(u.u_lo_hi, F(2, 9))
        self.assertEqual(u.u_hi_lo, F(2, 5))
        self.assertEqual(u.u_hi_hi, F(7, 10))
        self.assertEqual(u.per_task["tau2"], (F(2, 5), F(7, 10)))
        self.assertEqual(u.u_avg, (F(4, 9) + F(2, 5) + F(2, 9) + F(7, 10)) / 2)

    def test_emc_lo_task_uses_extended_period_in_high_mode(self):
        ts = TaskSet((lo("a", 10, 2, 2, extended_period=F(20)), hi("b", 10, 1, 3)), model_kind=ModelKind.EMC)
        u = utilizations(ts)
        self.assertEqual(u.u_lo_lo, F(1, 5))
        self.assertEqual(u.u_lo_hi, F(1, 10))

    def test_dropped_lo_task_contributes_nothing_in_high_mode(self):
        ts = TaskSet((lo("a", 10, 3, 0), hi("b", 10, 1, 3)))
        self.assertEqual(utilizations(ts).u_lo_hi, 0)

    def test_empty_set(self):
        u = utilizations(TaskSet(()))
        self.assertEqual((u.u_lo_lo, u.u_lo_hi, u.u_hi_lo, u.u_hi_hi), (0, 0, 0, 0))

    def test_from_values_rejects_negative(self):
        with self.assertRaises(ValueError):
            UtilizationSummary.from_values(F(1, 2), F(-1, 10), 0, 0)


class TestValidation(unittest.TestCase):
    def _fields(self, ts):
        return {(v.task_id, v.field) for v in validate(ts)}

    def test_valid_set_has_no_violations(self):
        ts = TaskSet((lo("a", 10, 4, 2, importance=F(3), mandatory_wcet=F(1)), hi("b", 10, 2, 5)))
        self.assertEqual(validate(ts), [])
        ensure_valid(ts)

    def test_hi_task_needs_wcet_lo_at_most_wcet_hi(self):
        self.assertIn(("b", "wcet_hi"), self._fields(TaskSet((hi("b", 10, 5, 4),))))

    def test_lo_task_needs_wcet_hi_at_most_wcet_lo(self):
        self.assertIn(("a", "wcet_hi"), self._fields(TaskSet((lo("a", 10, 2, 3),))))

    def test_mandatory_above_wcet_lo(self):
        self.assertIn(("a", "mandatory_wcet"), self._fields(TaskSet((lo("a", 10, 2, 0, mandatory_wcet=F(3)),))))

    def test_duplicate_ids(self):
        self.assertIn(("a", "id"), self._fields(TaskSet((lo("a", 10, 2, 1), hi("a", 10, 1, 2)))))

    def test_explicit_deadline_must_match_period(self):
        self.assertIn(("a", "deadline"), self._fields(TaskSet((lo("a", 10, 2, 1, deadline=F(8)),))))

    def test_emc_requires_extended_period_and_equal_budgets(self):
        ts = TaskSet((lo("a", 10, 2, 1),), model_kind=ModelKind.EMC)
        fields = self._fields(ts)
        self.assertIn(("a", "extended_period"), fields)
        self.assertIn(("a", "wcet_hi"), fields)

    def test_extended_period_below_period(self):
        ts = TaskSet((lo("a", 10, 2, 2, extended_period=F(5)),), model_kind=ModelKind.EMC)
        self.assertIn(("a", "extended_period"), self._fields(ts))

    def test_ensure_valid_collects_everything(self):
        ts = TaskSet((hi("b", 10, 5, 4), lo("a", 10, 2, 3)))
        with self.assertRaises(InvalidTaskSetError) as ctx:
            ensure_valid(ts)
        self.assertEqual(len(ctx.exception.violations), 2)
        with self.assertRaises(InvalidTaskSetError):
            utilizations(ts)


def scaled(task, k):
    return replace(
        task,
        period=task.period * k,
        deadline=task.period * k,
        wcet_lo=task.wcet_lo * k,
        wcet_hi=task.wcet_hi * k,
        mandatory_wcet=task.mandatory_wcet * k,
        extended_period=None if task.extended_period is None else task.extended_period * k,
    )


def generated_sets(model_kind, count=30):
    params = GenParams(model_kind=model_kind, period_range=(10, 100))
    return [generate_task_set(params.with_seed(seed)) for seed in range(1, count + 1)]


class TestUtilizationProperties(unittest.TestCase):
    def test_unstretched_emc_matches_imc_without_degradation(self):
        for ts in generated_sets(ModelKind.EMC):
            emc = TaskSet(tuple(replace(t, extended_period=t.period) if t.is_lo else t for t in ts), ModelKind.EMC)
            imc = TaskSet(
                tuple(replace(t, wcet_hi=t.wcet_lo, extended_period=None) if t.is_lo else t for t in ts),
                ModelKind.IMC,
            )
            self.assertEqual(utilizations(emc), utilizations(imc))

    def test_scaling_time_leaves_utilizations_unchanged(self):
        for model_kind in (ModelKind.IMC, ModelKind.EMC):
            for ts in generated_sets(model_kind):
                base = utilizations(ts)
                for k in (F(3), F(1, 7), F(5, 2)):
                    out = utilizations(TaskSet(tuple(scaled(t, k) for t in ts), model_kind))
                    self.assertEqual(out, base, msg=f"k={k}")

    def test_repeated_computation_is_identical(self):
        for model_kind in (ModelKind.IMC, ModelKind.EMC):
            for ts in generated_sets(model_kind):
                a, b = utilizations(ts), utilizations(ts)
                self.assertEqual(a, b)
                for name in ("u_lo_lo", "u_lo_hi", "u_hi_lo", "u_hi_hi"):
                    self.assertIsInstance(getattr(a, name), F)
                    self.assertEqual(getattr(a, name), getattr(b, name))


class TestTaskSetHelpers(unittest.TestCase):
    def test_hyperperiod(self):
        self.assertEqual(hyperperiod(TaskSet((lo("a", 9, 1, 1), hi("b", 10, 1, 2)))), 90)
        self.assertIsNone(hyperperiod(TaskSet((lo("a", F(5, 2), 1, 1),))))

    def test_replace_task_keeps_order(self):
        ts = TaskSet((lo("a", 10, 4, 2), hi("b", 10, 2, 5), lo("c", 10, 1, 1)))
        out = ts.replace_task(ts.task("a").with_wcet_hi(F(0)))
        self.assertEqual([t.id for t in out], ["a", "b", "c"])
        self.assertEqual(out.task("a").wcet_hi, 0)
        self.assertEqual(ts.task("a").wcet_hi, 2)

    def test_partitions(self):
        ts = TaskSet((lo("a", 10, 4, 2), hi("b", 10, 2, 5)))
        self.assertEqual([t.id for t in ts.lo_tasks], ["a"])
        self.assertEqual([t.id for t in ts.hi_tasks], ["b"])
        with self.assertRaises(KeyError):
            ts.task("zz")


if __name__ == "__main__":
    unittest.main()
