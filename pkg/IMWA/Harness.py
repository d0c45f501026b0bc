# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Experiment plans, paired-seed runs and ablation sweeps
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from logging import debug, info, error

from .Dataset import class_counts, generate_gaussian_mixture, DEFAULT_TEST_PER_CLASS
from .Exceptions import ImwaException, ParameterError
from .ExitCodes import EX_SOFTWARE
from .Metrics import GROUP_NAMES, evaluate
from .Network import LayerLayout, init_weights
from .Records import SummaryTable, mean_std
from .Trainer import CopyTracker, TrainerConfig, final_model, run_imwa, run_vanilla_mwa
from .Utils import STREAM_DATASET, STREAM_INIT, STREAM_LOADER, derive_seed

__all__ = ["Arm", "ARM_KINDS", "GaussianSource", "FixedSource",
           "TrainerTemplate", "ExperimentPlan", "RunResult", "SUMMARY_COLUMNS"]

ARM_KINDS = ("baseline", "baseline-2xT", "ema", "vanilla-mwa", "imwa", "imwa-ema")


class Arm(object):
    """One row of a comparison: a schedule trained for T * iteration_multiplier"""

    def __init__(self, name, schedule, iteration_multiplier=1, vanilla=False):
        if int(iteration_multiplier) != iteration_multiplier or iteration_multiplier < 1:
            raise ParameterError("Arm '%s': iteration multiplier must be an integer >= 1" % name)
        self.name = name
        self.schedule = schedule
        self.iteration_multiplier = int(iteration_multiplier)
        self.vanilla = bool(vanilla)

    @property
    def effective_schedule(self):
        if self.iteration_multiplier == 1:
            return self.schedule
        return self.schedule.scaled(self.iteration_multiplier)

    @property
    def total_iterations(self):
        """Iterations trained over all M models"""
        schedule = self.effective_schedule
        return schedule.num_models * schedule.total_iterations

    def to_record(self):
        return {"name": self.name, "schedule": self.schedule.to_record(),
                "iteration_multiplier": self.iteration_multiplier, "vanilla": self.vanilla}

    def __repr__(self):
        return "<Arm %s %r x%d>" % (self.name, self.schedule, self.iteration_multiplier)


def standard_arms(schedule, kinds=("baseline", "imwa")):
    """
    Build the named arms from the configured IMWA schedule. Arms that do
    not name EMA inherit schedule.use_ema; 'ema' and 'imwa-ema' force it.
    """
    plain = schedule.with_models(1).with_episodes(1)
    arms = []
    for kind in kinds:
        if kind == "baseline":
            arms.append(Arm(kind, plain))
        elif kind == "baseline-2xT":
            arms.append(Arm(kind, plain, iteration_multiplier=schedule.num_models))
        elif kind == "ema":
            arms.append(Arm(kind, plain.with_ema(True)))
        elif kind == "vanilla-mwa":
            arms.append(Arm(kind, schedule.with_episodes(1), vanilla=True))
        elif kind == "imwa":
            arms.append(Arm(kind, schedule))
        elif kind == "imwa-ema":
            arms.append(Arm(kind, schedule.with_ema(True)))
        else:
            raise ParameterError("Unknown arm '%s', expected one of: %s" % (kind, ", ".join(ARM_KINDS)))
    return arms
__all__.append("standard_arms")


class GaussianSource(object):
    """Long-tailed Gaussian mixture regenerated for every replication seed"""

    def __init__(self, spec, feature_dim, class_sep, test_per_class=DEFAULT_TEST_PER_CLASS):
        self.spec = spec
        self.feature_dim = int(feature_dim)
        self.class_sep = float(class_sep)
        self.test_per_class = int(test_per_class)

    @property
    def num_classes(self):
        return self.spec.num_classes

    def build(self, seed):
        return generate_gaussian_mixture(self.spec, self.feature_dim, self.class_sep,
                                         derive_seed(seed, STREAM_DATASET), self.test_per_class)

    def with_ratio(self, imbalance_ratio):
        return GaussianSource(self.spec.with_ratio(imbalance_ratio), self.feature_dim,
                              self.class_sep, self.test_per_class)

    def to_record(self):
        return {"kind": "gaussian", "num_classes": self.spec.num_classes,
                "head_count": self.spec.head_count, "imbalance_ratio": self.spec.imbalance_ratio,
                "feature_dim": self.feature_dim, "class_sep": self.class_sep,
                "test_per_class": self.test_per_class}


class FixedSource(object):
    """Datasets read from files; every seed sees the same samples"""

    def __init__(self, train, test=None, name=None):
        self.train = train
        self.test = test if test is not None else train
        self.name = name

    @property
    def num_classes(self):
        return max(self.train.num_classes, self.test.num_classes)

    @property
    def feature_dim(self):
        return self.train.feature_dim

    def build(self, seed):
        return self.train, self.test

    def with_ratio(self, imbalance_ratio):
        raise ParameterError("An imbalance sweep needs a generated dataset, not '%s'" % self.name)

    def to_record(self):
        return {"kind": "csv", "name": self.name, "train_size": len(self.train),
                "test_size": len(self.test)}


class TrainerTemplate(object):
    """
    Hyper-parameters shared by every model of every arm. learning_rates
    and data_seeds optionally give one value per model slot.
    """

    def __init__(self, learning_rate, momentum, batch_size, hidden_widths=(64,),
                 learning_rates=None, data_seeds=None):
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.batch_size = int(batch_size)
        self.hidden_widths = [int(w) for w in hidden_widths]
        self.learning_rates = learning_rates and [float(lr) for lr in learning_rates] or None
        self.data_seeds = data_seeds and [int(s) for s in data_seeds] or None

    def layout(self, feature_dim, num_classes):
        return LayerLayout.from_widths([feature_dim] + self.hidden_widths + [num_classes])

    def configs(self, seed, num_models):
        """
        Model m of every arm reads the same data stream for a given
        replication seed, so a baseline is paired with model 0.
        """
        for name, values in (("learning rates", self.learning_rates), ("data seeds", self.data_seeds)):
            if values is not None and len(values) < num_models:
                raise ParameterError("Got %d %s for M=%d models" % (len(values), name, num_models))
        retval = []
        for m in range(num_models):
            stream = self.data_seeds[m] if self.data_seeds else m
            lr = self.learning_rates[m] if self.learning_rates else self.learning_rate
            retval.append(TrainerConfig(derive_seed(seed, STREAM_LOADER, stream),
                                        lr, self.momentum, self.batch_size))
        return retval

    def to_record(self):
        return {"learning_rate": self.learning_rate, "momentum": self.momentum,
                "batch_size": self.batch_size, "hidden_widths": self.hidden_widths,
                "learning_rates": self.learning_rates, "data_seeds": self.data_seeds}


class ExperimentPlan(object):
    def __init__(self, arms, source, seeds, trainer, concurrent=False,
                 workers=1, probe_every=None, base_schedule=None):
        names = [arm.name for arm in arms]
        if not arms:
            raise ParameterError("Experiment plan has no arms")
        if len(set(names)) != len(names):
            raise ParameterError("Arm names must be unique, got: %s" % ", ".join(names))
        if not seeds:
            raise ParameterError("Experiment plan has no seeds")
        if len(set(seeds)) != len(seeds):
            raise ParameterError("Replication seeds must be distinct")
        if int(workers) < 1:
            raise ParameterError("workers must be >= 1, not %r" % workers)
        self.arms = list(arms)
        self.source = source
        self.seeds = [int(s) for s in seeds]
        self.trainer = trainer
        self.concurrent = bool(concurrent)
        self.workers = int(workers)
        self.probe_every = probe_every
        self.base_schedule = base_schedule or self.arms[-1].schedule

    def _replace(self, **changes):
        fields = dict(arms=self.arms, source=self.source, seeds=self.seeds,
                      trainer=self.trainer, concurrent=self.concurrent,
                      workers=self.workers, probe_every=self.probe_every,
                      base_schedule=self.base_schedule)
        fields.update(changes)
        return ExperimentPlan(**fields)

    def with_arms(self, arms):
        return self._replace(arms=arms)

    def with_source(self, source):
        return self._replace(source=source)

    def arm(self, name):
        for arm in self.arms:
            if arm.name == name:
                return arm
        raise ParameterError("No arm named '%s' in the plan" % name)

    def to_record(self):
        return {"arms": [arm.to_record() for arm in self.arms],
                "dataset": self.source.to_record(), "seeds": self.seeds,
                "trainer": self.trainer.to_record(), "concurrent": self.concurrent,
                "workers": self.workers, "probe_every": self.probe_every}


class RunResult(object):
    def __init__(self, arm, seed, report=None, records=None, wall_clock=0.0,
                 peak_copies=0, total_iterations=0, error=None, error_code=None,
                 initial_weights=None, weights=None, ema=None, labels=None):
        self.arm = arm
        self.seed = seed
        self.report = report
        self.records = records or []
        self.wall_clock = wall_clock
        self.peak_copies = peak_copies
        self.total_iterations = total_iterations
        self.error = error
        self.error_code = error_code
        self.initial_weights = initial_weights
        self.weights = weights
        self.ema = ema
        self.labels = dict(labels or {})

    @property
    def ok(self):
        return self.error is None

    @property
    def final_weights(self):
        return final_model(self.weights, self.ema)

    def to_record(self, with_timing=False):
        retval = {
            "record": "run",
            "arm": self.arm,
            "seed": self.seed,
            "labels": self.labels,
            "ok": self.ok,
            "error": self.error,
            "error_code": self.error_code,
            "report": self.report and self.report.to_record(),
            "episodes": [r.to_record(with_timing=with_timing) for r in self.records],
            "peak_copies": self.peak_copies,
            "total_iterations": self.total_iterations,
        }
        if with_timing:
            retval["wall_clock"] = self.wall_clock
        return retval

    def __repr__(self):
        if self.error is not None:
            return "<RunResult %s seed %d failed: %s>" % (self.arm, self.seed, self.error)
        return "<RunResult %s seed %d top1=%.4f>" % (self.arm, self.seed, self.report.top1)


def _run_one(plan, arm, seed, init, train, test, progress_factory=None):
    schedule = arm.effective_schedule
    tracker = CopyTracker()
    time_start = time.time()
    try:
        configs = plan.trainer.configs(seed, schedule.num_models)
        progress = None
        if progress_factory is not None:
            progress = progress_factory(arm.name, seed, schedule.num_models * schedule.total_iterations)
        runner = arm.vanilla and run_vanilla_mwa or run_imwa
        theta, omega, records = runner(init, train, schedule, configs, eval_set=test,
                                       concurrent=plan.concurrent, probe_every=plan.probe_every,
                                       tracker=tracker, progress=progress)
        report = evaluate(final_model(theta, omega), test, train.class_counts +
                          [0] * (init.layout.output_width - train.num_classes))
        if progress is not None:
            progress.done(u"top-1 %.4f" % report.top1)
    except ImwaException as e:
        error(u"Arm '%s' seed %d failed: %s" % (arm.name, seed, e))
        return RunResult(arm.name, seed, wall_clock=time.time() - time_start,
                         total_iterations=arm.total_iterations,
                         error=u"%s" % e, error_code=e.get_error_code(), initial_weights=init)
    except (ValueError, ArithmeticError, MemoryError) as e:
        error(u"Arm '%s' seed %d failed: %s" % (arm.name, seed, e))
        return RunResult(arm.name, seed, wall_clock=time.time() - time_start,
                         total_iterations=arm.total_iterations,
                         error=u"%s" % e, error_code=EX_SOFTWARE, initial_weights=init)
    return RunResult(arm.name, seed, report, records, time.time() - time_start,
                     tracker.peak, arm.total_iterations, initial_weights=init,
                     weights=theta, ema=omega)


def run_plan(plan, listener=None, progress_factory=None, labels=None):
    """
    Run every (arm, seed) pair of the plan. For a given seed all arms
    start from the same initial weights and the same dataset.

    Failed runs are returned with their error set; they never stop the
    remaining runs. Results come back in (arm, seed) plan order, and
    'listener' is called with each result as soon as it completes.
    Every result carries a copy of 'labels' (e.g. the swept value).
    """
    prepared = {}
    for seed in plan.seeds:
        train, test = plan.source.build(seed)
        layout = plan.trainer.layout(train.feature_dim, plan.source.num_classes)
        init = init_weights(layout, derive_seed(seed, STREAM_INIT))
        prepared[seed] = (init, train, test)
        debug(u"Seed %d: %r, init %s" % (seed, train, layout))

    jobs = [(arm, seed) for arm in plan.arms for seed in plan.seeds]
    results = {}

    def finished(result):
        result.labels = dict(labels or {})
        results[(result.arm, result.seed)] = result
        if result.ok:
            info(u"Arm '%s' seed %d: top-1 %.4f" % (result.arm, result.seed, result.report.top1))
        if listener is not None:
            listener(result)

    if plan.workers > 1 and len(jobs) > 1:
        # Progress meters would interleave on the terminal.
        with ThreadPoolExecutor(max_workers=plan.workers) as executor:
            futures = [executor.submit(_run_one, plan, arm, seed, *prepared[seed]) for (arm, seed) in jobs]
            for future in as_completed(futures):
                finished(future.result())
    else:
        for (arm, seed) in jobs:
            finished(_run_one(plan, arm, seed, *prepared[seed], progress_factory=progress_factory))

    return [results[(arm.name, seed)] for (arm, seed) in jobs]
__all__.append("run_plan")


def _by_arm(results):
    retval = {}
    for result in results:
        retval.setdefault(result.arm, []).append(result)
    return retval


def _paired_improvements(runs, baseline_runs):
    base = dict((r.seed, r.report.top1) for r in baseline_runs if r.ok)
    return [r.report.top1 - base[r.seed] for r in runs if r.ok and r.seed in base]


def _arm_row(arm, runs, baseline_runs):
    good = [r for r in runs if r.ok]
    mean, std = mean_std([r.report.top1 for r in good])
    row = {"arm": arm.name, "n": len(good), "failed": len(runs) - len(good),
           "mean_top1": mean, "std_top1": std,
           "total_iterations": arm.total_iterations,
           "peak_copies": max([r.peak_copies for r in good] or [0])}
    for idx, name in enumerate(GROUP_NAMES):
        row[name] = mean_std([r.report.group_acc[idx] for r in good
                              if r.report.group_acc[idx] is not None])[0]
    if baseline_runs is not None:
        row["improvement"], row["improvement_std"] = mean_std(_paired_improvements(runs, baseline_runs))
    return row


SUMMARY_COLUMNS = ["arm", "n", "failed", "mean_top1", "std_top1", "improvement",
                   "improvement_std", "many", "medium", "few", "total_iterations", "peak_copies"]


def summarize(plan, results, baseline="baseline", title="comparison"):
    """
    One row per arm: mean and sample std of top-1 over the successful
    seeds, group means and, when a baseline arm exists, the improvement
    over it paired by seed.
    """
    by_arm = _by_arm(results)
    baseline_runs = by_arm.get(baseline)
    table = SummaryTable(title, SUMMARY_COLUMNS)
    for arm in plan.arms:
        table.add_row(_arm_row(arm, by_arm.get(arm.name, []), baseline_runs))
    return table
__all__.append("summarize")


def _baseline_arm(plan):
    return standard_arms(plan.base_schedule, ["baseline"])[0]


def ablate_E(plan, values, listener=None, progress_factory=None):
    """IMWA arm per episode count, next to the plain baseline; returns (table, results)"""
    schedule = plan.base_schedule
    for value in values:
        if int(value) != value or value < 1 or value > schedule.total_iterations:
            raise ParameterError("Episode count %r must be within 1..T (T=%d)" % (value, schedule.total_iterations))
    arms = [_baseline_arm(plan)] + [Arm("E=%d" % v, schedule.with_episodes(int(v))) for v in values]
    sub_plan = plan.with_arms(arms)
    results = run_plan(sub_plan, listener, progress_factory)
    table = summarize(sub_plan, results, title="ablate-e")
    for row in table.rows:
        row["E"] = sub_plan.arm(row["arm"]).schedule.num_episodes
    table.columns.insert(1, "E")
    return table, results
__all__.append("ablate_E")


def ablate_M(plan, values, listener=None, progress_factory=None):
    """IMWA arm per model count; M=1 is plain training split into episodes"""
    schedule = plan.base_schedule
    for value in values:
        if int(value) != value or value < 1:
            raise ParameterError("Model count %r must be an integer >= 1" % value)
    arms = [_baseline_arm(plan)] + [Arm("M=%d" % v, schedule.with_models(int(v))) for v in values]
    sub_plan = plan.with_arms(arms)
    results = run_plan(sub_plan, listener, progress_factory)
    table = summarize(sub_plan, results, title="ablate-m")
    for row in table.rows:
        row["M"] = sub_plan.arm(row["arm"]).schedule.num_models
    table.columns.insert(1, "M")
    return table, results
__all__.append("ablate_M")


def ablate_gamma(plan, values, listener=None, progress_factory=None):
    """
    For every imbalance ratio regenerate the datasets under the same seed
    protocol and compare baseline against IMWA, paired by seed.
    """
    for value in values:
        if not value >= 1.0:
            raise ParameterError("Imbalance ratio %r must be >= 1" % value)
    arms = standard_arms(plan.base_schedule, ["baseline", "imwa"])
    columns = ["gamma", "head_tail_ratio", "n", "baseline_top1", "imwa_top1",
               "improvement", "improvement_std", "few_improvement"]
    table = SummaryTable("ablate-gamma", columns)
    all_results = []
    for value in values:
        source = plan.source.with_ratio(float(value))
        counts = class_counts(source.spec)
        sub_plan = plan.with_arms(arms).with_source(source)
        results = run_plan(sub_plan, listener, progress_factory, labels={"gamma": float(value)})
        all_results.extend(results)
        by_arm = _by_arm(results)
        base_runs = by_arm.get("baseline", [])
        imwa_runs = by_arm.get("imwa", [])
        paired = _paired_improvements(imwa_runs, base_runs)
        base_few = dict((r.seed, r.report.group_acc[2]) for r in base_runs if r.ok)
        few = [r.report.group_acc[2] - base_few[r.seed] for r in imwa_runs
               if r.ok and base_few.get(r.seed) is not None and r.report.group_acc[2] is not None]
        improvement, improvement_std = mean_std(paired)
        table.add_row({
            "gamma": float(value),
            "head_tail_ratio": counts[0] / counts[-1],
            "n": len(paired),
            "baseline_top1": mean_std([r.report.top1 for r in base_runs if r.ok])[0],
            "imwa_top1": mean_std([r.report.top1 for r in imwa_runs if r.ok])[0],
            "improvement": improvement,
            "improvement_std": improvement_std,
            "few_improvement": mean_std(few)[0],
        })
    return table, all_results
__all__.append("ablate_gamma")

# vim:et:ts=4:sts=4:ai
