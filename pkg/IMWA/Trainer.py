# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Episode training and iterative model weight averaging
##
## Every episode clones the current average into M trainers, trains
## each one for the episode length on its own data stream, then
## averages the trained students (and their EMA shadows).
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from logging import debug, info, warning

from .Averaging import EmaState, average_weights, average_arrays, ema_update, pairwise_l2
from .Dataset import new_loader, next_batch
from .Exceptions import ParameterError, NumericError
from .Metrics import evaluate
from .Network import SgdState, loss_and_grad, sgd_step
from .Utils import split_evenly

__all__ = ["ImwaSchedule", "TrainerConfig", "EpisodeRecord", "ProbeRecord",
           "CopyTracker", "DEFAULT_EMA_LAMBDA", "train_episode", "run_imwa",
           "run_vanilla_mwa", "final_model"]

DEFAULT_EMA_LAMBDA = 0.999


class ImwaSchedule(object):
    """T total iterations per model, split into E episodes over M models"""

    def __init__(self, total_iterations, num_episodes, num_models,
                 ema_lambda=None, use_ema=False, carry_momentum=False):
        for name, value in (("total_iterations", total_iterations),
                            ("num_episodes", num_episodes),
                            ("num_models", num_models)):
            if int(value) != value or value < 1:
                raise ParameterError("%s must be an integer >= 1, not %r" % (name, value))
        if num_episodes > total_iterations:
            raise ParameterError("num_episodes (%d) cannot exceed total_iterations (%d)"
                                 % (num_episodes, total_iterations))
        if ema_lambda is None:
            ema_lambda = DEFAULT_EMA_LAMBDA
        if not (0.0 <= ema_lambda <= 1.0):
            raise ParameterError("ema_lambda must be in [0, 1], not %r" % ema_lambda)
        self.total_iterations = int(total_iterations)
        self.num_episodes = int(num_episodes)
        self.num_models = int(num_models)
        self.ema_lambda = float(ema_lambda)
        self.use_ema = bool(use_ema)
        self.carry_momentum = bool(carry_momentum)

    def episode_lengths(self):
        return split_evenly(self.total_iterations, self.num_episodes)

    def _replace(self, **changes):
        fields = dict(total_iterations=self.total_iterations, num_episodes=self.num_episodes,
                      num_models=self.num_models, ema_lambda=self.ema_lambda,
                      use_ema=self.use_ema, carry_momentum=self.carry_momentum)
        fields.update(changes)
        return ImwaSchedule(**fields)

    def with_episodes(self, num_episodes):
        return self._replace(num_episodes=num_episodes)

    def with_models(self, num_models):
        return self._replace(num_models=num_models)

    def with_ema(self, use_ema):
        return self._replace(use_ema=use_ema)

    def scaled(self, multiplier):
        return self._replace(total_iterations=self.total_iterations * int(multiplier))

    def to_record(self):
        return {"total_iterations": self.total_iterations, "num_episodes": self.num_episodes,
                "num_models": self.num_models, "ema_lambda": self.ema_lambda,
                "use_ema": self.use_ema, "carry_momentum": self.carry_momentum}

    def __repr__(self):
        return "<ImwaSchedule T=%d E=%d M=%d ema=%s>" % (
            self.total_iterations, self.num_episodes, self.num_models,
            self.use_ema and self.ema_lambda or "off")


class TrainerConfig(object):
    """Per-model hyper-parameters H_m; the data seed fixes the sample order"""

    def __init__(self, data_seed, learning_rate, momentum, batch_size):
        self.data_seed = int(data_seed)
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        self.batch_size = int(batch_size)

    def new_sgd_state(self, weights):
        return SgdState.for_weights(weights, self.learning_rate, self.momentum)

    def __repr__(self):
        return "<TrainerConfig seed=%d lr=%g momentum=%g batch=%d>" % (
            self.data_seed, self.learning_rate, self.momentum, self.batch_size)


class ProbeRecord(object):
    """Average of the trainers' snapshots taken mid-episode, never fed back"""

    def __init__(self, iteration, average_top1, best_individual_top1):
        self.iteration = iteration
        self.average_top1 = average_top1
        self.best_individual_top1 = best_individual_top1
        self.improvement = average_top1 - best_individual_top1

    def to_record(self):
        return {"iteration": self.iteration, "average_top1": self.average_top1,
                "best_individual_top1": self.best_individual_top1,
                "improvement": self.improvement}


class EpisodeRecord(object):
    def __init__(self, episode, length, weights, ema, distances,
                 average_report=None, individual_reports=None,
                 wall_clock=0.0, probes=None):
        self.episode = episode
        self.length = length
        self.weights = weights
        self.ema = ema
        self.distances = distances
        self.average_report = average_report
        self.individual_reports = individual_reports or []
        self.wall_clock = wall_clock
        self.probes = probes or []

    def to_record(self, with_timing=True):
        retval = {
            "episode": self.episode,
            "length": self.length,
            "average_top1": self.average_report and self.average_report.top1,
            "individual_top1": [r.top1 for r in self.individual_reports],
            "distances": self.distances,
            "probes": [p.to_record() for p in self.probes],
        }
        if with_timing:
            retval["wall_clock"] = self.wall_clock
        return retval


class CopyTracker(object):
    """Counts live model copies (a student and its EMA shadow count as one)"""

    def __init__(self):
        self._lock = threading.Lock()
        self.live = 0
        self.peak = 0

    def acquire(self, count=1):
        with self._lock:
            self.live += count
            self.peak = max(self.peak, self.live)

    def release(self, count=1):
        with self._lock:
            self.live -= count


def train_episode(weights, ema, dataset, config, loader, iterations, sgd_state=None,
                  start_iteration=0):
    """
    Run 'iterations' steps of next_batch -> loss_and_grad -> sgd_step,
    followed by an EMA update when 'ema' is given. A numeric failure
    names the 1-based iteration of the whole run, offset by start_iteration.

    Returns (weights, ema, loader, sgd_state); threading the returned
    loader and SGD state into the next call continues the same run.
    """
    if iterations < 1:
        raise ParameterError("An episode needs at least one iteration, not %r" % iterations)
    if loader is None:
        loader = new_loader(dataset, config.data_seed, config.batch_size)
    if sgd_state is None:
        sgd_state = config.new_sgd_state(weights)
    for step in range(iterations):
        batch, loader = next_batch(dataset, loader)
        loss, grad = loss_and_grad(weights, batch)
        try:
            weights, sgd_state = sgd_step(weights, grad, sgd_state)
        except NumericError as e:
            raise NumericError(u"%s (model with data seed %d)" % (e, config.data_seed),
                               iteration=start_iteration + step + 1)
        if ema is not None:
            ema = ema_update(ema, weights)
    debug("train_episode: seed %d, %d iterations, last batch loss %.6f"
          % (config.data_seed, iterations, loss))
    return weights, ema, loader, sgd_state


def final_model(weights, ema):
    """The deployed model: the EMA weights when present, else the students"""
    return ema if ema is not None else weights


def _check_run(init, dataset, schedule, configs):
    if len(configs) != schedule.num_models:
        raise ParameterError("Schedule has M=%d models but %d trainer configs were given"
                             % (schedule.num_models, len(configs)))
    if init.layout.input_width != dataset.feature_dim:
        raise ParameterError("Model input width %d does not match feature dimension %d"
                             % (init.layout.input_width, dataset.feature_dim))
    if init.layout.output_width < dataset.num_classes:
        raise ParameterError("Model predicts %d classes, dataset has %d"
                             % (init.layout.output_width, dataset.num_classes))
    seeds = [c.data_seed for c in configs]
    if len(set(seeds)) != len(seeds):
        warning("Trainer data seeds are not distinct (%s); those models will follow identical trajectories"
                % ", ".join("%d" % s for s in seeds))


def run_imwa(init, dataset, schedule, configs, eval_set=None, concurrent=False,
             probe_every=None, tracker=None, train_counts=None, progress=None):
    """
    Iterative model weight averaging.

    Returns (theta_E, omega_E or None, [EpisodeRecord, ...]). The loader of
    model m persists across episodes. With M > 1 the SGD velocity restarts
    from zero every episode unless schedule.carry_momentum, in which case
    the velocities are averaged like the weights. A single model always
    keeps its velocity.
    """
    _check_run(init, dataset, schedule, configs)
    if probe_every is not None and probe_every < 1:
        raise ParameterError("probe_every must be >= 1, not %r" % probe_every)
    if tracker is None:
        tracker = CopyTracker()
    if train_counts is None:
        train_counts = dataset.class_counts + [0] * (init.layout.output_width - dataset.num_classes)

    num_models = schedule.num_models
    loaders = [new_loader(dataset, c.data_seed, c.batch_size) for c in configs]
    velocity = None
    theta = init
    omega = init if schedule.use_ema else None
    records = []
    iterations_done = 0
    tracker.acquire()
    progress_lock = threading.Lock()

    def train_member(m, length):
        config = configs[m]
        weights = theta.copy()
        ema = EmaState(omega.copy(), schedule.ema_lambda) if omega is not None else None
        if velocity is not None:
            sgd_state = SgdState(config.learning_rate, config.momentum, velocity=velocity)
        else:
            sgd_state = config.new_sgd_state(weights)
        tracker.acquire()
        loader = loaders[m]
        snapshots = []
        chunks = [length]
        if probe_every and probe_every < length:
            chunks = [probe_every] * (length // probe_every)
            if length % probe_every:
                chunks.append(length % probe_every)
        done = iterations_done
        for idx, chunk in enumerate(chunks):
            weights, ema, loader, sgd_state = train_episode(
                weights, ema, dataset, config, loader, chunk, sgd_state, start_iteration=done)
            done += chunk
            if progress is not None:
                with progress_lock:
                    progress.update(delta_position=chunk)
            if idx < len(chunks) - 1:
                snapshots.append(final_model(weights, ema and ema.weights))
        return weights, ema, loader, sgd_state, snapshots

    for episode, length in enumerate(schedule.episode_lengths(), 1):
        time_start = time.time()
        if concurrent and num_models > 1:
            with ThreadPoolExecutor(max_workers=num_models) as executor:
                futures = [executor.submit(train_member, m, length) for m in range(num_models)]
                members = [f.result() for f in futures]
        else:
            members = [train_member(m, length) for m in range(num_models)]

        students = [member[0] for member in members]
        emas = [member[1].weights for member in members] if omega is not None else None
        for m, member in enumerate(members):
            loaders[m] = member[2]
        distances = pairwise_l2(students) if num_models > 1 else [0.0]

        new_theta = average_weights(students)
        new_omega = average_weights(emas) if emas is not None else None
        tracker.acquire()
        if schedule.carry_momentum or num_models == 1:
            velocity = average_arrays([member[3].velocity for member in members])

        average_report = None
        individual_reports = []
        probes = []
        if eval_set is not None:
            deployed = final_model(new_theta, new_omega)
            average_report = evaluate(deployed, eval_set, train_counts)
            individuals = emas if emas is not None else students
            individual_reports = [evaluate(w, eval_set, train_counts) for w in individuals]
            for idx, snapshot in enumerate(zip(*[member[4] for member in members])):
                probe_average = evaluate(average_weights(list(snapshot)), eval_set, train_counts)
                best = max(evaluate(w, eval_set, train_counts).top1 for w in snapshot)
                probes.append(ProbeRecord(iterations_done + (idx + 1) * probe_every,
                                          probe_average.top1, best))

        theta, omega = new_theta, new_omega
        tracker.release(num_models + 1)
        iterations_done += length
        record = EpisodeRecord(episode, length, theta, omega, distances,
                               average_report, individual_reports,
                               time.time() - time_start, probes)
        records.append(record)
        if average_report is not None:
            info(u"Episode %d/%d: averaged top-1 %.4f (individuals %s), L2 %s"
                 % (episode, schedule.num_episodes, average_report.top1,
                    ", ".join("%.4f" % r.top1 for r in individual_reports),
                    ", ".join("%.4f" % d for d in distances)))
        else:
            debug(u"Episode %d/%d done, L2 %s" % (episode, schedule.num_episodes, distances))

    tracker.release()
    return theta, omega, records


def run_vanilla_mwa(init, dataset, schedule, configs, eval_set=None, **kwargs):
    """Train M models once for T iterations and average them once (E = 1)"""
    return run_imwa(init, dataset, schedule.with_episodes(1), configs, eval_set, **kwargs)

# vim:et:ts=4:sts=4:ai
