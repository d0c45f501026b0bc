# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Line-delimited result records, plot series and text tables
##
## Every record is one JSON object per line with sorted keys, so
## serialize -> parse -> serialize is byte-stable.
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import io
import json
import logging
import os
import shutil
import threading
import time
from logging import debug, info, warning

import numpy as np

from . import PkgInfo
from .Checkpoint import write_checkpoint
from .Exceptions import DatasetError, ParameterError
from .Utils import format_timestamp, mkdir_with_parents, utc_now

__all__ = ["dumps_record", "loads_record", "RecordWriter", "read_records",
           "SummaryTable", "mean_std", "episode_series", "ablation_series",
           "RunDirectory", "read_manifest"]


def dumps_record(record):
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def loads_record(line):
    return json.loads(line)


class RecordWriter(object):
    """Single writer appending records to a .jsonl file, flushed per record"""

    def __init__(self, path, mode="w"):
        self.path = path
        self._lock = threading.Lock()
        self._fp = io.open(path, mode, encoding="UTF-8", newline="\n")

    def write(self, record):
        with self._lock:
            self._fp.write(dumps_record(record) + u"\n")
            self._fp.flush()

    def close(self):
        with self._lock:
            if self._fp is not None:
                self._fp.close()
                self._fp = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path):
    retval = []
    with io.open(path, "r", encoding="UTF-8") as fp:
        for line_no, line in enumerate(fp, 1):
            if not line.strip():
                continue
            try:
                retval.append(loads_record(line))
            except ValueError as e:
                raise DatasetError("Malformed record (%s)" % e, path, line_no)
    debug(u"Read %d records from %s" % (len(retval), path))
    return retval


def mean_std(values):
    """Mean and sample standard deviation (0.0 for a single value)"""
    values = np.asarray(values, dtype=np.float64)
    if not values.size:
        return None, None
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return mean, std


class SummaryTable(object):
    def __init__(self, title, columns, rows=None):
        self.title = title
        self.columns = list(columns)
        self.rows = list(rows or [])

    def add_row(self, row):
        self.rows.append(row)

    def to_records(self):
        return [dict(row, table=self.title) for row in self.rows]

    @staticmethod
    def _format_cell(value):
        if value is None:
            return u"-"
        if isinstance(value, bool):
            return value and u"yes" or u"no"
        if isinstance(value, float):
            return u"%.4f" % value
        return u"%s" % value

    def format_table(self):
        cells = [[self._format_cell(row.get(col)) for col in self.columns] for row in self.rows]
        widths = [max([len(col)] + [len(line[idx]) for line in cells])
                  for idx, col in enumerate(self.columns)]
        lines = [self.title,
                 u"  ".join(col.ljust(widths[idx]) for idx, col in enumerate(self.columns)),
                 u"  ".join(u"-" * w for w in widths)]
        for line in cells:
            lines.append(u"  ".join(cell.rjust(widths[idx]) for idx, cell in enumerate(line)))
        return u"\n".join(lines) + u"\n"


def _points(grouped):
    points = []
    for x in sorted(grouped):
        mean, std = mean_std(grouped[x])
        points.append([x, mean, std])
    return points


def episode_series(results):
    """
    (x, y, std) triples per arm: averaged-model top-1 and mean pairwise
    L2 distance per episode, and probe improvement per iteration.
    """
    by_arm = {}
    order = []
    for result in results:
        if result.error is not None:
            continue
        if result.arm not in by_arm:
            by_arm[result.arm] = ({}, {}, {})
            order.append(result.arm)
        accuracy, distance, probe = by_arm[result.arm]
        for record in result.records:
            if record.average_report is not None:
                accuracy.setdefault(record.episode, []).append(record.average_report.top1)
            distance.setdefault(record.episode, []).append(float(np.mean(record.distances)))
            for p in record.probes:
                probe.setdefault(p.iteration, []).append(p.improvement)
    retval = []
    for arm in order:
        accuracy, distance, probe = by_arm[arm]
        retval.append({"series": "episode_top1", "arm": arm, "points": _points(accuracy)})
        retval.append({"series": "episode_l2", "arm": arm, "points": _points(distance)})
        if probe:
            retval.append({"series": "probe_improvement", "arm": arm, "points": _points(probe)})
    return retval


def ablation_series(table, x_column, y_column="mean_top1", std_column="std_top1"):
    points = [[row[x_column], row[y_column], row[std_column]]
              for row in table.rows
              if row.get(y_column) is not None and row.get("arm") != "baseline"]
    return {"series": "%s:%s" % (table.title, x_column), "points": points}


class RunDirectory(object):
    """
    {output_dir}/{run_name}/ with results/, checkpoints/ and logs/.

    results/ only holds data that is identical across reruns with the
    same configuration; timing goes to logs/.
    """

    SUBDIRS = ("results", "checkpoints", "logs")

    def __init__(self, output_dir, run_name, command, config_record,
                 force=False, write_checkpoints=True):
        self.path = os.path.join(output_dir, run_name)
        self.command = command
        self.config_record = config_record
        self.force = force
        self.write_checkpoints = write_checkpoints
        self.collected = []
        self.finished = False
        self._init_written = set()
        self._episodes = None
        self._log_handler = None
        self._started = None

    def subdir(self, name):
        return os.path.join(self.path, name)

    def _prepare(self):
        if os.path.exists(self.path):
            if not self.force:
                raise ParameterError(u"Run directory '%s' already exists, use --force to overwrite" % self.path)
            if not os.path.isfile(os.path.join(self.path, "logs", "manifest.json")):
                raise ParameterError(u"Refusing to overwrite '%s': it does not look like a run directory" % self.path)
            warning(u"Overwriting run directory '%s'" % self.path)
            shutil.rmtree(self.path)
        for name in self.SUBDIRS:
            if not mkdir_with_parents(self.subdir(name)):
                raise IOError(u"Cannot create directory '%s'" % self.subdir(name))

    def __enter__(self):
        self._prepare()
        self._started = utc_now()
        self._log_handler = logging.FileHandler(os.path.join(self.subdir("logs"), "run.log"),
                                                encoding="UTF-8")
        formatter = logging.Formatter("%(asctime)s %(levelname)s: %(message)s", "%Y-%m-%dT%H:%M:%SZ")
        formatter.converter = time.gmtime
        self._log_handler.setFormatter(formatter)
        self._log_handler.setLevel(logging.INFO)
        logging.getLogger().addHandler(self._log_handler)
        self._episodes = RecordWriter(os.path.join(self.subdir("logs"), "episodes.jsonl"))
        self._write_manifest()
        info(u"Started '%s' in %s at %s" % (self.command, self.path, format_timestamp(self._started)))
        return self

    def __exit__(self, exc_type, exc_value, tb):
        if not self.finished:
            ## flush whatever completed before the failure
            warning(u"Run '%s' did not complete, writing %d finished runs" % (self.command, len(self.collected)))
            self._write_results(self.collected, [], [], complete=False)
            self._write_manifest(complete=False)
        self._episodes.close()
        logging.getLogger().removeHandler(self._log_handler)
        self._log_handler.close()

    def _write_manifest(self, complete=None):
        manifest = {
            "command": self.command,
            "package": PkgInfo.package,
            "version": PkgInfo.version,
            "config": self.config_record,
            "started": format_timestamp(self._started),
        }
        if complete is not None:
            manifest["finished"] = format_timestamp(utc_now())
            manifest["complete"] = complete
        with io.open(os.path.join(self.subdir("logs"), "manifest.json"), "w", encoding="UTF-8") as fp:
            fp.write(json.dumps(manifest, sort_keys=True, indent=2) + u"\n")

    def checkpoint_name(self, result, suffix):
        tags = u"".join(u"-%s%s" % (key, result.labels[key]) for key in sorted(result.labels))
        return os.path.join(self.subdir("checkpoints"), u"%s%s-s%d.%s.imwa" % (result.arm, tags, result.seed, suffix))

    def on_result(self, result):
        """Listener for run_plan(): log episodes with timing and save checkpoints right away"""
        self.collected.append(result)
        for record in result.records:
            self._episodes.write(dict(record.to_record(with_timing=True), arm=result.arm,
                                      seed=result.seed, labels=result.labels))
        self._episodes.write({"record": "run", "arm": result.arm, "seed": result.seed,
                              "labels": result.labels, "ok": result.ok, "error": result.error,
                              "wall_clock": result.wall_clock, "peak_copies": result.peak_copies})
        if not self.write_checkpoints:
            return
        if result.initial_weights is not None and result.seed not in self._init_written:
            write_checkpoint(os.path.join(self.subdir("checkpoints"), u"init-s%d.imwa" % result.seed),
                             result.initial_weights)
            self._init_written.add(result.seed)
        if result.ok:
            write_checkpoint(self.checkpoint_name(result, "theta"), result.weights)
            if result.ema is not None:
                write_checkpoint(self.checkpoint_name(result, "omega"), result.ema)

    def _write_results(self, results, tables, series, complete=True):
        with RecordWriter(os.path.join(self.subdir("results"), "results.jsonl")) as writer:
            for result in results:
                writer.write(result.to_record(with_timing=False))
            for table in tables:
                for row in table.to_records():
                    writer.write(dict(row, record="summary"))
            if not complete:
                writer.write({"record": "incomplete", "runs": len(results)})
        if series:
            with RecordWriter(os.path.join(self.subdir("results"), "series.jsonl")) as writer:
                for item in series:
                    writer.write(dict(item, record="series"))
        if tables:
            with io.open(os.path.join(self.subdir("results"), "summary.txt"), "w", encoding="UTF-8") as fp:
                for table in tables:
                    fp.write(table.format_table())

    def finish(self, results, tables, series=None):
        self._write_results(results, tables, series or [])
        self._write_manifest(complete=True)
        self.finished = True
        info(u"Results written to %s" % self.subdir("results"))


def read_manifest(run_path):
    path = os.path.join(run_path, "logs", "manifest.json")
    if not os.path.isfile(path):
        raise DatasetError(u"not a run directory, no logs/manifest.json", run_path)
    with io.open(path, "r", encoding="UTF-8") as fp:
        try:
            return json.load(fp)
        except ValueError as e:
            raise DatasetError(u"Malformed manifest (%s)" % e, path)

# vim:et:ts=4:sts=4:ai
