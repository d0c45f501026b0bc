# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Run configuration
##
## Options are class attributes with their defaults; a Config instance
## holds the values of one invocation. Sources are applied in order
## default < config file < command line.
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, division

import io
import logging
import os
import re
import sys
from logging import debug, warning

from .Dataset import LongTailSpec, class_counts, ingest_csv
from .Exceptions import ConfigError, DatasetError, ParameterError
from .Harness import (ARM_KINDS, ExperimentPlan, FixedSource, GaussianSource,
                      TrainerTemplate, standard_arms)
from .Network import LayerLayout
from .Trainer import ImwaSchedule

__all__ = ["Config", "ConfigParser", "ConfigDumper", "is_bool_true", "is_bool_false"]

try:
    unicode
except NameError:
    # python 3 support
    unicode = str


def is_bool_true(value):
    """Check to see if a string is true, yes, on, or 1"""
    if isinstance(value, bool):
        return value
    return (u"%s" % value).lower() in ["true", "yes", "on", "1"]


def is_bool_false(value):
    """Check to see if a string is false, no, off, or 0"""
    if isinstance(value, bool):
        return not value
    return (u"%s" % value).lower() in ["false", "no", "off", "0"]


class Config(object):
    ## [dataset]
    source = u"gaussian"
    num_classes = 10
    head_count = 500
    imbalance_ratio = 10.0
    feature_dim = 16
    class_sep = 2.0
    test_per_class = 200
    train_csv = u""
    test_csv = u""
    label_column = u""
    ## [model]
    hidden_widths = [64]
    ## [schedule]
    total_iterations = 4000
    num_episodes = 20
    num_models = 2
    ema_lambda = 0.999
    use_ema = False
    carry_momentum = False
    ## [trainer]
    learning_rate = 0.05
    momentum = 0.9
    batch_size = 32
    learning_rates = []
    data_seeds = []
    ## [experiment]
    arms = [u"baseline", u"baseline-2xT", u"vanilla-mwa", u"imwa"]
    seeds = list(range(10))
    concurrent = False
    workers = 1
    probe_every = 0
    ablate_episodes = [1, 5, 10, 20, 50]
    ablate_models = [1, 2, 3, 4]
    ablate_ratios = [1.0, 10.0, 50.0, 100.0]
    ## [output]
    output_dir = u"runs"
    run_name = u"imwa"
    force = False
    write_checkpoints = True
    progress_meter = sys.stdout.isatty()
    verbosity = logging.WARNING

    _sections = [
        ("dataset", ["source", "num_classes", "head_count", "imbalance_ratio", "feature_dim",
                     "class_sep", "test_per_class", "train_csv", "test_csv", "label_column"]),
        ("model", ["hidden_widths"]),
        ("schedule", ["total_iterations", "num_episodes", "num_models", "ema_lambda",
                      "use_ema", "carry_momentum"]),
        ("trainer", ["learning_rate", "momentum", "batch_size", "learning_rates", "data_seeds"]),
        ("experiment", ["arms", "seeds", "concurrent", "workers", "probe_every",
                        "ablate_episodes", "ablate_models", "ablate_ratios"]),
        ("output", ["output_dir", "run_name", "force", "write_checkpoints",
                    "progress_meter", "verbosity"]),
    ]
    _list_types = {
        "hidden_widths": int, "learning_rates": float, "data_seeds": int,
        "arms": unicode, "seeds": int, "ablate_episodes": int,
        "ablate_models": int, "ablate_ratios": float,
    }

    def __init__(self, configfile=None):
        self._parsed_files = []
        for option in self.option_list():
            value = getattr(Config, option)
            setattr(self, option, list(value) if isinstance(value, list) else value)
        if configfile:
            self.read_config_file(configfile)

    def option_list(self):
        retval = []
        for section, options in self._sections:
            retval.extend(options)
        return retval

    def section_of(self, option):
        for section, options in self._sections:
            if option in options:
                return section
        return None

    def field_path(self, option):
        return u"%s.%s" % (self.section_of(option), option)

    def read_config_file(self, configfile):
        cp = ConfigParser(configfile)
        for section, values in cp.sections():
            known = dict(self._sections)
            if section not in known:
                raise ConfigError(u"unknown section [%s] in %s" % (section, configfile), field=section)
            for key, value in values:
                if key not in known[section]:
                    home = self.section_of(key)
                    if home is None:
                        raise ConfigError(u"unknown key '%s' in %s" % (key, configfile),
                                          field=u"%s.%s" % (section, key))
                    raise ConfigError(u"key '%s' belongs in section [%s]" % (key, home),
                                      field=u"%s.%s" % (section, key))
                self.update_option(key, value.strip())
        self._parsed_files.append(configfile)

    def dump_config(self, stream):
        dumper = ConfigDumper(stream)
        for section, options in self._sections:
            dumper.dump(section, self, options)

    def to_record(self):
        retval = {}
        for section, options in self._sections:
            retval[section] = dict((option, getattr(self, option)) for option in options)
        return retval

    def _coerce_scalar(self, option, kind, value):
        if kind is bool:
            if is_bool_true(value):
                return True
            if is_bool_false(value):
                return False
            raise ConfigError(u"must be yes or no, not '%s'" % value, field=self.field_path(option))
        if isinstance(value, (str, unicode)) and kind in (int, float):
            value = value.strip()
        try:
            if kind is int:
                if isinstance(value, float) and int(value) != value:
                    raise ValueError(value)
                return int(value)
            if kind is float:
                return float(value)
        except ValueError:
            raise ConfigError(u"must be %s, not '%s'" % (kind is int and "an integer" or "a number", value),
                              field=self.field_path(option))
        return u"%s" % value

    def update_option(self, option, value):
        if value is None:
            return
        if self.section_of(option) is None:
            raise ConfigError(u"unknown key '%s'" % option, field=option)
        default = getattr(Config, option)

        ## verbosity must be known to "logging" module
        if option == "verbosity":
            try:
                value = int(value)
            except ValueError:
                level = logging.getLevelName(u"%s" % value.upper())
                if not isinstance(level, int):
                    raise ConfigError(u"verbosity level '%s' is not valid" % value,
                                      field=self.field_path(option))
                value = level

        elif isinstance(default, list):
            kind = self._list_types[option]
            if isinstance(value, (str, unicode)):
                value = [item.strip() for item in value.split(",") if item.strip()]
            value = [self._coerce_scalar(option, kind, item) for item in value]

        else:
            value = self._coerce_scalar(option, type(default), value)

        setattr(self, option, value)

    def _check(self, option, ok, bound, message=None):
        if not ok:
            value = getattr(self, option)
            raise ConfigError(message or u"invalid value %r" % (value,), field=self.field_path(option), bound=bound)

    def validate(self, sweep=None):
        """
        Check every constraint up front; raises ConfigError naming the field
        and bound. 'sweep' names the ablation list about to be run, whose
        values are then checked against the rest of the configuration.
        """
        self._check("source", self.source in ("gaussian", "csv"), "gaussian or csv")
        if self.source == "gaussian":
            self._check("num_classes", self.num_classes >= 2, "C >= 2")
            self._check("head_count", self.head_count >= 1, "n1 >= 1")
            self._check("imbalance_ratio", 1.0 <= self.imbalance_ratio < float("inf"), "gamma >= 1")
            self._check("feature_dim", self.feature_dim >= 2, "d >= 2")
            self._check("class_sep", self.class_sep > 0, "class_sep > 0")
            self._check("test_per_class", self.test_per_class >= 1, "test_per_class >= 1")
            try:
                class_counts(self.long_tail_spec())
            except DatasetError as e:
                raise ConfigError(u"%s" % e, field=self.field_path("imbalance_ratio"),
                                  bound="n1 * gamma ** -1 >= 0.5")
        else:
            self._check("train_csv", bool(self.train_csv), "a CSV path", u"source is csv but no file given")
            self._check("train_csv", os.path.isfile(self.train_csv), "an existing file",
                        u"no such file '%s'" % self.train_csv)
            if self.test_csv:
                self._check("test_csv", os.path.isfile(self.test_csv), "an existing file",
                            u"no such file '%s'" % self.test_csv)

        self._check("hidden_widths", all(w >= 1 for w in self.hidden_widths), "widths >= 1")

        self._check("total_iterations", self.total_iterations >= 1, "T >= 1")
        self._check("num_episodes", 1 <= self.num_episodes <= self.total_iterations, "1 <= E <= T")
        self._check("num_models", self.num_models >= 1, "M >= 1")
        self._check("ema_lambda", 0.0 <= self.ema_lambda <= 1.0, "0 <= lambda <= 1")

        self._check("learning_rate", self.learning_rate >= 0, "learning_rate >= 0")
        self._check("momentum", 0.0 <= self.momentum < 1.0, "0 <= momentum < 1")
        self._check("batch_size", self.batch_size >= 1, "batch_size >= 1")
        if self.learning_rates:
            self._check("learning_rates", len(self.learning_rates) >= self.num_models,
                        "one value per model (M=%d)" % self.num_models)
            self._check("learning_rates", all(lr >= 0 for lr in self.learning_rates), "learning rates >= 0")
        if self.data_seeds:
            self._check("data_seeds", len(self.data_seeds) >= self.num_models,
                        "one value per model (M=%d)" % self.num_models)
            if len(set(self.data_seeds)) != len(self.data_seeds):
                warning(u"trainer.data_seeds has repeated values; those models will train identically")

        self._check("arms", len(self.arms) >= 1, "at least one arm")
        for arm in self.arms:
            self._check("arms", arm in ARM_KINDS, "one of %s" % ", ".join(ARM_KINDS),
                        u"unknown arm '%s'" % arm)
        self._check("arms", len(set(self.arms)) == len(self.arms), "distinct arm names")
        self._check("seeds", len(self.seeds) >= 1, "at least one seed")
        self._check("seeds", len(set(self.seeds)) == len(self.seeds), "distinct seeds")
        self._check("seeds", all(s >= 0 for s in self.seeds), "seeds >= 0")
        self._check("workers", self.workers >= 1, "workers >= 1")
        self._check("probe_every", self.probe_every >= 0, "probe_every >= 0")
        self._check("ablate_episodes", all(e >= 1 for e in self.ablate_episodes), "E >= 1")
        if sweep == "ablate_episodes":
            self._check("ablate_episodes", all(e <= self.total_iterations for e in self.ablate_episodes),
                        "1 <= E <= T")
        self._check("ablate_models", all(m >= 1 for m in self.ablate_models), "M >= 1")
        self._check("ablate_ratios", all(g >= 1.0 for g in self.ablate_ratios), "gamma >= 1")
        if sweep == "ablate_ratios" and self.source == "gaussian":
            for ratio in self.ablate_ratios:
                try:
                    class_counts(self.long_tail_spec().with_ratio(ratio))
                except DatasetError as e:
                    raise ConfigError(u"%s" % e, field=self.field_path("ablate_ratios"),
                                      bound="n1 * gamma ** -1 >= 0.5")

        self._check("run_name", bool(self.run_name) and os.sep not in self.run_name and
                    self.run_name not in (".", ".."), "a plain directory name")
        return self

    ## Builders for the library types

    def long_tail_spec(self):
        return LongTailSpec(self.num_classes, self.head_count, self.imbalance_ratio)

    def schedule(self):
        return ImwaSchedule(self.total_iterations, self.num_episodes, self.num_models,
                            ema_lambda=self.ema_lambda, use_ema=self.use_ema,
                            carry_momentum=self.carry_momentum)

    def layout(self, feature_dim, num_classes):
        return LayerLayout.from_widths([feature_dim] + self.hidden_widths + [num_classes])

    def trainer_template(self):
        return TrainerTemplate(self.learning_rate, self.momentum, self.batch_size,
                               self.hidden_widths, self.learning_rates or None,
                               self.data_seeds or None)

    def trainer_configs(self, seed=None):
        """TrainerConfig per model for replication 'seed' (default: the first seed)"""
        if seed is None:
            seed = self.seeds[0]
        return self.trainer_template().configs(seed, self.num_models)

    def label_column_value(self):
        return self.label_column or None

    def dataset_source(self):
        if self.source == "gaussian":
            return GaussianSource(self.long_tail_spec(), self.feature_dim, self.class_sep,
                                  self.test_per_class)
        train = ingest_csv(self.train_csv, self.label_column_value())
        test = None
        if self.test_csv:
            test = ingest_csv(self.test_csv, self.label_column_value())
            if test.feature_dim != train.feature_dim:
                raise ConfigError(u"test set has %d features, training set %d"
                                  % (test.feature_dim, train.feature_dim), field=self.field_path("test_csv"))
        else:
            warning(u"No dataset.test_csv given; evaluating on the training set")
        return FixedSource(train, test, name=os.path.basename(self.train_csv))

    def plan(self, arms=None):
        schedule = self.schedule()
        try:
            arm_list = standard_arms(schedule, arms or self.arms)
        except ParameterError as e:
            raise ConfigError(u"%s" % e, field=self.field_path("arms"))
        return ExperimentPlan(arm_list, self.dataset_source(), self.seeds, self.trainer_template(),
                              concurrent=self.concurrent, workers=self.workers,
                              probe_every=self.probe_every or None, base_schedule=schedule)


class ConfigParser(object):
    """INI-style reader that keeps the section of every key"""

    def __init__(self, file):
        self._sections = []
        self.parse_file(file)

    def parse_file(self, file):
        debug("ConfigParser: Reading file '%s'" % file)
        r_comment = re.compile(r'^\s*[#;].*')
        r_empty = re.compile(r'^\s*$')
        r_section = re.compile(r'^\s*\[([^\]]+)\]\s*$')
        r_data = re.compile(r'^\s*(?P<key>\w+)\s*=\s*(?P<value>.*)')
        r_quotes = re.compile(r'^"(.*)"\s*$')
        current = None
        with io.open(file, "r", encoding="UTF-8") as fp:
            for line_no, line in enumerate(fp, 1):
                if r_comment.match(line) or r_empty.match(line):
                    continue
                is_section = r_section.match(line)
                if is_section:
                    current = (is_section.groups()[0].strip(), [])
                    self._sections.append(current)
                    continue
                is_data = r_data.match(line)
                if is_data:
                    if current is None:
                        raise ConfigError(u"%s, line %d: option outside of any [section]" % (file, line_no))
                    data = is_data.groupdict()
                    if r_quotes.match(data["value"]):
                        data["value"] = r_quotes.match(data["value"]).group(1)
                    current[1].append((data["key"], data["value"]))
                    debug("ConfigParser: [%s] %s->%s" % (current[0], data["key"], data["value"]))
                    continue
                raise ConfigError(u"%s, line %d: cannot parse '%s'" % (file, line_no, line.rstrip()))

    def sections(self):
        return self._sections


class ConfigDumper(object):
    def __init__(self, stream):
        self.stream = stream

    def dump(self, section, config, options):
        self.stream.write(u"[%s]\n" % section)
        for option in options:
            value = getattr(config, option)
            if option == "verbosity":
                # we turn level numbers back into strings if possible
                name = logging.getLevelName(value)
                if not name.startswith("Level"):
                    value = name
            elif isinstance(value, list):
                value = u",".join(u"%s" % item for item in value)
            elif isinstance(value, bool):
                value = value and u"yes" or u"no"
            elif isinstance(value, float):
                value = repr(value)
            self.stream.write(u"%s = %s\n" % (option, value))
        self.stream.write(u"\n")

# vim:et:ts=4:sts=4:ai
