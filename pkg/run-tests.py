#!/usr/bin/env python
# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## imwa - command line testsuite
##
## Drives the 'imwa' script on tiny configurations and checks exit
## codes and output. Everything is written below testsuite-out/.
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import, print_function

import sys
import os
import re
import io
import shutil
from subprocess import Popen, PIPE, STDOUT
from IMWA.ExitCodes import *

try:
    unicode
except NameError:
    # python 3 support
    unicode = str

count_pass = 0
count_fail = 0
count_skip = 0

test_counter = 0
run_tests = []
exclude_tests = []

verbose = False

out_dir = "testsuite-out"

def unicodise(string):
    if type(string) == unicode:
        return string

    return unicode(string, "UTF-8", "replace")

def test(label, cmd_args = [], retcode = 0, must_find = [], must_not_find = [],
         must_find_re = [], must_not_find_re = [], stdin = None):
    def command_output():
        print("----")
        print(" ".join([" " in arg and "'%s'" % arg or arg for arg in cmd_args]))
        print("----")
        print(stdout)
        print("----")

    def failure(message = ""):
        global count_fail
        if message:
            message = u"  (%r)" % message
        print(u"\x1b[31;1mFAIL%s\x1b[0m" % (message))
        count_fail += 1
        command_output()
        sys.exit(1)
    def success(message = ""):
        global count_pass
        if message:
            message = "  (%r)" % message
        print("\x1b[32;1mOK\x1b[0m%s" % (message))
        count_pass += 1
        if verbose:
            command_output()
        return 0
    def skip(message = ""):
        global count_skip
        if message:
            message = "  (%r)" % message
        print("\x1b[33;1mSKIP\x1b[0m%s" % (message))
        count_skip += 1
        return 0
    def compile_list(_list, regexps = False):
        if regexps == False:
            _list = [re.escape(item) for item in _list]

        return [re.compile(item, re.MULTILINE) for item in _list]

    global test_counter
    test_counter += 1
    print(("%3d  %s " % (test_counter, label)).ljust(40, "."), end=' ')
    sys.stdout.flush()

    if run_tests.count(test_counter) == 0 or exclude_tests.count(test_counter) > 0:
        return skip()

    if not cmd_args:
        return skip()

    p = Popen(cmd_args, stdin = stdin, stdout = PIPE, stderr = STDOUT, universal_newlines = True, close_fds = True)
    stdout, stderr = p.communicate()
    if type(retcode) not in [list, tuple]:
        retcode = [retcode]
    if p.returncode not in retcode:
        return failure("retcode: %d, expected one of: %s" % (p.returncode, retcode))

    if type(must_find) not in [ list, tuple ]: must_find = [must_find]
    if type(must_find_re) not in [ list, tuple ]: must_find_re = [must_find_re]
    if type(must_not_find) not in [ list, tuple ]: must_not_find = [must_not_find]
    if type(must_not_find_re) not in [ list, tuple ]: must_not_find_re = [must_not_find_re]

    find_list = []
    find_list.extend(compile_list(must_find))
    find_list.extend(compile_list(must_find_re, regexps = True))
    find_list_patterns = []
    find_list_patterns.extend(must_find)
    find_list_patterns.extend(must_find_re)

    not_find_list = []
    not_find_list.extend(compile_list(must_not_find))
    not_find_list.extend(compile_list(must_not_find_re, regexps = True))
    not_find_list_patterns = []
    not_find_list_patterns.extend(must_not_find)
    not_find_list_patterns.extend(must_not_find_re)

    stdout = unicodise(stdout)
    for index in range(len(find_list)):
        match = find_list[index].search(stdout)
        if not match:
            return failure("pattern not found: %s" % find_list_patterns[index])
    for index in range(len(not_find_list)):
        match = not_find_list[index].search(stdout)
        if match:
            return failure("pattern found: %s (match: %s)" % (not_find_list_patterns[index], match.group(0)))

    return success()

def test_imwa(label, cmd_args = [], **kwargs):
    if not cmd_args or not cmd_args[0].endswith("imwa"):
        cmd_args.insert(0, sys.executable)
        cmd_args.insert(1, "imwa")

    return test(label, cmd_args, **kwargs)

def test_cmp(label, file_a, file_b):
    return test(label, ['cmp', file_a, file_b])

def write_file(path, text):
    with io.open(path, "w", encoding="UTF-8") as fp:
        fp.write(text)

def truncate_copy(src, dst, size):
    with open(src, "rb") as fp:
        data = fp.read(size)
    with open(dst, "wb") as fp:
        fp.write(data)

argv = sys.argv[1:]
while argv:
    arg = argv.pop(0)
    if arg in ("-h", "--help"):
        print("%s A B K..O -N" % sys.argv[0])
        print("Run tests number A, B and K through to O, except for N")
        sys.exit(0)

    if arg in ("-l", "--list"):
        exclude_tests = range(0, 999)
        break
    if arg in ("-v", "--verbose"):
        verbose = True
        continue
    if ".." in arg:
        range_idx = arg.find("..")
        range_start = arg[:range_idx] or 0
        range_end = arg[range_idx+2:] or 999
        run_tests.extend(range(int(range_start), int(range_end) + 1))
    elif arg.startswith("-"):
        exclude_tests.append(int(arg[1:]))
    else:
        run_tests.append(int(arg))

if not run_tests:
    run_tests = range(0, 999)

if os.path.isdir(out_dir):
    shutil.rmtree(out_dir)
os.makedirs(out_dir)

## A long-tailed 3-class problem small enough to train in a second
tiny = ["--num-classes", "3", "--head-count", "40", "--imbalance-ratio", "4",
        "--feature-dim", "4", "--test-per-class", "20", "--hidden-widths", "8",
        "--total-iterations", "20", "--episodes", "4", "--batch-size", "8",
        "--seeds", "0", "--no-progress", "-o", out_dir]

def run_path(name, *parts):
    return os.path.join(out_dir, name, *parts)

## ====== Basic invocations
test_imwa("Version", ["--version"],
    must_find = "imwa version ")

test_imwa("Help", ["--help"],
    must_find = ["Commands:", "ablate-gamma", "--num-models=M"])

test_imwa("No command", [],
    retcode = EX_USAGE)

test_imwa("Invalid command", ["train"],
    retcode = EX_USAGE,
    must_find = "ERROR: Invalid command: train")

test_imwa("Bad option", ["run", "--no-such-option"],
    retcode = EX_USAGE)

## ====== Configuration
test_imwa("Dump config", ["--episodes", "5", "--dump-config"],
    must_find = ["[schedule]", "num_episodes = 5", "num_models = 2", "verbosity = WARNING"])

write_file(os.path.join(out_dir, "good.cfg"), u"[schedule]\nnum_episodes = 7\nnum_models = 3\n")
test_imwa("Flag overrides config file", ["-c", os.path.join(out_dir, "good.cfg"), "--num-models", "4", "--dump-config"],
    must_find = ["num_episodes = 7", "num_models = 4"])

test_imwa("Zero models", ["run", "--num-models", "0"] + tiny,
    retcode = EX_CONFIG,
    must_find = ["ERROR: Config problem: schedule.num_models", "requires M >= 1"])

test_imwa("Too many episodes", ["run"] + tiny + ["--episodes", "21"],
    retcode = EX_CONFIG,
    must_find = "requires 1 <= E <= T")

write_file(os.path.join(out_dir, "bad.cfg"), u"[trainer]\nnum_models = 3\n")
test_imwa("Key in wrong section", ["-c", os.path.join(out_dir, "bad.cfg"), "--dump-config"],
    retcode = EX_CONFIG,
    must_find = "belongs in section [schedule]")

test_imwa("Not a number", ["--batch-size", "many", "--dump-config"],
    retcode = EX_CONFIG,
    must_find = "trainer.batch_size")

test_imwa("Learning rates per model", ["run", "--learning-rates", "0.1"] + tiny,
    retcode = EX_CONFIG,
    must_find = "one value per model")

test_imwa("Values outside a sweep", ["run", "--values", "1,2"] + tiny,
    retcode = EX_USAGE,
    must_find = "ERROR: Parameter problem: --values only applies to")

## ====== Datasets
test_imwa("Export dataset", ["export-dataset", os.path.join(out_dir, "data")] + tiny,
    must_find = ["Wrote 70 samples (4 features, counts [40, 20, 10])",
                 "Wrote 60 samples (4 features, counts [20, 20, 20])"])

test_imwa("Export refuses overwrite", ["export-dataset", os.path.join(out_dir, "data")] + tiny,
    retcode = EX_USAGE,
    must_find = "already exists")

test_imwa("Run on CSV files", ["run", "-n", "csv", "--arms", "baseline,imwa", "--source", "csv",
    "--train-csv", os.path.join(out_dir, "data", "train.csv"),
    "--test-csv", os.path.join(out_dir, "data", "test.csv")] + tiny,
    must_find_re = ["^baseline +top-1 ", "^imwa +top-1 .* vs baseline"])

write_file(os.path.join(out_dir, "broken.csv"), u"a,b,label\n1.0,2.0,0\n1.0,x,1\n")
test_imwa("Malformed CSV", ["run", "-n", "broken", "--source", "csv",
    "--train-csv", os.path.join(out_dir, "broken.csv")] + tiny,
    retcode = EX_DATAERR,
    must_find = "line 3")

## ====== Comparison runs
test_imwa("Run with EMA", ["run", "-n", "tiny", "--arms", "baseline,vanilla-mwa,imwa", "--use-ema", "--probe-every", "2"] + tiny,
    must_find = ["Results in %s" % run_path("tiny", "results")],
    must_find_re = ["^vanilla-mwa +top-1 ", "^imwa +top-1 .* over 1 seed"],
    must_not_find = "FAILED")

test_imwa("Run refuses overwrite", ["run", "-n", "tiny", "--arms", "baseline,vanilla-mwa,imwa", "--use-ema", "--probe-every", "2"] + tiny,
    retcode = EX_USAGE,
    must_find = "already exists, use --force")

test_imwa("Rerun", ["run", "-n", "tiny2", "--arms", "baseline,vanilla-mwa,imwa", "--use-ema", "--probe-every", "2"] + tiny)

test_cmp("Results are byte-stable", run_path("tiny", "results", "results.jsonl"), run_path("tiny2", "results", "results.jsonl"))
test_cmp("Series are byte-stable", run_path("tiny", "results", "series.jsonl"), run_path("tiny2", "results", "series.jsonl"))
test_cmp("Checkpoints are byte-stable", run_path("tiny", "checkpoints", "imwa-s0.omega.imwa"), run_path("tiny2", "checkpoints", "imwa-s0.omega.imwa"))

test_imwa("Overwrite with --force", ["run", "-n", "tiny2", "--force", "--arms", "imwa", "--concurrent", "--carry-momentum"] + tiny,
    must_find_re = "^imwa +top-1 ",
    must_not_find_re = "^baseline")

test_imwa("Several workers", ["run", "-n", "workers", "--arms", "baseline,baseline-2xT,imwa", "--seeds", "0,1", "--workers", "3"] + tiny,
    must_find_re = ["^baseline-2xT +top-1 .* over 2 seed", "^imwa +top-1 .* over 2 seed"])

test_imwa("Progress off a terminal", ["run", "-n", "progress", "--arms", "baseline"] + tiny + ["--progress"],
    must_find = ["run: arm 'baseline' seed 0", "100%  20 it in "])

## ====== Checkpoints
test_imwa("Inspect checkpoint", ["inspect", run_path("tiny", "checkpoints", "init-s0.imwa")],
    must_find = ["Layout:      4->8->3", "Parameters:  67"],
    must_not_find = "Pairwise")

test_imwa("Inspect copies of one checkpoint", ["inspect",
    run_path("tiny", "checkpoints", "imwa-s0.theta.imwa"), run_path("tiny2", "checkpoints", "imwa-s0.theta.imwa")],
    must_find = ["Pairwise L2 distances:", "  0.000000"])

test_imwa("Inspect trained against init", ["inspect",
    run_path("tiny", "checkpoints", "init-s0.imwa"), run_path("tiny", "checkpoints", "baseline-s0.theta.imwa")],
    must_find = "Pairwise L2 distances:",
    must_not_find = "  0.000000")

test_imwa("Inspect run directory", ["inspect", run_path("tiny")],
    must_find = ["Command:     run", ", complete)", "Runs:        3 ok, 0 failed"])

test_imwa("Inspect plain directory", ["inspect", out_dir],
    retcode = EX_DATAERR,
    must_find = "not a run directory")

truncate_copy(run_path("tiny", "checkpoints", "init-s0.imwa"), os.path.join(out_dir, "truncated.imwa"), 40)
test_imwa("Inspect truncated checkpoint", ["inspect", os.path.join(out_dir, "truncated.imwa")],
    retcode = EX_DATAERR,
    must_find = "truncated.imwa")

test_imwa("Inspect without file", ["inspect"],
    retcode = EX_USAGE,
    must_find = "Not enough parameters")

## ====== Ablations
test_imwa("Sweep episodes", ["ablate-e", "-n", "sweep-e", "--values", "1,5,20"] + tiny,
    must_find = ["ablate-e", "Results in"],
    must_find_re = ["^ +E=1 ", "^ +E=20 "])

test_imwa("Sweep episodes beyond T", ["ablate-e", "-n", "sweep-e2", "--values", "21"] + tiny,
    retcode = EX_CONFIG,
    must_find = "experiment.ablate_episodes")

test_imwa("Sweep models", ["ablate-m", "-n", "sweep-m", "--values", "1,3"] + tiny,
    must_find_re = ["^ +M=1 ", "^ +M=3 "])

test_imwa("Sweep imbalance", ["ablate-gamma", "-n", "sweep-gamma", "--values", "1,4"] + tiny,
    must_find = ["ablate-gamma", "head_tail_ratio"])

test_imwa("Sweep imbalance on CSV", ["ablate-gamma", "-n", "sweep-csv", "--values", "1,4", "--source", "csv",
    "--train-csv", os.path.join(out_dir, "data", "train.csv")] + tiny,
    retcode = EX_USAGE,
    must_find = "needs a generated dataset")

print("%d passed, %d failed, %d skipped" % (count_pass, count_fail, count_skip))

# vim:et:ts=4:sts=4:ai
