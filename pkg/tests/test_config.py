# -*- coding: utf-8 -*-

import io
import logging
import os
import shutil
import sys
import tempfile
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from IMWA.Config import Config
from IMWA.Exceptions import ConfigError
from IMWA.Harness import FixedSource, GaussianSource


class ConfigTest(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def write(self, text, name="run.cfg"):
        path = os.path.join(self.tmpdir, name)
        with io.open(path, "w", encoding="UTF-8") as fp:
            fp.write(text)
        return path

    def test_defaults(self):
        cfg = Config().validate()
        self.assertEqual(cfg.num_episodes, 20)
        self.assertEqual(cfg.num_models, 2)
        self.assertEqual(cfg.total_iterations, 4000)
        self.assertEqual(cfg.hidden_widths, [64])
        self.assertEqual(cfg.seeds, list(range(10)))

    def test_empty_file_gives_defaults(self):
        cfg = Config(self.write(u"# nothing here\n"))
        self.assertEqual(cfg.to_record(), Config().to_record())

    def test_flag_overrides_file(self):
        cfg = Config(self.write(u"[schedule]\nnum_episodes = 20\nnum_models = 3\n"))
        cfg.update_option("num_episodes", "5")
        self.assertEqual(cfg.num_episodes, 5)
        self.assertEqual(cfg.num_models, 3)

    def test_instances_are_independent(self):
        a = Config()
        a.update_option("seeds", "1,2")
        self.assertEqual(Config().seeds, list(range(10)))

    def test_num_models_bound(self):
        cfg = Config()
        cfg.update_option("num_models", "0")
        with self.assertRaises(ConfigError) as cm:
            cfg.validate()
        self.assertEqual(cm.exception.field, "schedule.num_models")
        self.assertIn("M >= 1", str(cm.exception))

    def test_episodes_bound(self):
        cfg = Config()
        cfg.update_option("total_iterations", "10")
        cfg.update_option("num_episodes", "11")
        with self.assertRaises(ConfigError) as cm:
            cfg.validate()
        self.assertEqual(cm.exception.field, "schedule.num_episodes")

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as cm:
            Config(self.write(u"[schedule]\nnum_epochs = 3\n"))
        self.assertIn("num_epochs", str(cm.exception))

    def test_key_in_wrong_section(self):
        with self.assertRaises(ConfigError) as cm:
            Config(self.write(u"[trainer]\nnum_models = 3\n"))
        self.assertIn("[schedule]", str(cm.exception))

    def test_unknown_section(self):
        self.assertRaises(ConfigError, Config, self.write(u"[network]\nwidth = 3\n"))

    def test_coercion(self):
        cfg = Config()
        cfg.update_option("use_ema", "yes")
        cfg.update_option("carry_momentum", "off")
        cfg.update_option("hidden_widths", "32, 16")
        cfg.update_option("ablate_ratios", "1,10")
        cfg.update_option("verbosity", "info")
        cfg.update_option("ema_lambda", "0.99")
        self.assertIs(cfg.use_ema, True)
        self.assertIs(cfg.carry_momentum, False)
        self.assertEqual(cfg.hidden_widths, [32, 16])
        self.assertEqual(cfg.ablate_ratios, [1.0, 10.0])
        self.assertEqual(cfg.verbosity, logging.INFO)
        self.assertEqual(cfg.ema_lambda, 0.99)
        self.assertRaises(ConfigError, cfg.update_option, "use_ema", "maybe")
        self.assertRaises(ConfigError, cfg.update_option, "batch_size", "3.5")
        self.assertRaises(ConfigError, cfg.update_option, "verbosity", "chatty")

    def test_no_environment_expansion(self):
        cfg = Config(self.write(u"[output]\nrun_name = $HOME\n"))
        self.assertEqual(cfg.run_name, u"$HOME")

    def test_dump_reads_back(self):
        cfg = Config()
        cfg.update_option("arms", "baseline,imwa-ema")
        cfg.update_option("imbalance_ratio", "33.3")
        cfg.update_option("learning_rates", "0.1,0.05")
        stream = io.StringIO()
        cfg.dump_config(stream)
        back = Config(self.write(stream.getvalue(), "dump.cfg"))
        self.assertEqual(back.to_record(), cfg.to_record())

    def test_sweep_bounds(self):
        cfg = Config()
        cfg.update_option("total_iterations", "20")
        cfg.update_option("num_episodes", "4")
        cfg.validate()
        with self.assertRaises(ConfigError) as cm:
            cfg.validate(sweep="ablate_episodes")
        self.assertEqual(cm.exception.field, "experiment.ablate_episodes")
        cfg.update_option("ablate_episodes", "1,20")
        cfg.validate(sweep="ablate_episodes")
        cfg.update_option("head_count", "40")
        cfg.update_option("imbalance_ratio", "4")
        cfg.update_option("ablate_ratios", "1,4,10")
        cfg.validate(sweep="ablate_ratios")
        cfg.update_option("ablate_ratios", "1,200")
        with self.assertRaises(ConfigError) as cm:
            cfg.validate(sweep="ablate_ratios")
        self.assertEqual(cm.exception.field, "experiment.ablate_ratios")

    def test_unknown_arm(self):
        cfg = Config()
        cfg.update_option("arms", "baseline,swa")
        with self.assertRaises(ConfigError) as cm:
            cfg.validate()
        self.assertEqual(cm.exception.field, "experiment.arms")

    def test_missing_csv(self):
        cfg = Config()
        cfg.update_option("source", "csv")
        cfg.update_option("train_csv", os.path.join(self.tmpdir, "missing.csv"))
        with self.assertRaises(ConfigError) as cm:
            cfg.validate()
        self.assertEqual(cm.exception.field, "dataset.train_csv")

    def test_tail_class_must_exist(self):
        cfg = Config()
        cfg.update_option("head_count", "5")
        cfg.update_option("imbalance_ratio", "100")
        self.assertRaises(ConfigError, cfg.validate)

    def test_builders(self):
        cfg = Config()
        cfg.update_option("num_models", "3")
        cfg.update_option("use_ema", "true")
        cfg.update_option("arms", "baseline,baseline-2xT,imwa")
        cfg.validate()
        schedule = cfg.schedule()
        self.assertEqual((schedule.total_iterations, schedule.num_episodes, schedule.num_models),
                         (4000, 20, 3))
        self.assertTrue(schedule.use_ema)
        configs = cfg.trainer_configs()
        self.assertEqual(len(configs), 3)
        self.assertEqual(len(set(c.data_seed for c in configs)), 3)
        self.assertEqual(cfg.layout(16, 10).widths, [16, 64, 10])
        plan = cfg.plan()
        self.assertEqual([arm.name for arm in plan.arms], ["baseline", "baseline-2xT", "imwa"])
        self.assertEqual(plan.arm("baseline-2xT").iteration_multiplier, 3)
        self.assertIsInstance(plan.source, GaussianSource)

    def test_csv_source(self):
        train = self.write(u"f0,f1,label\n0.0,1.0,0\n1.0,0.0,1\n", "train.csv")
        cfg = Config()
        cfg.update_option("source", "csv")
        cfg.update_option("train_csv", train)
        cfg.validate()
        source = cfg.dataset_source()
        self.assertIsInstance(source, FixedSource)
        self.assertIs(source.test, source.train)
        self.assertEqual(len(source.train), 2)


if __name__ == "__main__":
    unittest.main()
