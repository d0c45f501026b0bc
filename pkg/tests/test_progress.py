# -*- coding: utf-8 -*-

import io
import os
import sys
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from IMWA.Progress import Progress, ProgressCR

LABELS = {"action": "run", "arm": "imwa", "seed": 0, "extra": ""}


class ProgressTest(unittest.TestCase):
    def test_milestones_then_final_line(self):
        stream = io.StringIO()
        progress = Progress(LABELS, 100, stream=stream)
        for _ in range(4):
            progress.update(delta_position=25)
        progress.done(u"top-1 0.5000")
        lines = stream.getvalue().split(u"\n")
        self.assertEqual(lines[0], u"run: arm 'imwa' seed 0  ")
        self.assertTrue(lines[1].startswith(u"20% 50% 70% 100%  100 it in "))
        self.assertTrue(lines[1].endswith(u"top-1 0.5000"))
        self.assertEqual(stream.getvalue().count(u"100%"), 1)

    def test_carriage_return_meter(self):
        stream = io.StringIO()
        progress = ProgressCR(LABELS, 10, stream=stream)
        progress.update(current_position=10)
        progress.done(u"ok")
        self.assertIn(u"\r 100%  10 of 10 it", stream.getvalue())
        self.assertTrue(stream.getvalue().endswith(u"ok\n"))


if __name__ == "__main__":
    unittest.main()
