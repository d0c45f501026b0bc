# -*- coding: utf-8 -*-

import os
import shutil
import struct
import sys
import tempfile
import unittest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from IMWA.Checkpoint import (FORMAT_VERSION, MAGIC, decode_checkpoint, encode_checkpoint,
                             read_checkpoint, write_checkpoint)
from IMWA.Exceptions import CheckpointFormatError
from IMWA.Network import LayerLayout, WeightVector, init_weights


class CheckpointTest(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        self.layout = LayerLayout.from_widths([4, 8, 3])

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def test_round_trip_is_bit_exact(self):
        values = init_weights(self.layout, 5).values.copy()
        values[:4] = [-0.0, 5e-324, -1.7976931348623157e308, 1.0 / 3.0]
        w = WeightVector(self.layout, values)
        path = os.path.join(self.tmpdir, "w.imwa")
        write_checkpoint(path, w)
        back = read_checkpoint(path)
        self.assertEqual(back.layout, self.layout)
        self.assertEqual(back.values.tobytes(), w.values.tobytes())

    def test_header_layout(self):
        data = encode_checkpoint(init_weights(self.layout, 0))
        self.assertEqual(data[:4], MAGIC)
        self.assertEqual(struct.unpack_from("<II", data, 4), (FORMAT_VERSION, 2))
        self.assertEqual(len(data), 12 + 2 * 8 + self.layout.parameter_count * 8)

    def test_truncated(self):
        data = encode_checkpoint(init_weights(self.layout, 0))
        for size in (0, 6, 14, len(data) - 1):
            self.assertRaises(CheckpointFormatError, decode_checkpoint, data[:size], "cut.imwa")

    def test_bad_magic_names_file(self):
        data = b"XXXX" + encode_checkpoint(init_weights(self.layout, 0))[4:]
        with self.assertRaises(CheckpointFormatError) as cm:
            decode_checkpoint(data, "bogus.imwa")
        self.assertIn("bogus.imwa", str(cm.exception))

    def test_bad_version(self):
        data = bytearray(encode_checkpoint(init_weights(self.layout, 0)))
        struct.pack_into("<I", data, 4, FORMAT_VERSION + 1)
        self.assertRaises(CheckpointFormatError, decode_checkpoint, bytes(data))

    def test_non_finite_payload(self):
        data = bytearray(encode_checkpoint(init_weights(self.layout, 0)))
        struct.pack_into("<d", data, len(data) - 8, float("inf"))
        self.assertRaises(CheckpointFormatError, decode_checkpoint, bytes(data))

    def test_broken_layer_table(self):
        data = bytearray(encode_checkpoint(init_weights(self.layout, 0)))
        struct.pack_into("<II", data, 12 + 8, 7, 3)
        self.assertRaises(CheckpointFormatError, decode_checkpoint, bytes(data))


if __name__ == "__main__":
    unittest.main()
