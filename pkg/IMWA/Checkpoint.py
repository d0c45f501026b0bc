# -*- coding: utf-8 -*-

## --------------------------------------------------------------------
## IMWA - Checkpoint file format
##
##   4 bytes   magic "IMWA"
##   u32       format version
##   u32       layer count L
##   L x u32,u32  (in_width, out_width) per layer
##   float64[] values in WeightVector order
##
## All integers and floats little-endian.
##
## License   : GPL Version 2
## --------------------------------------------------------------------

from __future__ import absolute_import

import struct
from logging import debug

import numpy as np

from .Exceptions import CheckpointFormatError, ParameterError, NumericError
from .Network import LayerLayout, WeightVector

__all__ = ["MAGIC", "FORMAT_VERSION", "encode_checkpoint", "decode_checkpoint",
           "write_checkpoint", "read_checkpoint"]

MAGIC = b"IMWA"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sII")
_DIMS = struct.Struct("<II")


def encode_checkpoint(w):
    chunks = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(w.layout.dims))]
    for (in_width, out_width) in w.layout.dims:
        chunks.append(_DIMS.pack(in_width, out_width))
    chunks.append(w.values.astype("<f8").tobytes())
    return b"".join(chunks)


def decode_checkpoint(data, filename="<bytes>"):
    if len(data) < _HEADER.size:
        raise CheckpointFormatError(filename, "truncated header")
    magic, version, layer_count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointFormatError(filename, "bad magic %r" % magic)
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(filename, "unsupported format version %d" % version)
    offset = _HEADER.size
    if len(data) < offset + layer_count * _DIMS.size:
        raise CheckpointFormatError(filename, "truncated layer table")
    dims = []
    for _ in range(layer_count):
        dims.append(_DIMS.unpack_from(data, offset))
        offset += _DIMS.size
    try:
        layout = LayerLayout(dims)
    except ParameterError as e:
        raise CheckpointFormatError(filename, "invalid layout: %s" % e)
    expected = offset + layout.parameter_count * 8
    if len(data) != expected:
        raise CheckpointFormatError(filename, "expected %d bytes, found %d" % (expected, len(data)))
    values = np.frombuffer(data, dtype="<f8", count=layout.parameter_count, offset=offset)
    try:
        return WeightVector(layout, values.astype(np.float64))
    except NumericError:
        raise CheckpointFormatError(filename, "non-finite values")


def write_checkpoint(path, w):
    debug(u"Writing checkpoint %s (%s)" % (path, w.layout))
    with open(path, "wb") as fp:
        fp.write(encode_checkpoint(w))


def read_checkpoint(path):
    with open(path, "rb") as fp:
        data = fp.read()
    return decode_checkpoint(data, path)

# vim:et:ts=4:sts=4:ai
