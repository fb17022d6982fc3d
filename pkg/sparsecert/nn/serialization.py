"""
ESNN model files, little-endian:

    bytes[4] | magic "ESNN"
    u32      | format version
    u32      | layer count
    per layer: u32 rows, u32 cols, f32[rows * cols] row-major
"""
import struct

import numpy as np

from sparsecert.misc.exceptions import DataError, DomainError
from sparsecert.nn.network import ACTIVATIONS, LayeredNetwork

MAGIC = b"ESNN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sII")
_SHAPE = struct.Struct("<II")


def network_to_bytes(net: LayeredNetwork) -> bytes:
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, net.depth)]
    for W in net.layers:
        parts.append(_SHAPE.pack(*W.shape))
        parts.append(np.ascontiguousarray(W, dtype="<f4").tobytes())
    return b"".join(parts)


def network_from_bytes(data: bytes, final_activation: str = "relu") -> LayeredNetwork:
    if final_activation not in ACTIVATIONS:
        raise DomainError("unknown activation {}".format(final_activation))
    if len(data) < _HEADER.size:
        raise DataError("model file is truncated: {} bytes".format(len(data)))
    magic, version, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DataError("bad magic {!r}, expected {!r}".format(magic, MAGIC))
    if version != FORMAT_VERSION:
        raise DataError("unsupported model format version {}".format(version))
    offset = _HEADER.size
    layers = []
    for i in range(count):
        if len(data) < offset + _SHAPE.size:
            raise DataError("model file is truncated in the shape of layer {}".format(i + 1))
        rows, cols = _SHAPE.unpack_from(data, offset)
        if rows == 0 or cols == 0:
            raise DataError("layer {} has an empty shape {}x{}".format(i + 1, rows, cols))
        offset += _SHAPE.size
        size = rows * cols * 4
        if len(data) < offset + size:
            raise DataError("model file is truncated in the weights of layer {}".format(i + 1))
        W = np.frombuffer(data, dtype="<f4", count=rows * cols, offset=offset).reshape(rows, cols)
        if not np.all(np.isfinite(W)):
            raise DataError("layer {} has non-finite weights".format(i + 1))
        layers.append(W.astype(np.float64))
        offset += size
    if offset != len(data):
        raise DataError("model file has {} trailing bytes".format(len(data) - offset))
    try:
        return LayeredNetwork(layers, final_activation)
    except DomainError as e:
        raise DataError("model file does not describe a network: {}".format(e))


def save_network(net: LayeredNetwork, path: str) -> None:
    try:
        with open(path, "wb") as f:
            f.write(network_to_bytes(net))
    except OSError as e:
        raise DataError("cannot write model {}: {}".format(path, e))


def load_network(path: str, final_activation: str = "relu") -> LayeredNetwork:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise DataError("cannot read model {}: {}".format(path, e))
    return network_from_bytes(data, final_activation)
