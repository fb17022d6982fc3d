"""
IDX files, big endian:

    i32 | magic, 0x00000803 for images, 0x00000801 for labels
    i32 | item count
    i32 | row count      (images only)
    i32 | column count   (images only)
    u8[] | payload, row-wise
"""
import os
import struct
from typing import Tuple

import numpy as np

from sparsecert.misc.exceptions import DataError

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def _read_header(data: bytes, fields: Tuple[str, ...], path: str) -> Tuple[int, ...]:
    size = 4 * len(fields)
    if len(data) < size:
        raise DataError("{} is truncated in its header, {} bytes".format(path, len(data)))
    values = struct.unpack(">" + "I" * len(fields), data[:size])
    return values


def _read(path: str) -> bytes:
    if not os.path.isfile(path):
        raise DataError("file {} is not found".format(path))
    with open(path, "rb") as f:
        return f.read()


def read_idx_images(path: str) -> np.ndarray:
    data = _read(path)
    magic, count, rows, cols = _read_header(data, ("magic", "count", "rows", "cols"), path)
    if magic != IMAGE_MAGIC:
        raise DataError("magic number mismatch in image file {}: got {:#010x}, expected {:#010x}".format(
            path, magic, IMAGE_MAGIC))
    payload = data[16:]
    if len(payload) != count * rows * cols:
        raise DataError("image file {} is truncated: count {} x {}x{} needs {} bytes, found {}".format(
            path, count, rows, cols, count * rows * cols, len(payload)))
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path: str) -> np.ndarray:
    data = _read(path)
    magic, count = _read_header(data, ("magic", "count"), path)
    if magic != LABEL_MAGIC:
        raise DataError("magic number mismatch in label file {}: got {:#010x}, expected {:#010x}".format(
            path, magic, LABEL_MAGIC))
    payload = data[8:]
    if len(payload) != count:
        raise DataError("label file {} is truncated: count {} but {} bytes".format(path, count, len(payload)))
    return np.frombuffer(payload, dtype=np.uint8).copy()


def load_idx(images_path: str, labels_path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    raw images of shape (m, rows, cols) and labels of shape (m,), both uint8

    :param images_path:
    :param labels_path:
    :return:
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataError("count mismatch: {} images but {} labels".format(images.shape[0], labels.shape[0]))
    return images, labels


def write_idx(images_path: str, labels_path: str, images, labels) -> None:
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    assert images.ndim == 3, "images must have shape (m, rows, cols)"
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, *images.shape))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, labels.shape[0]))
        f.write(labels.tobytes())
