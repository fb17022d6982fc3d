import numpy as np
import pandas as pd

from sparsecert.data.dataset import Dataset
from sparsecert.data.idx import load_idx
from sparsecert.misc.exceptions import DataError

MNIST_SIDE = 28
PADDED_SIDE = 32


def preprocess_mnist(images, labels, class_count: int = 10) -> Dataset:
    """
    centers every 28x28 image in a 32x32 zero frame, scales pixels to [0, 1] and flattens to 1024 entries

    :param images: uint8 array of shape (m, 28, 28)
    :param labels:
    :param class_count:
    :return:
    """
    images = np.asarray(images)
    if images.ndim != 3 or images.shape[1:] != (MNIST_SIDE, MNIST_SIDE):
        raise DataError("expected 28x28 images, got shape {}".format(images.shape))
    pad = (PADDED_SIDE - MNIST_SIDE) // 2
    padded = np.pad(images.astype(np.float64) / 255.0, ((0, 0), (pad, pad), (pad, pad)))
    x = padded.reshape(images.shape[0], PADDED_SIDE * PADDED_SIDE)
    return Dataset(x, np.asarray(labels, dtype=np.int64), class_count, {"preprocessing": "pad28to32/255"})


def preprocess_images(images, labels, class_count: int = None) -> Dataset:
    """
    MNIST sized images go through preprocess_mnist, any other size is only scaled and flattened

    :param images:
    :param labels:
    :param class_count: defaults to max label + 1, at least 2
    :return:
    """
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64)
    if class_count is None:
        class_count = max(int(labels.max()) + 1 if labels.size else 0, 2)
    if images.ndim == 3 and images.shape[1:] == (MNIST_SIDE, MNIST_SIDE):
        return preprocess_mnist(images, labels, class_count)
    x = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    return Dataset(x, labels, class_count, {"preprocessing": "flatten/255"})


def load_dataset(images_path: str, labels_path: str, class_count: int = None) -> Dataset:
    """
    IDX files to a Dataset: load_idx parses the raw uint8 pixels, which lie outside the unit ball until
    preprocess_images scales them
    """
    images, labels = load_idx(images_path, labels_path)
    return preprocess_images(images, labels, class_count)


def balanced_subset(dataset: Dataset, size: int, seed: int = 0) -> Dataset:
    """
    draws a class balanced subsample of the given size; classes with too few samples are filled up with
    replacement, and the result is shuffled

    :param dataset:
    :param size: number of samples of the subset
    :param seed:
    :return:
    """
    assert size >= 1, "subset size must be positive"
    frame = pd.DataFrame({"index": np.arange(dataset.m), "class": dataset.y})
    classes = sorted(frame["class"].unique())
    per_class = [size // len(classes) + (1 if i < size % len(classes) else 0) for i in range(len(classes))]
    parts = []
    for i, (label, count) in enumerate(zip(classes, per_class)):
        members = frame.loc[frame["class"] == label, :]
        args = {}
        if count > members.shape[0]:
            args["replace"] = True
        parts.append(members.sample(count, random_state=seed + i, **args))
    sampled = pd.concat(parts)
    sampled.reset_index(inplace=True, drop=True)
    sampled = sampled.iloc[np.random.default_rng(seed).permutation(sampled.shape[0]), :]
    return dataset.subset(sampled["index"].to_numpy())
