from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from sparsecert.misc.exceptions import DataError

# inputs must lie in the unit l_inf ball
BALL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    labeled samples, x of shape (m, n) and y of shape (m,) with labels in [0, class_count)
    """
    x: np.ndarray
    y: np.ndarray
    class_count: int
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        y = np.array(self.y)
        if x.ndim != 2:
            raise DataError("samples must form an (m, n) array, got shape {}".format(x.shape))
        if y.shape != (x.shape[0],):
            raise DataError("got {} labels for {} samples".format(y.shape[0] if y.ndim else 0, x.shape[0]))
        if y.size and not np.issubdtype(y.dtype, np.integer):
            raise DataError("labels must be integers")
        y = y.astype(np.int64)
        if self.class_count < 1:
            raise DataError("class count must be positive")
        if y.size and (y.min() < 0 or y.max() >= self.class_count):
            raise DataError("labels must lie in [0, {})".format(self.class_count))
        if x.size and not np.all(np.isfinite(x)):
            raise DataError("samples must be finite")
        if x.size and np.max(np.abs(x)) > 1 + BALL_TOL:
            raise DataError("samples must satisfy ||x||_inf <= 1, got {}".format(np.max(np.abs(x))))
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @property
    def input_dim(self) -> int:
        return self.x.shape[1]

    def __len__(self) -> int:
        return self.m

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.x[indices], self.y[indices], self.class_count, dict(self.metadata))

    def batches(self, batch_size: int, order=None, with_indices: bool = False):
        """
        yields (x, y) batches in the given index order

        :param batch_size:
        :param order: permutation of the sample indices, defaults to storage order
        :param with_indices: yield (indices, x, y) instead
        :return:
        """
        order = np.arange(self.m) if order is None else np.asarray(order)
        for start in range(0, self.m, batch_size):
            chosen = order[start:start + batch_size]
            if with_indices:
                yield chosen, self.x[chosen], self.y[chosen]
            else:
                yield self.x[chosen], self.y[chosen]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.x, columns=["x{}".format(i) for i in range(self.input_dim)])
        frame["class"] = self.y
        return frame
