"""
Effective sparsity metrics and best s-term truncation.
"""
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from sparsecert.linalg.norms import INF, as_matrix, as_vector, column_norms, lp_norm, mixed_norm
from sparsecert.misc.exceptions import DomainError


@dataclass(frozen=True)
class SparsityProfile:
    """
    per layer pairs (s1, s2): s1 is the largest effective sparsity among the columns of the layer matrix and s2 its
    effective joint sparsity
    """
    pairs: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        assert len(self.pairs) >= 1, "a sparsity profile needs at least one layer"
        for s1, s2 in self.pairs:
            if s1 < 1 or s2 < 1:
                raise DomainError("effective sparsities are >= 1, got ({}, {})".format(s1, s2))

    @property
    def depth(self) -> int:
        return len(self.pairs)

    def layer_weights(self) -> List[float]:
        return [math.sqrt(s1 * s2) for s1, s2 in self.pairs]

    def to_dict(self) -> dict:
        return {"s1": [s1 for s1, _ in self.pairs], "s2": [s2 for _, s2 in self.pairs]}


def effective_sparsity(v) -> float:
    """
    ||v||_{1/2} / ||v||_1, defined as 1 for the zero vector

    :param v:
    :return: a value in [1, n]
    """
    v = as_vector(v)
    l1 = lp_norm(v, 1)
    if l1 == 0:
        return 1.0
    # rounding may push the ratio a few ulp outside [1, n]
    return float(np.clip(lp_norm(v, 0.5) / l1, 1.0, v.shape[0]))


def column_effective_sparsity(W) -> np.ndarray:
    """
    effective sparsity of every column; zero columns count as 1

    :param W:
    :return:
    """
    W = as_matrix(W)
    l1 = column_norms(W, 1)
    half = column_norms(W, 0.5)
    ratios = np.ones_like(l1)
    nonzero = l1 > 0
    ratios[nonzero] = half[nonzero] / l1[nonzero]
    return np.clip(ratios, 1.0, W.shape[0])


def effective_joint_sparsity(W) -> float:
    """
    ||W||_{1,1} / ||W||_{1,inf}, defined as 1 for the zero matrix

    :param W:
    :return: a value in [1, n2]
    """
    W = as_matrix(W)
    peak = mixed_norm(W, 1, INF)
    if peak == 0:
        return 1.0
    return float(np.clip(mixed_norm(W, 1, 1) / peak, 1.0, W.shape[1]))


def sparsity_profile(layers: Sequence) -> SparsityProfile:
    pairs = []
    for W in layers:
        pairs.append((float(np.max(column_effective_sparsity(W))), effective_joint_sparsity(W)))
    return SparsityProfile(pairs=tuple(pairs))


def top_indices(values, s: int) -> np.ndarray:
    """
    indices of the s largest values; among equal values the lower index wins

    :param values: 1-d array
    :param s:
    :return: sorted index array
    """
    # stable sort on the negated values keeps index order inside ties
    order = np.argsort(-np.asarray(values), kind="stable")
    return np.sort(order[:s])


def _check_budget(s, n: int, what: str) -> int:
    if isinstance(s, bool) or int(s) != s:
        raise DomainError("{} budget must be an integer, got {}".format(what, s))
    s = int(s)
    if s < 1 or s > n:
        raise DomainError("{} budget must lie in [1, {}], got {}".format(what, n, s))
    return s


def truncate_top_s(v, s: int) -> np.ndarray:
    """
    best s-term approximation: keeps the s largest magnitude entries and zeroes the rest. The result z satisfies
    ||v - z||_1 <= ||v||_{1/2} / (4s) and ||v - z||_inf <= ||v||_1 / s.

    :param v:
    :param s: 1 <= s <= n
    :return:
    """
    v = as_vector(v)
    s = _check_budget(s, v.shape[0], "sparsity")
    z = np.zeros_like(v)
    keep = top_indices(np.abs(v), s)
    z[keep] = v[keep]
    return z


def truncate_top_columns(W, s: int) -> np.ndarray:
    """
    keeps the s columns with the largest l_1 norm, ||W - W_hat||_{1,inf} <= ||W||_{1,1} / s

    :param W:
    :param s: 1 <= s <= n2
    :return:
    """
    W = as_matrix(W)
    s = _check_budget(s, W.shape[1], "column")
    out = np.zeros_like(W)
    keep = top_indices(column_norms(W, 1), s)
    out[:, keep] = W[:, keep]
    return out


def round_to_grid(a, step: float) -> np.ndarray:
    """
    rounds every entry to the nearest integer multiple of step, halves away from zero

    :param a: array
    :param step: positive grid pitch
    :return:
    """
    if not step > 0:
        raise DomainError("grid step must be positive, got {}".format(step))
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.floor(np.abs(a) / step + 0.5) * step
