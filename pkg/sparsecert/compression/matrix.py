"""
Compression of one weight matrix in the mixed (1, inf) norm.

The compressed matrix keeps at most s2 columns, at most s1 entries per kept column, and every entry is an integer
multiple of the plan's quantization step. Dropping columns and entries costs at most gamma/3 each, and so does nearest
rounding. Plain calls cap the rounding so that no column l_1 norm grows; a capped column may lose up to 2 gamma/3 in
rounding, but it was not dropped, so the total still stays within gamma.
"""
import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from sparsecert.linalg.norms import INF, as_matrix, column_norms, mixed_norm
from sparsecert.linalg.sparsity import column_effective_sparsity, effective_joint_sparsity, round_to_grid, \
    truncate_top_columns, truncate_top_s
from sparsecert.misc.exceptions import DomainError, PreconditionError

# drift allowed on ||W||_{1,inf} <= 1 after rebalancing
REBALANCE_TOL = 1e-9


@dataclass(frozen=True)
class CompressionPlan:
    """
    budgets of one layer. ``norm``, ``sbar1`` and ``sbar2`` record the measurements the budgets were derived from.
    """
    gamma: float
    s1: int
    s2: int
    quant_step: float
    norm: float = 0.0
    sbar1: float = 1.0
    sbar2: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive, got {}".format(self.gamma))
        if self.s1 < 1 or self.s2 < 1:
            raise DomainError("sparsity budgets must be positive, got s1={} s2={}".format(self.s1, self.s2))
        if not self.quant_step > 0:
            raise DomainError("quantization step must be positive, got {}".format(self.quant_step))

    def check_shape(self, n1: int, n2: int) -> None:
        if self.s1 > n1 or self.s2 > n2:
            raise DomainError("plan budgets s1={} s2={} exceed the matrix shape ({}, {})".format(
                self.s1, self.s2, n1, n2))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, content: dict) -> "CompressionPlan":
        return cls(**content)


@dataclass(frozen=True)
class CapacityCount:
    """
    natural log of the covering set cardinality, split into the choice of columns, the choice of entries inside the
    columns and the grid term. ``asymptotic`` is the ||W||_{1,inf}^2 sbar1 sbar2 / gamma^2 scaling the count is
    summarized by.
    """
    column_choice: float
    entry_choice: float
    grid: float
    asymptotic: float = 0.0

    @property
    def log_card(self) -> float:
        return self.column_choice + self.entry_choice + self.grid

    def __add__(self, other: "CapacityCount") -> "CapacityCount":
        return CapacityCount(column_choice=self.column_choice + other.column_choice,
                             entry_choice=self.entry_choice + other.entry_choice,
                             grid=self.grid + other.grid,
                             asymptotic=self.asymptotic + other.asymptotic)

    def to_dict(self) -> dict:
        content = asdict(self)
        content["log_card"] = self.log_card
        return content


def _clamped_ceil(value: float, upper: int) -> int:
    if not math.isfinite(value):
        return upper
    return int(min(max(math.ceil(value), 1), upper))


def plan_compression(W, gamma: float) -> CompressionPlan:
    """
    s1 = ceil(3 ||W||_{1,inf} sbar1 / (4 gamma)), s2 = ceil(3 ||W||_{1,inf} sbar2 / gamma), both clamped to the
    matrix shape, and a grid of pitch 2 gamma / (3 s1)

    :param W: layer matrix
    :param gamma: budget in ||.||_{1,inf}
    :return:
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive, got {}".format(gamma))
    W = as_matrix(W)
    n1, n2 = W.shape
    norm = mixed_norm(W, 1, INF)
    sbar1 = float(np.max(column_effective_sparsity(W)))
    sbar2 = effective_joint_sparsity(W)
    if norm == 0:
        s1, s2 = 1, 1
    else:
        s1 = _clamped_ceil(3 * norm * sbar1 / (4 * gamma), n1)
        s2 = _clamped_ceil(3 * norm * sbar2 / gamma, n2)
    return CompressionPlan(gamma=gamma, s1=s1, s2=s2, quant_step=2 * gamma / (3 * s1), norm=norm, sbar1=sbar1,
                           sbar2=sbar2)


def capacity_count(plan: CompressionPlan, n1: int, n2: int, gamma: float) -> CapacityCount:
    """
    log of (e n2 / s2)^s2 (e n1 / s1)^(s1 s2) (1 + 6 / gamma)^(s1 s2)

    :param plan:
    :param n1: rows of the layer
    :param n2: columns of the layer
    :param gamma: covering radius is gamma / 3
    :return:
    """
    plan.check_shape(n1, n2)
    s1, s2 = plan.s1, plan.s2
    return CapacityCount(column_choice=s2 * math.log(math.e * n2 / s2),
                         entry_choice=s1 * s2 * math.log(math.e * n1 / s1),
                         grid=s1 * s2 * math.log1p(6 / gamma),
                         asymptotic=plan.norm ** 2 * plan.sbar1 * plan.sbar2 / gamma ** 2)


def round_columns_within(W: np.ndarray, step: float, cap: float) -> np.ndarray:
    """
    nearest grid rounding, halves away from zero, except that no column may end with an l_1 norm above cap. In a
    column that would, the entries rounded up by the most are moved one step toward zero until it fits. Every entry
    then moves by at most one step.

    :param W: matrix whose columns satisfy ||w_j||_1 <= cap
    :param step: grid pitch
    :param cap: largest allowed column l_1 norm
    :return:
    """
    W = as_matrix(W)
    rounded = round_to_grid(W, step)
    multiples = np.sign(rounded) * np.round(np.abs(rounded) / step)
    for j in np.flatnonzero(column_norms(multiples * step, 1) > cap):
        raised = np.abs(multiples[:, j]) * step - np.abs(W[:, j])
        for i in np.argsort(-raised, kind="stable"):
            if raised[i] <= 0 or np.sum(np.abs(multiples[:, j]) * step) <= cap:
                break
            multiples[i, j] -= np.sign(multiples[i, j])
    return multiples * step


def compress_columns(W: np.ndarray, plan: CompressionPlan,
                     cap: float = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    the three stages of matrix_compress, each returned for inspection

    :param W:
    :param plan:
    :param cap: if given, the rounding stage keeps every column l_1 norm at or below it
    :return: (column truncated, entry truncated, quantized)
    """
    W = as_matrix(W)
    dropped_columns = truncate_top_columns(W, plan.s2)
    sparse = np.zeros_like(W)
    for j in np.flatnonzero(np.any(dropped_columns != 0, axis=0)):
        sparse[:, j] = truncate_top_s(dropped_columns[:, j], plan.s1)
    if cap is None:
        return dropped_columns, sparse, round_to_grid(sparse, plan.quant_step)
    return dropped_columns, sparse, round_columns_within(sparse, plan.quant_step, cap)


def on_grid_plan(W, gamma: float, rtol: float = 1e-9) -> Optional[CompressionPlan]:
    """
    the plan with the smallest s1 whose family already contains W, trying the grids 2 gamma / (3 k) for
    k = max column nonzeros .. n1; None if W lies on none of them

    :param W:
    :param gamma:
    :param rtol: tolerance on the grid check relative to the step
    :return:
    """
    W = as_matrix(W)
    n1, _ = W.shape
    nonzero = W != 0
    s1 = max(int(np.max(np.count_nonzero(nonzero, axis=0))), 1)
    s2 = max(int(np.count_nonzero(np.any(nonzero, axis=0))), 1)
    candidates = np.arange(s1, n1 + 1)
    for value in np.unique(np.abs(W[nonzero])):
        multiples = value / (2 * gamma / (3 * candidates))
        candidates = candidates[np.abs(multiples - np.round(multiples)) <= rtol * np.maximum(1.0, multiples)]
        if candidates.size == 0:
            return None
    k = int(candidates[0])
    return CompressionPlan(gamma=gamma, s1=k, s2=s2, quant_step=2 * gamma / (3 * k), norm=mixed_norm(W, 1, INF),
                           sbar1=float(np.max(column_effective_sparsity(W))), sbar2=effective_joint_sparsity(W))


def matrix_compress(W, gamma: float, plan: CompressionPlan = None) -> Tuple[np.ndarray, CapacityCount]:
    """
    compresses W so that ||W - W_hat||_{1,inf} <= gamma.

    Without an explicit plan the budgets are derived from W, which then must satisfy ||W||_{1,inf} <= 1; rebalance
    the network first if it does not. Rounding is then capped so that ||W_hat||_{1,inf} <= ||W||_{1,inf}, and a W
    that the derived plan would change but that already lies in the family of some plan at this gamma (see
    on_grid_plan) is returned unchanged, so matrix_compress(W_hat, gamma) == W_hat.

    :param W: layer matrix
    :param gamma: budget, must equal plan.gamma when a plan is given
    :param plan: optional fixed budgets; the result is a fixed point of matrix_compress for the same plan
    :return: the compressed matrix and the capacity count of its family
    """
    W = as_matrix(W)
    n1, n2 = W.shape
    if plan is not None:
        if not math.isclose(gamma, plan.gamma, rel_tol=1e-12):
            raise DomainError("gamma {} does not match the budget {} of the plan".format(gamma, plan.gamma))
        plan.check_shape(n1, n2)
        _, _, compressed = compress_columns(W, plan)
        return compressed, capacity_count(plan, n1, n2, plan.gamma)
    norm = mixed_norm(W, 1, INF)
    if norm > 1 + REBALANCE_TOL:
        raise PreconditionError("matrix_compress requires ||W||_(1,inf) <= 1, got {}; rebalance the network "
                                "first".format(norm))
    plan = plan_compression(W, gamma)
    _, _, compressed = compress_columns(W, plan, cap=norm)
    if not np.array_equal(compressed, W):
        existing = on_grid_plan(W, gamma)
        if existing is not None:
            logging.debug("{}x{} matrix is already compressed at gamma={}, s1={}".format(n1, n2, gamma, existing.s1))
            return W.copy(), capacity_count(existing, n1, n2, gamma)
    logging.debug("compressed {}x{} matrix with s1={} s2={} step={:.3g}".format(n1, n2, plan.s1, plan.s2,
                                                                                plan.quant_step))
    return compressed, capacity_count(plan, n1, n2, gamma)


def in_family(W_hat, plan: CompressionPlan, rtol: float = 1e-9) -> bool:
    """
    whether W_hat has at most s2 nonzero columns, at most s1 nonzeros per column and lies on the plan's grid

    :param W_hat:
    :param plan:
    :param rtol: tolerance on the grid check relative to the step
    :return:
    """
    W_hat = as_matrix(W_hat)
    nonzero = W_hat != 0
    if np.count_nonzero(np.any(nonzero, axis=0)) > plan.s2:
        return False
    if np.any(np.count_nonzero(nonzero, axis=0) > plan.s1):
        return False
    multiples = W_hat / plan.quant_step
    return bool(np.all(np.abs(multiples - np.round(multiples)) <= rtol * np.maximum(1.0, np.abs(multiples))))
