"""
Binary linear classifier f_w(x) = (0, <w, x>) with labels in {1, 2}, its adversarial margin and three ways of
compressing w.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from sparsecert.data.dataset import Dataset
from sparsecert.linalg.norms import INF, as_vector, lp_norm
from sparsecert.linalg.sparsity import effective_sparsity, round_to_grid, truncate_top_s
from sparsecert.misc.exceptions import DataError, DomainError, PreconditionError

MARGIN_FORMS = ("factored", "infimum")
# slack for ||w||_1 <= 1 and ||x||_inf <= 1 checks on computed vectors
UNIT_BALL_TOL = 1e-12


@dataclass(frozen=True)
class LinearClassifier:
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", as_vector(self.w))

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def scores(self, x) -> np.ndarray:
        return np.array([0.0, float(np.dot(self.w, as_vector(x)))])

    def require_unit_l1(self) -> None:
        norm = lp_norm(self.w, 1)
        if norm > 1 + UNIT_BALL_TOL:
            raise PreconditionError("compression requires ||w||_1 <= 1, got {}".format(norm))


@dataclass(frozen=True)
class StochasticCompressionParams:
    gamma: float
    eps: float = 0.0
    delta: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("gamma must be positive, got {}".format(self.gamma))
        if not 0 < self.delta <= 1:
            raise DomainError("delta must lie in (0, 1], got {}".format(self.delta))
        if not self.eps >= 0:
            raise DomainError("eps must be nonnegative, got {}".format(self.eps))


def label_to_binary(y) -> int:
    """
    maps a {0, 1} label to the {1, 2} encoding of the linear model

    :param y:
    :return:
    """
    if y not in (0, 1):
        raise DomainError("binary dataset labels must be 0 or 1, got {}".format(y))
    return int(y) + 1


def _check_label(y) -> int:
    if y not in (1, 2):
        raise DomainError("labels of the linear model are 1 or 2, got {}".format(y))
    return int(y)


def linear_adversarial_margin(c: LinearClassifier, x, y: int, eps: float, form: str = "factored") -> float:
    """
    adversarial margin of f_w at (x, y) under an l_inf adversary of radius eps.

    ``form="factored"`` evaluates (2y - 3)(<w, x> - eps ||w||_1). ``form="infimum"`` evaluates the infimum of the
    margin over the ball, (2y - 3)<w, x> - eps ||w||_1. Both agree for y = 2.

    :param c: classifier
    :param x: input with ||x||_inf <= 1
    :param y: label in {1, 2}
    :param eps: attack radius >= 0
    :param form: "factored" or "infimum"
    :return:
    """
    y = _check_label(y)
    if form not in MARGIN_FORMS:
        raise DomainError("unknown margin form {}".format(form))
    if eps < 0:
        raise DomainError("eps must be nonnegative, got {}".format(eps))
    x = as_vector(x)
    assert lp_norm(x, INF) <= 1 + UNIT_BALL_TOL, "inputs must lie in the unit l_inf ball"
    sign = 2 * y - 3
    inner = float(np.dot(c.w, x))
    l1 = lp_norm(c.w, 1)
    if form == "factored":
        return sign * (inner - eps * l1)
    return sign * inner - eps * l1


def linear_margin_loss(c: LinearClassifier, dataset: Dataset, gamma: float, eps: float, form: str = "infimum") -> float:
    """
    empirical adversarial margin loss (1/m) sum 1{adversarial margin <= gamma} on a binary dataset, whose {0, 1}
    labels are mapped to {1, 2} first. The empirical_loss argument of the linear bounds.

    :param c: classifier of the dataset dimension
    :param dataset: samples with labels 0 and 1
    :param gamma: margin threshold
    :param eps: attack radius
    :param form: margin form, see linear_adversarial_margin
    :return:
    """
    if dataset.m == 0:
        raise DataError("margin loss of an empty dataset is undefined")
    if dataset.input_dim != c.dim:
        raise DataError("dataset dimension {} does not match the classifier dimension {}".format(
            dataset.input_dim, c.dim))
    values = np.array([linear_adversarial_margin(c, x, label_to_binary(y), eps, form=form)
                       for x, y in zip(dataset.x, dataset.y)])
    loss = float(np.mean(values <= gamma))
    logging.debug("linear margin loss {:.4f} at gamma={} eps={} on {} samples".format(loss, gamma, eps, dataset.m))
    return loss


def inclusion_probabilities(c: LinearClassifier, params: StochasticCompressionParams) -> np.ndarray:
    """
    p_i = |w_i| (1 + eps)^2 / (delta gamma^2), capped at 1

    :param c:
    :param params:
    :return:
    """
    p = np.abs(c.w) * (1 + params.eps) ** 2 / (params.delta * params.gamma ** 2)
    return np.minimum(p, 1.0)


def expected_nonzeros(c: LinearClassifier, params: StochasticCompressionParams) -> float:
    return float(np.sum(inclusion_probabilities(c, params)))


def compress_vector_stochastic(c: LinearClassifier, params: StochasticCompressionParams, draws: int = None):
    """
    unbiased random sparsification: w_hat_i = z_i w_i / p_i with z_i ~ Bernoulli(p_i). Capping p_i at 1 keeps the
    estimator unbiased since such entries are kept with certainty.

    :param c: classifier with ||w||_1 <= 1
    :param params:
    :param draws: if given, returns an array of shape (draws, n) of independent compressions
    :return:
    """
    c.require_unit_l1()
    p = inclusion_probabilities(c, params)
    rng = np.random.default_rng(params.seed)
    shape = c.w.shape if draws is None else (draws, c.dim)
    z = rng.random(shape) < p
    scaled = np.zeros_like(c.w)
    positive = p > 0
    scaled[positive] = c.w[positive] / p[positive]
    return np.where(z, scaled, 0.0)


def clip_threshold(gamma: float, eps: float, n: int) -> float:
    return gamma / (4 * n * (1 + eps))


def clip_round_step(gamma: float, eps: float, n: int) -> float:
    return gamma / (2 * n * (1 + eps))


def compress_vector_clip_round(c: LinearClassifier, params: StochasticCompressionParams) -> np.ndarray:
    """
    clips small entries, sparsifies with compress_vector_stochastic at budget gamma/2 and rounds to a grid. With
    probability at least 1 - delta the adversarial margin moves by at most gamma on a fixed sample.

    :param c: classifier with ||w||_1 <= 1
    :param params:
    :return:
    """
    c.require_unit_l1()
    n = c.dim
    clipped = np.where(np.abs(c.w) < clip_threshold(params.gamma, params.eps, n), 0.0, c.w)
    half = StochasticCompressionParams(gamma=params.gamma / 2, eps=params.eps, delta=params.delta,
                                       seed=params.seed)
    sparse = compress_vector_stochastic(LinearClassifier(clipped), half)
    return round_to_grid(sparse, clip_round_step(params.gamma, params.eps, n))


def sparse_budget(sbar: float, gamma: float, eps: float, n: int) -> int:
    """
    s = ceil(sbar (1 + eps) / (2 gamma)) clamped to [1, n]

    :return:
    """
    return int(min(max(math.ceil(sbar * (1 + eps) / (2 * gamma)), 1), n))


def compress_vector_effective_sparse(c: LinearClassifier, gamma: float, eps: float) -> np.ndarray:
    """
    deterministic compression: keep the s largest entries, then round to multiples of gamma / (s (1 + eps)). Each
    stage moves the adversarial margin by at most gamma/2 for every x in the unit l_inf ball.

    :param c: classifier with ||w||_1 <= 1
    :param gamma: positive margin budget
    :param eps: attack radius
    :return:
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive, got {}".format(gamma))
    if eps < 0:
        raise DomainError("eps must be nonnegative, got {}".format(eps))
    c.require_unit_l1()
    s = sparse_budget(effective_sparsity(c.w), gamma, eps, c.dim)
    logging.debug("effective sparse compression keeps {} of {} entries".format(s, c.dim))
    truncated = truncate_top_s(c.w, s)
    return round_to_grid(truncated, gamma / (s * (1 + eps)))
