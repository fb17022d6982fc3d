import math

from sparsecert.misc.exceptions import DomainError
from sparsecert.reports import BoundReport, confidence_from_log_cardinality

COMPRESSED_LINEAR = "adversarial risk of the compressed linear classifier"


def _check(gamma: float, eps: float, m: int) -> None:
    if not gamma > 0:
        raise DomainError("gamma must be positive, got {}".format(gamma))
    if eps < 0:
        raise DomainError("eps must be nonnegative, got {}".format(eps))
    if m < 1:
        raise DomainError("sample count must be positive, got {}".format(m))


def bound_linear_stochastic(gamma: float, eps: float, m: int, n: int, empirical_loss: float = 0.0) -> BoundReport:
    """
    bound through the clip-and-round compressor, which fails with probability delta. Delta is balanced against the
    sample size as delta = ((1 + eps)^2 / (gamma^2 m))^(1/3).

    :param gamma: margin
    :param eps: attack radius
    :param m: number of samples
    :param n: input dimension
    :param empirical_loss: empirical adversarial margin loss of the uncompressed classifier
    :return:
    """
    _check(gamma, eps, m)
    if n < 1:
        raise DomainError("dimension must be positive, got {}".format(n))
    delta = ((1 + eps) ** 2 / (gamma ** 2 * m)) ** (1.0 / 3.0)
    q = (1 + eps) ** 2 / (delta * gamma ** 2)
    r = 4 * n * delta * gamma / (1 + eps)
    log_r = math.log(r)
    notes = ["logarithmic factors of the support size are dropped"]
    invalid = log_r <= 0 or delta > 1
    if log_r <= 0:
        notes.append("log r <= 0: the discretization has fewer than two levels, the capacity term is undefined")
    if delta > 1:
        notes.append("delta > 1: too few samples for the chosen margin")
    sampling = math.sqrt(q * log_r / m) if log_r > 0 else float("nan")
    log_card = q * log_r
    return BoundReport(
        bounded_quantity=COMPRESSED_LINEAR,
        empirical_loss=empirical_loss,
        capacity_term=sampling + delta,
        log_cardinality=log_card,
        confidence=confidence_from_log_cardinality(log_card) if log_r > 0 else float("nan"),
        surrogate=((1 + eps) ** 2 / (gamma ** 2 * m)) ** (1.0 / 3.0),
        invalid_regime=invalid,
        terms={"delta": delta, "q": q, "r": r, "log_r": log_r, "sampling_term": sampling},
        notes=notes,
        config={"gamma": gamma, "eps": eps, "m": m, "n": n},
    )


def bound_linear_sparse(sbar: float, gamma: float, eps: float, m: int, empirical_loss: float = 0.0) -> BoundReport:
    """
    bound for an effectively sbar-sparse linear classifier, compressed deterministically. The covering set has
    r^q elements with q = sbar (1 + eps) / (2 gamma) and r = 4 sbar (1 + eps)^2 / gamma^2.

    :param sbar: effective sparsity >= 1
    :param gamma: margin
    :param eps: attack radius
    :param m: number of samples
    :param empirical_loss:
    :return:
    """
    _check(gamma, eps, m)
    if sbar < 1:
        raise DomainError("effective sparsity is at least 1, got {}".format(sbar))
    q = sbar * (1 + eps) / (2 * gamma)
    r = 4 * sbar * (1 + eps) ** 2 / gamma ** 2
    log_r = math.log(r)
    invalid = log_r <= 0
    notes = []
    if invalid:
        notes.append("log r <= 0: the margin exceeds the range of the classifier, the capacity term is undefined")
    log_card = q * log_r
    return BoundReport(
        bounded_quantity=COMPRESSED_LINEAR,
        empirical_loss=empirical_loss,
        capacity_term=math.sqrt(log_card / m) if not invalid else float("nan"),
        log_cardinality=log_card,
        confidence=confidence_from_log_cardinality(log_card) if not invalid else float("nan"),
        surrogate=math.sqrt((1 + eps) * sbar / (gamma * m)),
        invalid_regime=invalid,
        terms={"q": q, "r": r, "log_r": log_r},
        notes=notes,
        config={"sbar": sbar, "gamma": gamma, "eps": eps, "m": m},
    )
