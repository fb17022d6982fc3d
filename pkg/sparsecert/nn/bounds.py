import math

from sparsecert.compression.matrix import capacity_count, plan_compression
from sparsecert.linalg.sparsity import SparsityProfile
from sparsecert.misc.exceptions import DomainError, PreconditionError
from sparsecert.nn.network import LayeredNetwork, rebalance
from sparsecert.nn.schedule import error_schedule
from sparsecert.reports import BoundReport, confidence_from_log_cardinality

COMPRESSED_NETWORK = "adversarial risk of the compressed network"
UNITS = ("original", "rebalanced")


def surrogate_capacity(profile: SparsityProfile, gamma: float, eps: float, m: int) -> float:
    """
    sqrt(d/m ((1 + gamma/2 - eps) / (gamma/2 - 2 eps))^2 (sum_j sqrt(sbar1^j sbar2^j))^2), constants dropped

    :return:
    """
    ratio = (1 + gamma / 2 - eps) / (gamma / 2 - 2 * eps)
    return math.sqrt(profile.depth / m * ratio ** 2 * sum(profile.layer_weights()) ** 2)


def bound_network(net: LayeredNetwork, profile: SparsityProfile, gamma: float, eps: float, m: int,
                  empirical_loss: float, units: str = "original", delta: float = 0.0) -> BoundReport:
    """
    evaluates the bound on the adversarial risk of the compressed network: the empirical adversarial margin loss
    plus sqrt(sum_i log|C^i| / m), where C^i is the covering set of layer i under its scheduled budget.

    The network is rebalanced first. With ``units="original"`` gamma is a margin of the given network and is divided
    by the rebalancing scale; with ``units="rebalanced"`` it is used as is. The precondition eps < gamma/4 applies in
    rebalanced units.

    :param net: the network, evaluated with ReLU on every layer
    :param profile: sparsity profile of the layers
    :param gamma: margin
    :param eps: attack radius
    :param m: number of samples the empirical loss was measured on
    :param empirical_loss: empirical adversarial margin loss at gamma
    :param units: "original" or "rebalanced"
    :param delta: fraction of samples on which the network is not compressible, added to the bound
    :return:
    """
    if units not in UNITS:
        raise DomainError("unknown units {}".format(units))
    if m < 1:
        raise DomainError("sample count must be positive, got {}".format(m))
    if profile.depth != net.depth:
        raise DomainError("profile has {} layers, network has {}".format(profile.depth, net.depth))
    if not 0 <= delta <= 1:
        raise DomainError("delta must lie in [0, 1], got {}".format(delta))
    balanced, scale = rebalance(net.with_final_activation("relu"))
    gamma_r = gamma / scale if units == "original" else gamma
    if not eps < gamma_r / 4:
        raise PreconditionError("eps={} must be below gamma/4={} in rebalanced units (gamma={}, scale={})".format(
            eps, gamma_r / 4, gamma, scale))
    schedule = error_schedule(profile, gamma_r, eps)
    layers, log_card = [], 0.0
    for i, W in enumerate(balanced.layers):
        budget = schedule.budgets[i]
        plan = plan_compression(W, budget)
        count = capacity_count(plan, W.shape[0], W.shape[1], budget)
        log_card += count.log_card
        s1, s2 = profile.pairs[i]
        layers.append({"layer": i + 1, "sbar1": s1, "sbar2": s2, "s1": plan.s1, "s2": plan.s2, "gamma_i": budget,
                       "quant_step": plan.quant_step, "log_card": count.log_card,
                       "asymptotic": count.asymptotic})
    capacity = math.sqrt(log_card / m) + delta
    notes = ["surrogate: asymptotic form, constants dropped"]
    if delta > 0:
        notes.append("network compressible on a 1 - delta fraction of the sample, delta added to the bound")
    return BoundReport(
        bounded_quantity=COMPRESSED_NETWORK,
        empirical_loss=empirical_loss,
        capacity_term=capacity,
        log_cardinality=log_card,
        confidence=confidence_from_log_cardinality(log_card),
        surrogate=surrogate_capacity(profile, gamma_r, eps, m),
        terms={"gamma_rebalanced": gamma_r, "delta": delta, "levels": list(schedule.levels)},
        layers=layers,
        scale=scale,
        notes=notes,
        config={"gamma": gamma, "eps": eps, "m": m, "units": units, "dims": net.dims},
    )
