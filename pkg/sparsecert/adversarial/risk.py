import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from sparsecert.adversarial.attacks import AttackConfig, pgd_attack_batch
from sparsecert.data.dataset import Dataset
from sparsecert.misc.config_manager import ConfigManager
from sparsecert.misc.exceptions import DataError
from sparsecert.nn.network import LayeredNetwork, margins

# rows per attack chunk; fixed so results do not depend on the worker count
CHUNK_SIZE = 256


@dataclass(frozen=True)
class RiskEstimate:
    """
    fraction of samples whose estimated adversarial margin is <= gamma. PGD over-estimates margins, so the value is
    a lower bound on the empirical adversarial margin loss.
    """
    value: float
    gamma: float
    eps: float
    m: int

    def to_dict(self) -> dict:
        return {"value": self.value, "gamma": self.gamma, "eps": self.eps, "m": self.m}


def worker_count(config_manager: ConfigManager = None) -> int:
    """
    number of attack workers, capped by SPARSE_CERT_THREADS

    :param config_manager:
    :return:
    """
    if config_manager is None:
        config_manager = ConfigManager(default_variables={"threads": 1})
    if not config_manager.has_value("threads"):
        return 1
    return max(1, config_manager.get_int("threads"))


def adversarial_margins(net: LayeredNetwork, x, y, cfg: AttackConfig, threads: int = 1) -> np.ndarray:
    """
    PGD margin estimate of every sample, attacked in fixed chunks

    :param net:
    :param x: samples of shape (m, n)
    :param y: labels
    :param cfg:
    :param threads: worker count, the result is identical for every value
    :return:
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y)
    starts = list(range(0, x.shape[0], CHUNK_SIZE))

    def run(start: int) -> np.ndarray:
        stop = start + CHUNK_SIZE
        chunk_x, chunk_y = x[start:stop], y[start:stop]
        eta = pgd_attack_batch(net, chunk_x, chunk_y, cfg, indices=np.arange(start, start + chunk_x.shape[0]))
        return margins(net, chunk_x + eta, chunk_y)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(start) for start in starts]
    return np.concatenate(parts)


def adversarial_risk(net: LayeredNetwork, dataset: Dataset, gamma: float, eps: float, cfg: AttackConfig,
                     threads: int = 1) -> RiskEstimate:
    """
    empirical adversarial margin loss (1/m) sum 1{margin under attack <= gamma}

    :param net:
    :param dataset:
    :param gamma: margin threshold
    :param eps: attack radius, overrides cfg.eps
    :param cfg:
    :param threads:
    :return:
    """
    if dataset.m == 0:
        raise DataError("adversarial risk of an empty dataset is undefined")
    values = adversarial_margins(net, dataset.x, dataset.y, cfg.with_eps(eps), threads=threads)
    risk = float(np.mean(values <= gamma))
    logging.debug("adversarial risk {:.4f} at gamma={} eps={} on {} samples".format(risk, gamma, eps, dataset.m))
    return RiskEstimate(value=risk, gamma=gamma, eps=eps, m=dataset.m)


def compressibility_fraction(net: LayeredNetwork, compressed: LayeredNetwork, dataset: Dataset, gamma: float,
                             eps: float, cfg: AttackConfig, threads: int = 1) -> float:
    """
    fraction of samples on which the estimated adversarial margins of the two networks differ by at most gamma;
    one minus this fraction is the delta of a bound that only holds on part of the sample

    :return:
    """
    if dataset.m == 0:
        raise DataError("compressibility of an empty dataset is undefined")
    cfg = cfg.with_eps(eps)
    original = adversarial_margins(net, dataset.x, dataset.y, cfg, threads=threads)
    reduced = adversarial_margins(compressed, dataset.x, dataset.y, cfg, threads=threads)
    return float(np.mean(np.abs(original - reduced) <= gamma))
