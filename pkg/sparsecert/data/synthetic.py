"""
Deterministic desk-scale datasets inside the unit l_inf ball.
"""
import numpy as np

from sparsecert.data.dataset import Dataset
from sparsecert.misc.exceptions import DomainError

KINDS = ("separable", "clusters")


def planted_separable(n: int, m: int, seed: int = 0, margin: float = 0.05, support: int = None) -> Dataset:
    """
    binary data labeled by a planted classifier w with ||w||_1 = 1: label 1 if <w, x> > 0 else 0, keeping only
    samples with |<w, x>| >= margin. The planted w is stored in metadata["planted_w"].

    :param n: input dimension
    :param m: number of samples
    :param seed:
    :param margin: planted margin gamma*
    :param support: number of nonzero entries of w, defaults to min(n, 8)
    :return:
    """
    rng = np.random.default_rng(seed)
    support = min(n, 8) if support is None else support
    if not 1 <= support <= n:
        raise DomainError("support must lie in [1, {}], got {}".format(n, support))
    w = np.zeros(n)
    chosen = rng.choice(n, size=support, replace=False)
    w[chosen] = rng.uniform(0.5, 1.0, size=support) * rng.choice([-1.0, 1.0], size=support)
    w /= np.sum(np.abs(w))
    kept = []
    count = 0
    # rejection sampling in blocks; the acceptance rate only depends on the support and the margin
    for _ in range(10000):
        block = rng.uniform(-1.0, 1.0, size=(max(2 * m, 64), n))
        block = block[np.abs(block @ w) >= margin]
        kept.append(block)
        count += block.shape[0]
        if count >= m:
            break
    else:
        raise DomainError("margin {} is too large for a planted classifier with {} nonzeros".format(margin, support))
    x = np.concatenate(kept)[:m]
    y = (x @ w > 0).astype(np.int64)
    return Dataset(x, y, 2, {"kind": "separable", "planted_w": w, "margin": margin, "seed": seed})


def gaussian_clusters(n: int, m: int, seed: int = 0, classes: int = 10, spread: float = 0.15) -> Dataset:
    """
    multi-class data: one gaussian cluster per class with centers in [-0.5, 0.5]^n, clipped to the unit ball

    :param n:
    :param m:
    :param seed:
    :param classes:
    :param spread: standard deviation of every coordinate
    :return:
    """
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-0.5, 0.5, size=(classes, n))
    y = rng.integers(0, classes, size=m)
    x = np.clip(centers[y] + rng.normal(0.0, spread, size=(m, n)), -1.0, 1.0)
    return Dataset(x, y, classes, {"kind": "clusters", "seed": seed})


def synthetic_dataset(kind: str, n: int, m: int, seed: int = 0, **kwargs) -> Dataset:
    if n < 1 or m < 1:
        raise DomainError("dimension and sample count must be positive, got n={} m={}".format(n, m))
    if kind == "separable":
        return planted_separable(n, m, seed, **kwargs)
    if kind == "clusters":
        return gaussian_clusters(n, m, seed, **kwargs)
    raise DomainError("unknown synthetic dataset kind {}, expected one of {}".format(kind, KINDS))
