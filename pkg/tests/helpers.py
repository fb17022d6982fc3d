import numpy as np

from sparsecert.nn.network import LayeredNetwork


def random_network(rng, dims, final_activation="relu", sparsity=0.0) -> LayeredNetwork:
    layers = []
    for n_in, n_out in zip(dims[:-1], dims[1:]):
        W = rng.normal(size=(n_in, n_out))
        if sparsity > 0:
            W[rng.random(W.shape) < sparsity] = 0.0
        layers.append(W)
    return LayeredNetwork(layers, final_activation)


def rebalanced_network(rng, dims, final_activation="relu", sparsity=0.0) -> LayeredNetwork:
    layers = []
    for W in random_network(rng, dims, final_activation, sparsity).layers:
        norm = np.max(np.sum(np.abs(W), axis=0))
        layers.append(W / norm if norm > 0 else W)
    return LayeredNetwork(layers, final_activation)
