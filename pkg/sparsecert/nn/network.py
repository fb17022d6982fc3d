"""
Feed-forward ReLU networks without biases, x^i = phi(W^iT x^(i-1)).

Layer i is stored as an (n_(i-1), n_i) matrix, so every column holds the incoming weights of one unit and
||W^i||_{1,inf} bounds the layer as an l_inf -> l_inf map. Inputs are single vectors of shape (n,) or batches of
shape (m, n).
"""
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from sparsecert.linalg.norms import INF, as_matrix, mixed_norm
from sparsecert.misc.exceptions import DomainError, PreconditionError

ACTIVATIONS = ("relu", "identity")


@dataclass
class LayeredNetwork:
    layers: List[np.ndarray]
    final_activation: str = "relu"

    def __post_init__(self):
        assert isinstance(self.layers, (list, tuple)), "layers must be a list of matrices"
        if len(self.layers) < 1:
            raise DomainError("a network needs at least one layer")
        if self.final_activation not in ACTIVATIONS:
            raise DomainError("unknown activation {}".format(self.final_activation))
        self.layers = [as_matrix(W) for W in self.layers]
        for i in range(1, len(self.layers)):
            if self.layers[i].shape[0] != self.layers[i - 1].shape[1]:
                raise DomainError("layer {} expects {} inputs but layer {} has {} outputs".format(
                    i + 1, self.layers[i].shape[0], i, self.layers[i - 1].shape[1]))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].shape[1]

    @property
    def dims(self) -> List[int]:
        return [self.input_dim] + [W.shape[1] for W in self.layers]

    def activation(self, i: int) -> str:
        return self.final_activation if i == self.depth - 1 else "relu"

    def copy(self) -> "LayeredNetwork":
        return LayeredNetwork([W.copy() for W in self.layers], self.final_activation)

    def with_final_activation(self, kind: str) -> "LayeredNetwork":
        return LayeredNetwork(list(self.layers), kind)

    def layer_norms(self) -> List[float]:
        return [mixed_norm(W, 1, INF) for W in self.layers]


@dataclass
class LayerTrace:
    """
    activations x^0 .. x^d and the pre-activations W^iT x^(i-1) of one forward pass
    """
    activations: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)


def _batch(net: LayeredNetwork, x) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise DomainError("network expects inputs of dimension {}, got shape {}".format(net.input_dim, x.shape))
    if not np.all(np.isfinite(x)):
        raise DomainError("inputs must be finite")
    return x, single


def forward(net: LayeredNetwork, x) -> Tuple[np.ndarray, LayerTrace]:
    """
    scores f(x) = x^d and the trace of the pass

    :param net:
    :param x: vector or batch
    :return: scores with the leading shape of x, and the trace (always batched)
    """
    batch, single = _batch(net, x)
    trace = LayerTrace(activations=[batch])
    current = batch
    for i, W in enumerate(net.layers):
        pre = current @ W
        current = np.maximum(pre, 0.0) if net.activation(i) == "relu" else pre
        trace.pre_activations.append(pre)
        trace.activations.append(current)
    return (current[0] if single else current), trace


def scores(net: LayeredNetwork, x) -> np.ndarray:
    return forward(net, x)[0]


def _check_labels(y, classes: int, count: int) -> np.ndarray:
    if classes < 2:
        raise DomainError("margins need at least two classes")
    labels = np.atleast_1d(np.asarray(y))
    if labels.shape != (count,) or not np.issubdtype(labels.dtype, np.integer):
        raise DomainError("expected {} integer labels, got {}".format(count, labels))
    if np.any(labels < 0) or np.any(labels >= classes):
        raise DomainError("labels must lie in [0, {}), got {}".format(classes, labels))
    return labels


def margins_from_scores(output: np.ndarray, y) -> Tuple[np.ndarray, np.ndarray]:
    """
    [f(x)]_y - max_(j != y) [f(x)]_j for every row, and the index of the best other class

    :param output: scores of shape (m, C)
    :param y: labels of shape (m,)
    :return:
    """
    output = np.atleast_2d(output)
    labels = _check_labels(y, output.shape[1], output.shape[0])
    rows = np.arange(output.shape[0])
    others = output.copy()
    others[rows, labels] = -np.inf
    runner = np.argmax(others, axis=1)
    return output[rows, labels] - others[rows, runner], runner


def margin(net: LayeredNetwork, x, y) -> float:
    """
    score gap of the true class over the best other class; positive iff x is classified correctly

    :param net:
    :param x: single input
    :param y: class index
    :return:
    """
    values, _ = margins_from_scores(scores(net, x), [y] if np.ndim(y) == 0 else y)
    return float(values[0])


def margins(net: LayeredNetwork, x, y) -> np.ndarray:
    output = np.atleast_2d(scores(net, x))
    return margins_from_scores(output, y)[0]


def predict(net: LayeredNetwork, x) -> np.ndarray:
    return np.argmax(np.atleast_2d(scores(net, x)), axis=1)


def rebalance(net: LayeredNetwork) -> Tuple[LayeredNetwork, float]:
    """
    divides every layer by its (1, inf) norm. By positive homogeneity of ReLU the rebalanced scores are the original
    ones divided by scale = prod_i ||W^i||_{1,inf}, so predictions are unchanged.

    :param net:
    :return: the rebalanced network and scale
    """
    norms = net.layer_norms()
    for i, norm in enumerate(norms):
        if norm == 0:
            raise PreconditionError("layer {} is zero, every margin of the network is 0".format(i + 1))
    scale = float(np.prod(norms))
    layers = [W / norm for W, norm in zip(net.layers, norms)]
    return LayeredNetwork(layers, net.final_activation), scale


def backward(net: LayeredNetwork, trace: LayerTrace, grad_output: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    reverse pass for a loss whose gradient with respect to the batched scores is grad_output. The ReLU subgradient
    at 0 is 0.

    :param net:
    :param trace: trace of the forward pass that produced the scores
    :param grad_output: array of shape (m, C)
    :return: gradients of every layer matrix and the gradient with respect to the input batch
    """
    delta = grad_output
    grads = [None] * net.depth
    for i in reversed(range(net.depth)):
        if net.activation(i) == "relu":
            delta = delta * (trace.pre_activations[i] > 0)
        grads[i] = trace.activations[i].T @ delta
        delta = delta @ net.layers[i].T
    return grads, delta


def softmax(output: np.ndarray) -> np.ndarray:
    shifted = output - np.max(output, axis=1, keepdims=True)
    exps = np.exp(shifted)
    return exps / np.sum(exps, axis=1, keepdims=True)


def cross_entropy_loss(net: LayeredNetwork, x, y) -> float:
    output = np.atleast_2d(scores(net, x))
    labels = _check_labels(y, output.shape[1], output.shape[0])
    shifted = output - np.max(output, axis=1, keepdims=True)
    log_probs = shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    return float(-np.mean(log_probs[np.arange(output.shape[0]), labels]))


def backprop_gradients(net: LayeredNetwork, batch, targets, return_loss: bool = False):
    """
    analytic gradients of the mean softmax cross entropy over the batch

    :param net:
    :param batch: inputs of shape (m, n)
    :param targets: class indices of shape (m,)
    :param return_loss: also return the loss of the batch
    :return: list of gradient matrices, one per layer (and the loss)
    """
    output, trace = forward(net, np.atleast_2d(batch))
    labels = _check_labels(targets, output.shape[1], output.shape[0])
    m = output.shape[0]
    probs = softmax(output)
    grad_output = probs.copy()
    grad_output[np.arange(m), labels] -= 1.0
    grads, _ = backward(net, trace, grad_output / m)
    if not return_loss:
        return grads
    loss = float(-np.mean(np.log(np.maximum(probs[np.arange(m), labels], np.finfo(np.float64).tiny))))
    return grads, loss


def input_gradient(net: LayeredNetwork, x, y) -> Tuple[np.ndarray, np.ndarray]:
    """
    gradient of the margin with respect to the input, taken with the runner-up class held fixed

    :param net:
    :param x: batch of shape (m, n)
    :param y: labels of shape (m,)
    :return: the margins and their input gradients
    """
    output, trace = forward(net, np.atleast_2d(x))
    values, runner = margins_from_scores(output, y)
    rows = np.arange(output.shape[0])
    grad_output = np.zeros_like(output)
    grad_output[rows, np.asarray(y)] = 1.0
    grad_output[rows, runner] -= 1.0
    _, grad_input = backward(net, trace, grad_output)
    return values, grad_input


def init_network(dims: Sequence[int], seed: int = 0, final_activation: str = "identity") -> LayeredNetwork:
    """
    He-normal initialization for the layer widths dims = (n_0, n_1, ..., n_d)

    :param dims:
    :param seed:
    :param final_activation:
    :return:
    """
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise DomainError("invalid layer widths {}".format(dims))
    rng = np.random.default_rng(seed)
    layers = [rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out)) for n_in, n_out in zip(dims[:-1], dims[1:])]
    return LayeredNetwork(layers, final_activation)
