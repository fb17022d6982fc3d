from sparsecert.nn.network import LayeredNetwork, LayerTrace, forward, scores, margin, margins, margins_from_scores, \
    predict, rebalance, backward, softmax, cross_entropy_loss, backprop_gradients, input_gradient, init_network
from sparsecert.nn.schedule import ErrorSchedule, error_schedule, check_margin_budget
from sparsecert.nn.compress import NetworkCompression, compress_layers, compress_network, lipschitz_layer_check, \
    require_rebalanced
from sparsecert.nn.bounds import bound_network, surrogate_capacity
from sparsecert.nn.serialization import save_network, load_network, network_to_bytes, network_from_bytes
from sparsecert.nn.optimizer import OPTIMIZERS, MomentumSGD
