from sparsecert.linear.model import LinearClassifier, StochasticCompressionParams, label_to_binary, \
    linear_adversarial_margin, linear_margin_loss, inclusion_probabilities, expected_nonzeros, \
    compress_vector_stochastic, compress_vector_clip_round, compress_vector_effective_sparse, sparse_budget
from sparsecert.linear.bounds import bound_linear_stochastic, bound_linear_sparse
