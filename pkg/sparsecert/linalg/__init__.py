from sparsecert.linalg.norms import INF, as_vector, as_matrix, lp_norm, column_norms, mixed_norm, linf_operator_norm
from sparsecert.linalg.sparsity import SparsityProfile, effective_sparsity, column_effective_sparsity, \
    effective_joint_sparsity, sparsity_profile, top_indices, truncate_top_s, truncate_top_columns, round_to_grid
