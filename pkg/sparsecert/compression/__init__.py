from sparsecert.compression.matrix import CompressionPlan, CapacityCount, plan_compression, capacity_count, \
    compress_columns, round_columns_within, on_grid_plan, matrix_compress, in_family
