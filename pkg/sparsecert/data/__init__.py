from sparsecert.data.dataset import Dataset
from sparsecert.data.idx import IMAGE_MAGIC, LABEL_MAGIC, load_idx, read_idx_images, read_idx_labels, write_idx
from sparsecert.data.preprocessing import preprocess_mnist, preprocess_images, load_dataset, balanced_subset
from sparsecert.data.synthetic import synthetic_dataset, planted_separable, gaussian_clusters
