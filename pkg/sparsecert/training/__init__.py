from sparsecert.training.trainer import TRAINING_DEFAULTS, TrainingConfig, TrainingResult, evaluate_epoch, train
