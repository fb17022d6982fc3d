from sparsecert.adversarial.attacks import AttackConfig, pgd_attack, pgd_attack_batch, fgsm_attack, \
    adversarial_margin_estimate, random_start
from sparsecert.adversarial.risk import RiskEstimate, adversarial_margins, adversarial_risk, \
    compressibility_fraction, worker_count
from sparsecert.adversarial.training import STANDARD, ADVERSARIAL, epsilon_schedule, adversarial_training_step
