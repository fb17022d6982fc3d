"""
Command line entry point: ``sparsecert train|bound|compress|attack``.

Every command resolves its settings through a ConfigManager (flags, then SPARSE_CERT_* environment variables, then
the --config JSON file, then defaults) and echoes the resolved settings into the report it writes.
"""
import argparse
import json
import logging
import os
import sys
from typing import List

import numpy as np
import pandas as pd

from sparsecert import __version__
from sparsecert.adversarial.attacks import AttackConfig
from sparsecert.adversarial.risk import adversarial_margins, adversarial_risk, compressibility_fraction, \
    worker_count
from sparsecert.compression.matrix import CompressionPlan
from sparsecert.data.dataset import Dataset
from sparsecert.data.preprocessing import balanced_subset, load_dataset
from sparsecert.data.synthetic import synthetic_dataset
from sparsecert.linalg.norms import INF, mixed_norm
from sparsecert.linalg.sparsity import sparsity_profile
from sparsecert.misc.config_manager import ConfigManager
from sparsecert.misc.exceptions import ConfigError, DataError, DomainError, PreconditionError
from sparsecert.nn.bounds import bound_network
from sparsecert.nn.compress import compress_layers
from sparsecert.nn.network import LayeredNetwork, init_network, margins, predict, rebalance, scores
from sparsecert.nn.schedule import check_margin_budget
from sparsecert.nn.serialization import load_network, save_network
from sparsecert.reports import ATTACK_COLUMNS, ATTACK_FORMAT, METRICS_FORMAT, write_csv_report
from sparsecert.training.trainer import TRAINING_DEFAULTS, TrainingConfig, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PRECONDITION = 4

AUDIT_FORMAT = "sparsecert-compress-audit"
AUDIT_FORMAT_VERSION = 1

COMMON_DEFAULTS = {
    "seed": 0,
    "steps": 10,
    "step_size": "",
    "random_init": True,
    "threads": 1,
    "data_images": "",
    "data_labels": "",
    "class_count": "",
    "synthetic": "",
    "synthetic_m": 1000,
    "subset_size": 0,
}

COMMAND_DEFAULTS = {
    "train": dict(TRAINING_DEFAULTS, dims="1024,500,150,10", train_size=10000, out="metrics.csv",
                  model="model.esnn"),
    "bound": {"gamma": 0.1, "eps": 0.01, "units": "original", "with_delta": False, "out": ""},
    "compress": {"gamma": 0.1, "eps": 0.01, "probes": 1000, "plan": "", "out": "compressed.esnn"},
    "attack": {"eps": 0.2, "eps_sweep": "", "final_activation": "identity", "out": "attack.csv"},
}

# flag destinations that are copied into the config manager when given
OVERRIDES = ("model", "data_images", "data_labels", "gamma", "eps", "steps", "seed", "out", "synthetic", "plan",
             "probes", "eps_sweep", "units")
# flags whose config key differs per command
RENAMED_OVERRIDES = {"train": {"steps": "attack_steps"}}


def _float_list(value) -> List[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    try:
        return [float(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise ConfigError("expected a comma separated list of numbers, got {!r}".format(value))


def _int_list(value) -> List[int]:
    values = _float_list(value)
    if not all(v.is_integer() and v >= 1 for v in values):
        raise ConfigError("expected a comma separated list of positive integers, got {!r}".format(value))
    return [int(v) for v in values]


def build_config_manager(command: str, args: argparse.Namespace) -> ConfigManager:
    defaults = dict(COMMON_DEFAULTS, **COMMAND_DEFAULTS[command])
    config_manager = ConfigManager(default_variables=defaults, env_file=args.env_file, config_file=args.config)
    for key in OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            config_manager.override_value(RENAMED_OVERRIDES.get(command, {}).get(key, key), value)
    return config_manager


def _require(config_manager: ConfigManager, key: str) -> str:
    value = config_manager.get_value(key)
    if value in (None, ""):
        raise ConfigError("{} is required, pass --{} or set it in the config".format(key, key.replace("_", "-")))
    return str(value)


def load_data(config_manager: ConfigManager, input_dim: int, class_count: int) -> Dataset:
    """
    IDX files when --data-images and --data-labels are given, otherwise the --synthetic generator shaped to the
    network. With subset_size > 0 a class balanced subset is drawn.

    :param config_manager:
    :param input_dim: dimension of the network input
    :param class_count: number of network outputs
    :return:
    """
    seed = config_manager.get_int("seed")
    images, labels = config_manager.get_value("data_images"), config_manager.get_value("data_labels")
    kind = config_manager.get_value("synthetic")
    if images and labels:
        if config_manager.get_value("class_count") not in (None, ""):
            class_count = config_manager.get_int("class_count")
        dataset = load_dataset(images, labels, class_count)
    elif kind:
        extra = {"classes": class_count} if kind == "clusters" else {}
        dataset = synthetic_dataset(kind, input_dim, config_manager.get_int("synthetic_m"), seed, **extra)
    else:
        raise ConfigError("no data source, pass --data-images and --data-labels or --synthetic")
    if dataset.input_dim != input_dim:
        raise DataError("data has dimension {} but the network expects {}".format(dataset.input_dim, input_dim))
    if dataset.class_count > class_count:
        raise DataError("data has {} classes but the network has {} outputs".format(dataset.class_count,
                                                                                   class_count))
    size = config_manager.get_int("subset_size")
    if 0 < size < dataset.m:
        dataset = balanced_subset(dataset, size, seed)
    logging.info("loaded {} samples of dimension {}".format(dataset.m, dataset.input_dim))
    return dataset


def cmd_train(config_manager: ConfigManager) -> int:
    cfg = TrainingConfig.from_config_manager(config_manager)
    dims = _int_list(config_manager.get_value("dims"))
    if len(dims) < 2:
        raise ConfigError("dims needs an input and an output size, got {}".format(dims))
    dataset = load_data(config_manager, dims[0], dims[-1])
    size = config_manager.get_int("train_size")
    if 0 < size < dataset.m:
        dataset = balanced_subset(dataset, size, cfg.seed)
    net = init_network(dims, seed=cfg.seed)
    logging.info("training a {} network on {} samples for {} epochs".format(
        "-".join(str(d) for d in dims), dataset.m, cfg.epochs))
    result = train(net, dataset, cfg, threads=worker_count(config_manager))
    out, model = _require(config_manager, "out"), _require(config_manager, "model")
    last = result.history.iloc[-1]
    write_csv_report(result.history, out, METRICS_FORMAT, config_manager.resolved(),
                     summary={"final_bound": last["bound_exact"], "final_adv_risk": last["adv_risk"]})
    save_network(result.network, model)
    logging.info("wrote metrics to {} and the model to {}".format(out, model))
    return EXIT_OK


def _attack_config(config_manager: ConfigManager, eps: float) -> AttackConfig:
    return AttackConfig.from_config_manager(config_manager).with_eps(eps)


def cmd_bound(config_manager: ConfigManager) -> int:
    gamma, eps = config_manager.get_float("gamma"), config_manager.get_float("eps")
    units = config_manager.get_value("units")
    net = load_network(_require(config_manager, "model"), final_activation="relu")
    balanced, scale = rebalance(net)
    gamma_r = gamma / scale if units == "original" else gamma
    check_margin_budget(gamma_r, eps)
    dataset = load_data(config_manager, net.input_dim, net.output_dim)
    attack = _attack_config(config_manager, eps)
    threads = worker_count(config_manager)
    loss = adversarial_risk(balanced, dataset, gamma_r, eps, attack, threads).value
    delta = 0.0
    if config_manager.get_bool("with_delta"):
        compressed = compress_layers(balanced, gamma_r, eps).network
        delta = 1.0 - compressibility_fraction(balanced, compressed, dataset, gamma_r, eps, attack, threads)
    report = bound_network(net, sparsity_profile(net.layers), gamma, eps, dataset.m, loss, units=units, delta=delta)
    report.config.update(config_manager.resolved())
    report.config["attack"] = attack.to_dict()
    report.config["preprocessing"] = dataset.metadata.get("preprocessing", dataset.metadata.get("kind"))
    out = config_manager.get_value("out")
    text = report.to_json(out if out else None)
    if not out:
        print(text)
    logging.info("bound {:.6g} = loss {:.6g} + capacity {:.6g}".format(report.bound, report.empirical_loss,
                                                                      report.capacity_term))
    return EXIT_OK


def _read_plans(path: str) -> List[CompressionPlan]:
    try:
        with open(path) as f:
            audit = json.load(f)
        return [CompressionPlan.from_dict(row["plan"]) for row in audit["layers"]]
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise DataError("cannot read compression plans from {}: {}".format(path, e))


def audit_path(out: str) -> str:
    return os.path.splitext(out)[0] + ".audit.json"


def probe_deviation(net: LayeredNetwork, compressed: LayeredNetwork, count: int, eps: float, seed: int) -> float:
    """
    max ||f(x + eta) - f_hat(x + eta)||_inf over random x in the unit ball and ||eta||_inf <= eps

    :return:
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(count, net.input_dim))
    eta = rng.uniform(-eps, eps, size=x.shape)
    deviation = np.abs(scores(net, x + eta) - scores(compressed, x + eta))
    return float(np.max(deviation)) if deviation.size else 0.0


def cmd_compress(config_manager: ConfigManager) -> int:
    gamma, eps = config_manager.get_float("gamma"), config_manager.get_float("eps")
    net = load_network(_require(config_manager, "model"), final_activation="relu")
    plan_path = config_manager.get_value("plan")
    scale = 1.0
    if plan_path:
        result = compress_layers(net, gamma, eps, plans=_read_plans(plan_path))
    else:
        if max(net.layer_norms()) > 1:
            net, scale = rebalance(net)
            logging.info("rebalanced the network, scale {:.6g}".format(scale))
        result = compress_layers(net, gamma, eps)
    out = _require(config_manager, "out")
    save_network(result.network, out)
    stored = load_network(out, final_activation="relu")
    layers = result.audit()
    for row, W, W_stored in zip(layers, net.layers, stored.layers):
        row["stored_error"] = mixed_norm(W - W_stored, 1, INF)
    probes = config_manager.get_int("probes")
    deviation = probe_deviation(net, result.network, probes, eps, config_manager.get_int("seed"))
    audit = {
        "format": "{}/{}".format(AUDIT_FORMAT, AUDIT_FORMAT_VERSION),
        "seed": config_manager.get_int("seed"),
        "config": config_manager.resolved(),
        "scale": scale,
        "schedule": result.schedule.to_dict(),
        "layers": layers,
        "log_card": result.total.log_card,
        "probe": {"count": probes, "max_deviation": deviation, "limit": gamma / 2,
                  "within_limit": bool(deviation <= gamma / 2)},
    }
    with open(audit_path(out), "w") as f:
        json.dump(audit, f, indent=2, sort_keys=True)
        f.write("\n")
    if not all(row["within_budget"] for row in layers):
        logging.warning("a layer exceeded its compression budget, see {}".format(audit_path(out)))
    logging.info("wrote {} and its audit, probe deviation {:.4g} (limit {:.4g})".format(out, deviation, gamma / 2))
    return EXIT_OK


def attack_frame(net: LayeredNetwork, dataset: Dataset, attack: AttackConfig, threads: int) -> pd.DataFrame:
    clean = margins(net, dataset.x, dataset.y)
    adversarial = adversarial_margins(net, dataset.x, dataset.y, attack, threads=threads)
    return pd.DataFrame({"index": np.arange(dataset.m), "label": dataset.y, "prediction": predict(net, dataset.x),
                         "clean_margin": clean, "adv_margin": adversarial,
                         "adv_error": (adversarial <= 0).astype(int)}, columns=ATTACK_COLUMNS)


def cmd_attack(config_manager: ConfigManager) -> int:
    eps = config_manager.get_float("eps")
    net = load_network(_require(config_manager, "model"),
                       final_activation=str(config_manager.get_value("final_activation")))
    dataset = load_data(config_manager, net.input_dim, net.output_dim)
    if dataset.m == 0:
        raise DataError("no samples to attack")
    threads = worker_count(config_manager)
    attack = _attack_config(config_manager, eps)
    frame = attack_frame(net, dataset, attack, threads)
    summary = {"m": dataset.m, "eps": eps, "clean_error": float(np.mean(frame["clean_margin"] <= 0)),
               "adv_risk": float(frame["adv_error"].mean()), "attack": attack.to_dict()}
    sweep = _float_list(config_manager.get_value("eps_sweep"))
    if sweep:
        summary["sweep"] = [{"eps": value, "adv_risk": adversarial_risk(net, dataset, 0.0, value, attack,
                                                                        threads).value} for value in sweep]
    out = _require(config_manager, "out")
    write_csv_report(frame, out, ATTACK_FORMAT, config_manager.resolved(), summary=summary)
    logging.info("adversarial risk {:.4f} at eps={} (clean error {:.4f})".format(summary["adv_risk"], eps,
                                                                                summary["clean_error"]))
    return EXIT_OK


COMMANDS = {"train": cmd_train, "bound": cmd_bound, "compress": cmd_compress, "attack": cmd_attack}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsecert", description="compression based adversarial "
                                                                    "generalization bounds")
    parser.add_argument("--version", action="version", version="%(prog)s {}".format(__version__))
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with a flat object of settings")
    common.add_argument("--env-file", help=".env file loaded into the environment")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--model", help="ESNN model file")
    common.add_argument("--data-images", dest="data_images", help="IDX image file")
    common.add_argument("--data-labels", dest="data_labels", help="IDX label file")
    common.add_argument("--synthetic", choices=["separable", "clusters"], help="use a generated dataset")
    common.add_argument("--seed", type=int)
    common.add_argument("--steps", type=int, help="PGD iterations")
    common.add_argument("--out", help="output file")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("train", parents=[common], help="train a network and record the bound per epoch")
    bound = subparsers.add_parser("bound", parents=[common], help="evaluate the network bound")
    bound.add_argument("--gamma", type=float)
    bound.add_argument("--eps", type=float)
    bound.add_argument("--units", choices=["original", "rebalanced"])
    compress = subparsers.add_parser("compress", parents=[common], help="compress a network and audit it")
    compress.add_argument("--gamma", type=float)
    compress.add_argument("--eps", type=float)
    compress.add_argument("--probes", type=int)
    compress.add_argument("--plan", help="audit JSON whose per-layer plans are reused")
    attack = subparsers.add_parser("attack", parents=[common], help="PGD attack every sample")
    attack.add_argument("--eps", type=float)
    attack.add_argument("--eps-sweep", dest="eps_sweep", help="comma separated radii, e.g. 0,0.05,0.1,0.2")
    return parser


def main(argv: List[str] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s %(levelname)s %(message)s")
    try:
        config_manager = build_config_manager(args.command, args)
        return COMMANDS[args.command](config_manager)
    except (ConfigError, KeyError) as e:
        logging.error("configuration error: {}".format(e))
        return EXIT_CONFIG
    except DataError as e:
        logging.error("data error: {}".format(e))
        return EXIT_DATA
    except OSError as e:
        logging.error("data error: cannot access {}: {}".format(e.filename, e.strerror))
        return EXIT_DATA
    except (PreconditionError, DomainError) as e:
        logging.error("precondition violated: {}".format(e))
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
