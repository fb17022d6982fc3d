"""
Report types and the CSV / JSON contract of the command line tools.

CSV reports start with ``#`` comment lines carrying the format stamp and the resolved configuration, followed by a
frozen header row. They can be read back with ``read_csv_report``.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from sparsecert.misc.exceptions import DataError

CSV_FORMAT_VERSION = 1
METRICS_FORMAT = "sparsecert-metrics"
ATTACK_FORMAT = "sparsecert-attack"
METRICS_BASE_COLUMNS = ["epoch", "phase", "eps_attack", "train_loss", "clean_risk", "adv_risk", "bound_exact",
                        "bound_surrogate"]
ATTACK_COLUMNS = ["index", "label", "prediction", "clean_margin", "adv_margin", "adv_error"]


def metrics_columns(depth: int) -> List[str]:
    columns = list(METRICS_BASE_COLUMNS)
    for j in range(1, depth + 1):
        columns.extend(["eff_s1_{}".format(j), "eff_s2_{}".format(j)])
    return columns


def confidence_from_log_cardinality(log_card: float) -> float:
    """
    1 - 1/|A| for a set of cardinality exp(log_card)

    :param log_card:
    :return:
    """
    return -math.expm1(-log_card)


@dataclass
class BoundReport:
    """
    every term of one bound evaluation. ``bound`` is always ``empirical_loss + capacity_term``; the capacity term is
    the exact sqrt(log|A| / m) form (plus the failure probability where one applies), ``surrogate`` the scaling form
    with constants dropped.
    """
    bounded_quantity: str
    empirical_loss: float
    capacity_term: float
    log_cardinality: float
    confidence: float
    surrogate: Optional[float] = None
    invalid_regime: bool = False
    terms: dict = field(default_factory=dict)
    layers: List[dict] = field(default_factory=list)
    scale: float = 1.0
    notes: List[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.invalid_regime:
            assert self.capacity_term >= 0, "capacity term must be nonnegative"

    @property
    def bound(self) -> float:
        return self.empirical_loss + self.capacity_term

    def to_dict(self) -> dict:
        content = asdict(self)
        content["bound"] = self.bound
        return _plain(content)

    def to_json(self, path: str = None, indent: int = 2) -> str:
        text = json.dumps(self.to_dict(), indent=indent, sort_keys=True)
        if path is not None:
            with open(path, "w") as f:
                f.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, content: dict) -> "BoundReport":
        content = dict(content)
        content.pop("bound", None)
        return cls(**content)


def _plain(value):
    # numpy scalars and infinities are not valid JSON
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_csv_report(frame: pd.DataFrame, path: str, kind: str, config: dict, summary: dict = None) -> None:
    """
    writes a frame with the comment header of the report contract

    :param frame: rows of the report
    :param path: output file
    :param kind: METRICS_FORMAT or ATTACK_FORMAT
    :param config: the resolved configuration, must contain the seed
    :param summary: optional aggregate values
    :return:
    """
    assert "seed" in config, "reports must embed the master seed"
    with open(path, "w", newline="") as f:
        f.write("# format: {}/{}\n".format(kind, CSV_FORMAT_VERSION))
        f.write("# seed: {}\n".format(config["seed"]))
        f.write("# config: {}\n".format(json.dumps(_plain(config), sort_keys=True)))
        if summary is not None:
            f.write("# summary: {}\n".format(json.dumps(_plain(summary), sort_keys=True)))
        frame.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")


def read_csv_report(path: str) -> Tuple[dict, pd.DataFrame]:
    """
    parses a report written by write_csv_report

    :param path:
    :return: the header fields (format, version, seed, config, summary) and the data frame
    """
    meta = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
    if "format" not in meta:
        raise DataError("{} has no format stamp".format(path))
    kind, _, version = meta["format"].partition("/")
    meta["format"] = kind
    meta["version"] = int(version)
    meta["seed"] = int(meta["seed"])
    meta["config"] = json.loads(meta["config"])
    if "summary" in meta:
        meta["summary"] = json.loads(meta["summary"])
    frame = pd.read_csv(path, comment="#")
    return meta, frame
