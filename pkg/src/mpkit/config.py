"""Run configuration: an INI document with fixed sections and strict keys.

Sections: [experiment] (master seed plus experiment-level knobs), [dataset],
[network], [train], [predictive].  Unknown sections or keys are rejected.
Every command writes the fully resolved configuration (defaults applied)
next to its outputs so a run can be reproduced from its output directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import data as dat
from .network import NetworkSpec, TrainConfig, cnn_spec, mlp_spec
from .posterior import ConcentrationRatio, PredictiveConfig
from .samplers import (AugmentationSet, GaussianJitter, HorizontalFlip, Identity,
                       MixupMeasure, PadCrop, PerturbedEmpirical, UniformBox)


class ConfigError(ValueError):
    """Invalid or missing run-configuration value."""


_KNOWN_KEYS = {
    "experiment": {"seed", "mode", "resolution", "padding", "checkpoint_every"},
    "dataset": {"kind", "seed", "images", "labels", "test_images", "test_labels",
                "path", "test_path", "label_column", "standardize", "holdout"},
    "network": {"kind", "input", "classes", "hidden", "conv_channels", "fc_sizes",
                "kernel", "bias", "dropout"},
    "train": {"learning_rate", "momentum", "weight_decay", "epochs", "minibatch",
              "stop_rule", "extra_epochs", "dtype"},
    "predictive": {"method", "members", "r", "alpha", "t_mb", "aug", "stabilized",
                   "bound_m", "donor", "c", "t", "base", "mc_passes"},
}

_METHODS = ("de", "bb", "dp-mp", "mixup-mp", "mixup", "mc-dropout")


@dataclass
class RunConfig:
    """Parsed and validated configuration document."""

    raw: dict[str, dict[str, str]]
    seed: int

    def get(self, section: str, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.raw.get(section, {}).get(key, default)

    def getfloat(self, section, key, default=None):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a number, got {v!r}") from None

    def getint(self, section, key, default=None):
        v = self.get(section, key)
        if v is None:
            return default
        try:
            return int(v)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected an integer, got {v!r}") from None

    def getbool(self, section, key, default=False):
        v = self.get(section, key)
        if v is None:
            return default
        if v.lower() in ("1", "true", "yes", "on"):
            return True
        if v.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {v!r}")


def load_config(path, seed_override: Optional[int] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as f:
            parser.read_file(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except configparser.Error as e:
        raise ConfigError(f"malformed config {path}: {e}") from None
    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        entries = {}
        for key, value in parser.items(section):
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            entries[key] = value.strip()
        raw[section] = entries
    if seed_override is not None:
        seed = int(seed_override)
    else:
        seed_str = raw.get("experiment", {}).get("seed")
        if seed_str is None:
            raise ConfigError("master seed is mandatory: set [experiment] seed or pass --seed")
        try:
            seed = int(seed_str)
        except ValueError:
            raise ConfigError(f"[experiment] seed: expected an integer, got {seed_str!r}") from None
    if seed < 0:
        raise ConfigError("master seed must be nonnegative")
    raw.setdefault("experiment", {})["seed"] = str(seed)
    return RunConfig(raw, seed)


# ---------------------------------------------------------------------------
# dataset construction


def build_dataset(cfg: RunConfig) -> dat.Dataset:
    kind = cfg.get("dataset", "kind")
    if kind is None:
        raise ConfigError("[dataset] kind is required (synthetic | idx | csv)")
    if kind == "synthetic":
        seed = cfg.getint("dataset", "seed", cfg.seed)
        return dat.gen_synthetic_clusters(seed)
    if kind == "idx":
        images = cfg.get("dataset", "images")
        labels = cfg.get("dataset", "labels")
        if images is None or labels is None:
            raise ConfigError("[dataset] idx needs both images and labels paths")
        return dat.load_idx(images, labels, standardize=cfg.getbool("dataset", "standardize"))
    if kind == "csv":
        path = cfg.get("dataset", "path")
        if path is None:
            raise ConfigError("[dataset] csv needs a path")
        return dat.load_csv(path, cfg.get("dataset", "label_column", "label"))
    raise ConfigError(f"[dataset] unknown kind {kind!r}")


def build_test_dataset(cfg: RunConfig) -> Optional[dat.Dataset]:
    kind = cfg.get("dataset", "kind")
    if kind == "idx" and cfg.get("dataset", "test_images") is not None:
        return dat.load_idx(cfg.get("dataset", "test_images"), cfg.get("dataset", "test_labels"),
                            standardize=cfg.getbool("dataset", "standardize"))
    if kind == "csv" and cfg.get("dataset", "test_path") is not None:
        return dat.load_csv(cfg.get("dataset", "test_path"),
                            cfg.get("dataset", "label_column", "label"))
    return None


def split_holdout(dataset: dat.Dataset, fraction: float, seed: int):
    """Deterministic shuffle-then-split into (train, test)."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"holdout fraction must lie in (0,1), got {fraction}")
    rng = np.random.default_rng([seed, 0, 9])
    perm = rng.permutation(len(dataset))
    n_test = max(1, int(round(fraction * len(dataset))))
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    return (dat.Dataset(dataset.features[train_idx], dataset.labels[train_idx], dict(dataset.meta)),
            dat.Dataset(dataset.features[test_idx], dataset.labels[test_idx], dict(dataset.meta)))


# ---------------------------------------------------------------------------
# network construction


def _parse_int_list(text: str, where: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise ConfigError(f"{where}: expected comma-separated integers, got {text!r}") from None


def build_network(cfg: RunConfig, dataset: dat.Dataset) -> NetworkSpec:
    kind = cfg.get("network", "kind", "mlp")
    classes = cfg.getint("network", "classes", dataset.num_classes)
    input_text = cfg.get("network", "input")
    if input_text is not None:
        dims = [int(v) for v in input_text.lower().replace(" ", "").split("x")]
        input_shape = tuple(dims) if len(dims) > 1 else dims[0]
    else:
        shape = dataset.feature_shape
        input_shape = shape if len(shape) > 1 else shape[0]
    bias = cfg.getbool("network", "bias", True)
    dropout = cfg.getfloat("network", "dropout", 0.0)
    if kind == "mlp":
        if isinstance(input_shape, tuple):
            raise ConfigError("[network] mlp expects a flat input dimension")
        hidden = _parse_int_list(cfg.get("network", "hidden", "16,32,16"), "[network] hidden")
        return mlp_spec(input_shape, hidden, classes, bias=bias, dropout=dropout)
    if kind == "cnn":
        if not isinstance(input_shape, tuple) or len(input_shape) != 3:
            raise ConfigError("[network] cnn expects input = CxHxW")
        conv = _parse_int_list(cfg.get("network", "conv_channels", "6,16"), "[network] conv_channels")
        fc = _parse_int_list(cfg.get("network", "fc_sizes", "120,84"), "[network] fc_sizes")
        kernel = cfg.getint("network", "kernel", 5)
        return cnn_spec(input_shape, classes, conv, fc, kernel=kernel, bias=bias, dropout=dropout)
    raise ConfigError(f"[network] unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# training configuration


def build_train_config(cfg: RunConfig, default_weight_decay: float = 5e-4) -> TrainConfig:
    """Weight decay defaults to 5e-4; margin experiments pass 0 (the weak-
    regularization limit) unless the config sets it explicitly."""
    lr = cfg.getfloat("train", "learning_rate")
    if lr is None:
        raise ConfigError("[train] learning_rate is required")
    try:
        return TrainConfig(
            learning_rate=lr,
            momentum=cfg.getfloat("train", "momentum", 0.0),
            weight_decay=cfg.getfloat("train", "weight_decay", default_weight_decay),
            epochs=cfg.getint("train", "epochs", 100),
            minibatch_size=cfg.getint("train", "minibatch", 32),
            seed=cfg.seed,
            stop_rule=cfg.get("train", "stop_rule", "fixed"),
            extra_epochs=cfg.getint("train", "extra_epochs", 0),
        )
    except ValueError as e:
        raise ConfigError(f"[train] {e}") from None


def train_dtype(cfg: RunConfig):
    name = cfg.get("train", "dtype", "float64")
    if name not in ("float64", "float32"):
        raise ConfigError(f"[train] dtype must be float64 or float32, got {name!r}")
    return np.float64 if name == "float64" else np.float32


# ---------------------------------------------------------------------------
# predictive-distribution configuration


def parse_aug(text: Optional[str]) -> AugmentationSet:
    """Grammar: whitespace-separated descriptors, e.g. 'padcrop:4 hflip:0.5 jitter:0.01'."""
    if text is None or text.strip() in ("", "none"):
        return AugmentationSet()
    transforms = []
    for token in text.split():
        name, _, arg = token.partition(":")
        if name == "padcrop":
            transforms.append(PadCrop(int(arg)))
        elif name == "hflip":
            transforms.append(HorizontalFlip(float(arg) if arg else 0.5))
        elif name == "jitter":
            transforms.append(GaussianJitter(float(arg)))
        elif name == "identity":
            transforms.append(Identity())
        else:
            raise ConfigError(f"unknown augmentation {token!r}")
    return AugmentationSet(tuple(transforms))


def parse_ratio(text: Optional[str]) -> ConcentrationRatio:
    if text is None:
        return ConcentrationRatio(0.0)
    if text.lower() in ("inf", "infinity"):
        return ConcentrationRatio.inf()
    try:
        return ConcentrationRatio(float(text))
    except ValueError as e:
        raise ConfigError(f"[predictive] r: {e}") from None


def parse_base_measure(cfg: RunConfig, dataset: dat.Dataset):
    text = cfg.get("predictive", "base", "perturbed:4.0")
    name, _, arg = text.partition(":")
    if name == "perturbed":
        return PerturbedEmpirical(float(arg) if arg else 4.0)
    if name == "uniform":
        if arg:
            lo, hi = (float(v) for v in arg.split(","))
        else:
            lo, hi = -15.0, 15.0
        d = int(np.prod(dataset.feature_shape))
        return UniformBox((lo,) * d, (hi,) * d, dataset.num_classes)
    if name == "mixup":
        return MixupMeasure(cfg.getfloat("predictive", "alpha", 1.0),
                            parse_aug(cfg.get("predictive", "aug")))
    raise ConfigError(f"[predictive] unknown base measure {text!r}")


def build_predictive_config(cfg: RunConfig) -> PredictiveConfig:
    try:
        return PredictiveConfig(
            r=parse_ratio(cfg.get("predictive", "r")),
            alpha=cfg.getfloat("predictive", "alpha", 1.0),
            t_mb=cfg.getint("predictive", "t_mb", None),
            aug=parse_aug(cfg.get("predictive", "aug")),
        )
    except ValueError as e:
        raise ConfigError(f"[predictive] {e}") from None


# ---------------------------------------------------------------------------
# resolved-config snapshot


def resolved_text(cfg: RunConfig) -> str:
    """Render the configuration with all supplied keys plus the resolved seed."""
    out = configparser.ConfigParser(interpolation=None)
    for section in ("experiment", "dataset", "network", "train", "predictive"):
        entries = cfg.raw.get(section)
        if not entries:
            continue
        out.add_section(section)
        for key in sorted(entries):
            out.set(section, key, entries[key])
    from io import StringIO
    buf = StringIO()
    out.write(buf)
    return buf.getvalue()
