"""Run configuration stored as an INI-style key-value file."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError
from .maskfn import FAMILIES, SIDEDNESS, MaskFnConfig, default_oov_score
from .pipeline import STRATEGIES, SequenceConfig
from .text import Normalization

CONFIG_ENV = "SELMASK_CONFIG"

# section -> field names, in file order
_LAYOUT = {
    "paths": ("corpus", "embeddings", "vocab", "seeds_lo", "seeds_hi", "model", "output_dir"),
    "scorer": ("reg_c", "epochs", "scorer_seed"),
    "maskfn": ("family", "sidedness", "alpha", "beta", "gamma", "target_rate", "tolerance",
               "sample_size", "oov_score", "calibrated"),
    "sequence": ("strategy", "max_seq_len", "max_predictions", "rng_seed", "workers"),
    "text": ("lowercase", "strip_accents"),
}


@dataclass
class RunConfig:
    corpus: str = ""
    embeddings: str = ""
    vocab: str = ""
    seeds_lo: str = ""
    seeds_hi: str = ""
    model: str = ""
    output_dir: str = "out"
    reg_c: float = 1.0
    epochs: int = 200
    scorer_seed: int = 0
    family: str = "linear"
    sidedness: str = "two_sided"
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    target_rate: float = 0.15
    tolerance: float = 0.002
    sample_size: int = 1_000_000
    oov_score: float | None = None  # None: the masking function's minimum
    calibrated: bool = False
    strategy: str = "selective"
    max_seq_len: int = 128
    max_predictions: int | None = None
    rng_seed: int = 12345
    workers: int = 1
    lowercase: bool = True
    strip_accents: bool = False
    source: str | None = field(default=None, compare=False)

    def validate(self, require=()) -> "RunConfig":
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown masking family {self.family!r}")
        if self.sidedness not in SIDEDNESS:
            raise ConfigError(f"unknown sidedness {self.sidedness!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not 0.0 < self.target_rate < 1.0:
            raise ConfigError(f"target_rate must lie in (0, 1), got {self.target_rate}")
        for name in require:
            value = getattr(self, name)
            if not value:
                raise ConfigError(f"missing required path '{name}'")
            if not Path(value).exists():
                raise ConfigError(f"{name}: path does not exist: {value}")
        return self

    @property
    def normalization(self) -> Normalization:
        return Normalization(lowercase=self.lowercase, strip_accents=self.strip_accents)

    @property
    def effective_oov_score(self) -> float:
        return default_oov_score(self.sidedness) if self.oov_score is None else self.oov_score

    def maskfn(self) -> MaskFnConfig:
        shape = {k: getattr(self, k) for k in ("alpha", "beta", "gamma") if getattr(self, k) is not None}
        return MaskFnConfig.default(self.family, self.sidedness, self.target_rate, **shape)

    def sequence(self) -> SequenceConfig:
        return SequenceConfig(self.max_seq_len, self.max_predictions, self.rng_seed, self.strategy,
                              self.target_rate)

    def set_values(self, **values) -> "RunConfig":
        types = {f.name: f.type for f in fields(self)}
        for key, value in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            setattr(self, key, _coerce(key, types[key], value) if isinstance(value, str) else value)
        return self

    def to_parser(self) -> configparser.ConfigParser:
        cp = configparser.ConfigParser(interpolation=None)
        for section, keys in _LAYOUT.items():
            cp[section] = {}
            for key in keys:
                value = getattr(self, key)
                if value is None:
                    text = "auto"
                elif isinstance(value, bool):
                    text = "true" if value else "false"
                elif isinstance(value, float):
                    text = repr(value)
                else:
                    text = str(value)
                cp[section][key] = text
        return cp

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            self.to_parser().write(fh)


def _coerce(key, type_name, text):
    text = text.strip()
    t = str(type_name)
    if "None" in t and text.lower() in ("", "auto", "none"):
        return None
    try:
        if t.startswith("bool"):
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if t.startswith("int"):
            return int(text)
        if t.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None
    return text


def load_config(path=None) -> RunConfig:
    """Read a config file; ``path=None`` falls back to $SELMASK_CONFIG, then to defaults.

    Relative paths in the [paths] section resolve against the config file's directory.
    """
    cfg = RunConfig()
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return cfg
    if not Path(path).exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    base = Path(path).resolve().parent
    values = {}
    for section in cp.sections():
        for key, value in cp[section].items():
            if section == "paths" and value and not os.path.isabs(value):
                value = str(base / value)
            values[key] = value
    cfg.set_values(**values)
    cfg.source = str(path)
    return cfg
