"""Text specs for weight models and sets, and ``key=value`` experiment configs."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..fractal_sets import DigitRestrictionSet
from ..rng import derive_seeds
from ..weights import Empirical, LogNormal, TwoPoint, WeightModel


class ConfigError(ValueError):
    pass


def _pairs(text: str) -> dict:
    out = {}
    for tok in text.replace(";", " ").split():
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k.strip().lower()] = v.strip()
    return out


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x)


def parse_model(text: str, base_dir=None) -> WeightModel:
    """``family=lognormal sigma2=0.69``, ``family=twopoint sigma=0.5``,
    ``family=empirical file=w.csv`` or ``family=empirical values=.. probs=..``."""
    kv = _pairs(text)
    family = kv.pop("family", kv.pop("model", None))
    try:
        if family == "lognormal":
            if "sigma2" in kv:
                return LogNormal(float(kv["sigma2"]))
            return LogNormal(float(kv["sigma"]) ** 2)
        if family == "twopoint":
            return TwoPoint(float(kv["sigma"]))
        if family == "empirical":
            if "file" in kv:
                path = Path(kv["file"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                return Empirical.from_csv(path)
            return Empirical(_floats(kv["values"]), _floats(kv["probs"]))
    except KeyError as exc:
        raise ConfigError(f"model spec {text!r} is missing {exc.args[0]!r}") from None
    except (ValueError, OSError) as exc:
        raise ConfigError(f"bad model spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown weight family {family!r}")


def parse_set(text: str) -> DigitRestrictionSet:
    """``set=full``, ``set=point`` or ``set=digits b=2 allow=00,11``."""
    kv = _pairs(text if "=" in text else f"set={text}")
    kind = kv.get("set")
    if kind == "full":
        return DigitRestrictionSet.full()
    if kind == "point":
        return DigitRestrictionSet.point()
    if kind == "digits":
        try:
            return DigitRestrictionSet(int(kv["b"]), tuple(w for w in kv["allow"].split(",") if w))
        except KeyError as exc:
            raise ConfigError(f"set spec {text!r} is missing {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ConfigError(f"bad set spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown set kind {kind!r}")


def parse_seed(text) -> int:
    """Decimal or ``0x`` hex 64-bit seed."""
    try:
        v = int(str(text).strip(), 0)
    except ValueError:
        raise ConfigError(f"bad seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise ConfigError(f"seed {text!r} is not a 64-bit unsigned integer")
    return v


def read_seeds_file(path) -> tuple:
    seeds = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            seeds.extend(parse_seed(tok) for tok in line.replace(",", " ").split())
    return tuple(seeds)


def read_config_file(path) -> dict:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip().lower().replace("-", "_")] = v.strip()
    return out


@dataclass
class ExperimentConfig:
    model: str = "family=lognormal sigma2=0.6931471805599453"
    set: str = "set=full"
    seeds: tuple = ()
    master_seed: int = 0
    replicates: int = 50
    n_min: int = 8
    n_max: int = 16
    s: tuple = (0.5,)
    zeta0: float | None = None
    level: int = 10
    r: float = 0.5
    tolerance: float = 0.05
    tail_depth: int = 0
    aggregate: str = "mean_slope"
    max_level: int = 24
    out_dir: str | None = None
    threads: str = "1"
    base_dir: str | None = field(default=None, repr=False)

    # fields that must not influence results
    _RUNTIME = ("out_dir", "threads", "base_dir")

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.n_max > self.max_level:
            raise ConfigError("n_max exceeds max_level")
        if self.seeds and len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        names = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for key, value in mapping.items():
            key = key.lower().replace("-", "_")
            if key == "seed":
                key = "master_seed"
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None:
                continue
            kw[key] = _coerce(key, value)
        return cls(**kw)

    def weight_model(self) -> WeightModel:
        return parse_model(self.model, self.base_dir)

    def digit_set(self) -> DigitRestrictionSet:
        return parse_set(self.set)

    def seed_list(self) -> list[int]:
        if self.seeds:
            return list(self.seeds)
        return derive_seeds(self.master_seed, self.replicates)

    def thread_count(self) -> int:
        if str(self.threads) == "auto":
            return os.cpu_count() or 1
        return max(1, int(self.threads))

    def canonical(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name not in self._RUNTIME}
        d["seeds"] = list(d["seeds"])
        d["s"] = list(d["s"])
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _coerce(key, value):
    if not isinstance(value, str):
        return tuple(value) if key in ("seeds", "s") else value
    if key in ("replicates", "n_min", "n_max", "level", "tail_depth", "max_level"):
        return int(value)
    if key == "master_seed":
        return parse_seed(value)
    if key == "seeds":
        return tuple(parse_seed(t) for t in value.replace(",", " ").split())
    if key == "s":
        return _floats(value)
    if key in ("zeta0", "r", "tolerance"):
        v = float(value)
        if not math.isfinite(v):
            raise ConfigError(f"{key} must be finite")
        return v
    return value
