# src/config.py

"""
Run configuration file (JSON or YAML) and its command-line overrides.

Precedence, lowest first:
    built-in defaults < config/run_defaults.yaml < --config file < --section.key overrides

Unknown keys anywhere are rejected. The resolved document is what gets
embedded in checkpoints, so `RunConfigFile.parse_obj(ckpt.config)`
rebuilds the run exactly.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, Extra, Field, ValidationError

from config.settings import RUN_DEFAULTS_PATH
from src.domain.configs import NetworkConfig, TrainConfig
from src.utils.errors import ContractError, UsageError

SECTIONS = ("network", "train", "data")


class _Section(BaseModel):
    class Config:
        extra = Extra.forbid


class NetworkSection(_Section):
    base_channels: int = 16
    resdb_count: int = 2
    resdb_growth: int = 8
    conv3d_count: int = 2
    enable_qe: bool = True
    enable_cfqe: bool = True
    cbam_reduction: int = 4
    cbam_spatial_kernel: int = 7
    spatial_factor: int = 4
    leaky_slope: float = 0.1
    skip_grounded_fusion: bool = True


class TrainSection(_Section):
    batch_size: int = 8
    lr0: float = 1e-4
    lr_decay: float = 0.5
    lr_decay_every: int = 60
    beta1: float = 0.5
    beta2: float = 0.99
    epsilon: float = 1e-8
    max_epochs: int = 1
    patch_size: int = 32
    clip_frames: int = 7
    checkpoint_every: int = 0
    grad_clip: Optional[float] = None


class DataSection(_Section):
    data_dir: Optional[str] = None
    manifest: str = "manifest.csv"
    crops_per_clip: int = 1


class RunConfigFile(_Section):
    network: NetworkSection = Field(default_factory=NetworkSection)
    train: TrainSection = Field(default_factory=TrainSection)
    data: DataSection = Field(default_factory=DataSection)
    seed: int = 0

    def network_config(self) -> NetworkConfig:
        try:
            return NetworkConfig(**self.network.dict())
        except ContractError as e:
            raise UsageError(f"invalid network config: {e}") from e

    def train_config(self) -> TrainConfig:
        try:
            return TrainConfig(
                **self.train.dict(),
                seed=self.seed,
                crops_per_clip=self.data.crops_per_clip,
                network=self.network_config(),
            )
        except ContractError as e:
            raise UsageError(f"invalid train config: {e}") from e

    @classmethod
    def from_train_config(cls, cfg: TrainConfig, data: Optional[dict] = None) -> "RunConfigFile":
        train = {k: v for k, v in cfg.to_dict().items() if k in TrainSection.__fields__}
        data = dict(data or {})
        data.setdefault("crops_per_clip", cfg.crops_per_clip)
        return cls(network=cfg.network.to_dict(), train=train, data=data, seed=cfg.seed)


# ------------------------------------------------------------------
# Loading
# ------------------------------------------------------------------

def _read_document(path: Path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise UsageError(f"{path}: not valid JSON/YAML ({e})") from e
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: top level must be a mapping, got {type(doc).__name__}")
    return doc


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def split_overrides(argv: Sequence[str]) -> Tuple[List[str], Dict[str, Any]]:
    """
    Pull dotted overrides (`--network.resdb_count 3` or `--train.lr0=0.0002`)
    out of an argument list. Returns (remaining args, nested override dict).
    Values are parsed as YAML scalars, so `3`, `true` and `null` get types.
    """
    remaining: List[str] = []
    overrides: Dict[str, Any] = {}
    args = list(argv)
    i = 0
    while i < len(args):
        token = args[i]
        key = token[2:].split("=", 1)[0] if token.startswith("--") else ""
        if "." not in key:
            remaining.append(token)
            i += 1
            continue

        if "=" in token:
            raw = token.split("=", 1)[1]
            i += 1
        else:
            if i + 1 >= len(args):
                raise UsageError(f"override {token} needs a value")
            raw = args[i + 1]
            i += 2

        section, _, field_name = key.partition(".")
        if section not in SECTIONS or not field_name or "." in field_name:
            raise UsageError(f"unknown config key {key!r}")
        overrides.setdefault(section, {})[field_name] = yaml.safe_load(raw)
    return remaining, overrides


def _validate(doc: Dict[str, Any]) -> RunConfigFile:
    try:
        return RunConfigFile.parse_obj(doc)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            where = ".".join(str(p) for p in err["loc"])
            if err["type"] == "value_error.extra":
                problems.append(f"unknown config key {where!r}")
            else:
                problems.append(f"{where}: {err['msg']}")
        raise UsageError("; ".join(problems)) from e


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    defaults_path: Optional[Path] = RUN_DEFAULTS_PATH,
) -> RunConfigFile:
    doc: Dict[str, Any] = {}
    if defaults_path is not None and Path(defaults_path).exists():
        doc = _read_document(defaults_path)
    if path is not None:
        doc = _merge(doc, _read_document(path))
    if overrides:
        doc = _merge(doc, overrides)
    return _validate(doc)


def run_config_from_checkpoint(config: Dict[str, Any]) -> RunConfigFile:
    try:
        return RunConfigFile.parse_obj(config)
    except ValidationError as e:
        raise ContractError(f"checkpoint carries an invalid run config: {e}") from e
