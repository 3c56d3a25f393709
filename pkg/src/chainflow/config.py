"""Pipeline configuration.

Every tunable lives in one flat namespace of dotted keys (``embed.d_hidden``,
``profile.alpha``, ...) so a single JSON document can configure a full run and
be echoed verbatim into the run manifest.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

BURN_ADDRESS = "0x" + "0" * 40

TOKEN_KEY_MODES = ("contract+id", "tokenid-only")


@dataclass
class ExtractionKeys:
    """Property-key sets used to pull payload data out of event properties."""

    token_keys: tuple[str, ...] = ("tokenId", "_tokenId", "id")
    asset_keys: tuple[str, ...] = ("assetId",)
    ticket_keys: tuple[str, ...] = ("ticketId",)
    pack_keys: tuple[str, ...] = ("packId",)
    value_keys: tuple[str, ...] = ("value", "amount", "reward")
    token_key_mode: str = "contract+id"


@dataclass
class PipelineConfig:
    seed: int = 0

    # ingest
    ingest_strict: bool = False
    ingest_same_value_threshold: int = 100_000

    # sequence / payload extraction
    token_keys: tuple[str, ...] = ("tokenId", "_tokenId", "id")
    asset_keys: tuple[str, ...] = ("assetId",)
    ticket_keys: tuple[str, ...] = ("ticketId",)
    pack_keys: tuple[str, ...] = ("packId",)
    value_keys: tuple[str, ...] = ("value", "amount", "reward")
    token_key_mode: str = "contract+id"

    # action synthesis
    repeat_threshold: int = 3

    # embedding
    d_hidden: int = 64
    d_out: int = 32
    epochs: int = 30
    lr: float = 0.01
    untrained: bool = False
    train_fraction: float = 0.7
    mask_rate: float = 0.15
    edge_dropout: float = 0.2

    # clustering
    algorithms: str = "all"
    k: int = 0  # 0 means auto-select via the elbow method
    k_max: int = 12
    train_only: bool = False
    bandwidth_quantile: float = 0.3
    damping: float = 0.5
    birch_branching: int = 50
    rbf_gamma: float = 0.0  # 0 means 1 / d_out

    # profiling
    alpha: float = 0.5
    beta: float = 0.6
    gamma: int = 2
    rho_literal: bool = False

    # export
    export_format: str = "dot"

    def extraction_keys(self) -> ExtractionKeys:
        return ExtractionKeys(
            token_keys=tuple(self.token_keys),
            asset_keys=tuple(self.asset_keys),
            ticket_keys=tuple(self.ticket_keys),
            pack_keys=tuple(self.pack_keys),
            value_keys=tuple(self.value_keys),
            token_key_mode=self.token_key_mode,
        )

    def validate(self) -> None:
        if self.token_key_mode not in TOKEN_KEY_MODES:
            raise ConfigError(f"unknown token key mode: {self.token_key_mode!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("embed.train_fraction must lie in (0, 1)")
        if self.repeat_threshold < 2:
            raise ConfigError("action.repeat_threshold must be >= 2")
        if not 0.5 <= self.damping < 1.0:
            raise ConfigError("cluster.damping must lie in [0.5, 1)")
        if not 0.0 < self.bandwidth_quantile <= 1.0:
            raise ConfigError("cluster.bandwidth_quantile must lie in (0, 1]")
        if self.d_hidden < 1 or self.d_out < 1:
            raise ConfigError("embedding dimensions must be positive")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError("profile.beta must lie in (0, 1]")

    def to_flat(self) -> dict:
        """Dotted-key echo of the full configuration, keys sorted."""
        out = {}
        for f in dataclasses.fields(self):
            dotted = _FIELD_TO_KEY[f.name]
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[dotted] = value
        return dict(sorted(out.items()))


# dotted key <-> dataclass field
_KEY_TO_FIELD = {
    "seed": "seed",
    "ingest.strict": "ingest_strict",
    "ingest.same_value_threshold": "ingest_same_value_threshold",
    "sequence.token_keys": "token_keys",
    "sequence.asset_keys": "asset_keys",
    "sequence.ticket_keys": "ticket_keys",
    "sequence.pack_keys": "pack_keys",
    "sequence.value_keys": "value_keys",
    "sequence.token_key_mode": "token_key_mode",
    "action.repeat_threshold": "repeat_threshold",
    "embed.d_hidden": "d_hidden",
    "embed.d_out": "d_out",
    "embed.epochs": "epochs",
    "embed.lr": "lr",
    "embed.untrained": "untrained",
    "embed.train_fraction": "train_fraction",
    "embed.mask_rate": "mask_rate",
    "embed.edge_dropout": "edge_dropout",
    "cluster.algorithms": "algorithms",
    "cluster.k": "k",
    "cluster.k_max": "k_max",
    "cluster.train_only": "train_only",
    "cluster.bandwidth_quantile": "bandwidth_quantile",
    "cluster.damping": "damping",
    "cluster.birch_branching": "birch_branching",
    "cluster.rbf_gamma": "rbf_gamma",
    "profile.alpha": "alpha",
    "profile.beta": "beta",
    "profile.gamma": "gamma",
    "profile.rho_literal": "rho_literal",
    "export.format": "export_format",
}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


def _coerce(name: str, value, target_type):
    if target_type is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    if target_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if target_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if target_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    # remaining fields are string tuples
    if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise ConfigError(f"{name}: expected a list of strings, got {value!r}")


def apply_overrides(config: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Apply dotted-key overrides; unknown keys raise ConfigError."""
    updates = {}
    hints = _type_hints()
    for key, value in overrides.items():
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"unknown config key: {key!r}")
        fname = _KEY_TO_FIELD[key]
        updates[fname] = _coerce(key, value, hints[fname])
    cfg = dataclasses.replace(config, **updates)
    cfg.validate()
    return cfg


def _type_hints() -> dict:
    hints = {}
    for f in dataclasses.fields(PipelineConfig):
        default = f.default
        hints[f.name] = type(default)
    return hints


def load_config(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Load a flat dotted-key JSON config file on top of ``base`` (or defaults)."""
    base = base if base is not None else default_config()
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return apply_overrides(base, doc)


def default_config() -> PipelineConfig:
    """Defaults, with CHAINFLOW_SEED honoured as the seed fallback."""
    cfg = PipelineConfig()
    env_seed = os.environ.get("CHAINFLOW_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"CHAINFLOW_SEED is not an integer: {env_seed!r}") from exc
    return cfg
