"""Run configuration: YAML files validated into pydantic models."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from pothole_seg.domain.models import NetworkConfig, SyntheticSceneSpec, TrainConfig
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.constants import RESOLVED_CONFIG_NAME
from pothole_seg.shared.exceptions import ConfigError

logger = get_logger(__name__)


class DatasetConfig(BaseModel):
    """Where training and validation clouds come from.

    Directories take precedence; without them ``train_count`` and
    ``val_count`` clouds are generated from the scene spec.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    train_dir: Path | None = None
    val_dir: Path | None = None
    train_count: int = Field(20, ge=0)
    val_count: int = Field(5, ge=0)


class RunConfig(BaseModel):
    """Everything one command needs to reproduce its outputs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    network: NetworkConfig = Field(default_factory=NetworkConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    scene: SyntheticSceneSpec = Field(default_factory=SyntheticSceneSpec)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    output_dir: Path = Path("runs/default")
    seed: int = Field(0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _propagate_seed(cls, data: Any) -> Any:
        """A top-level seed fills the train and scene seeds left unset."""
        if not isinstance(data, dict) or "seed" not in data:
            return data
        data = dict(data)
        for section in ("train", "scene"):
            block = dict(data.get(section) or {})
            block.setdefault("seed", data["seed"])
            data[section] = block
        return data


class ConfigManager:
    """Loads, overrides and echoes run configurations."""

    def __init__(self, config: RunConfig | None = None) -> None:
        self._config = config or RunConfig()

    @property
    def config(self) -> RunConfig:
        return self._config

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: str = "<dict>") -> ConfigManager:
        try:
            return cls(RunConfig.model_validate(data))
        except ValidationError as e:
            first = e.errors()[0]
            where = ".".join(str(p) for p in first["loc"]) or "<root>"
            raise ConfigError(
                f"Invalid config {source}: {where}: {first['msg']} ({e.error_count()} error(s))",
                file=source,
            ) from e

    @classmethod
    def load(cls, path: Path) -> ConfigManager:
        """Read and validate a YAML run file.

        Raises:
            ConfigError: If the file is missing, not YAML, or fails validation
        """
        logger.trace(f"Starting {__name__}...")
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}", file=str(path))
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}", file=str(path)) from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"Expected a mapping in {path}, got {type(data).__name__}", file=str(path))
        logger.info(f"Loaded config {path}")
        return cls.from_dict(data, source=str(path))

    def apply_overrides(
        self,
        seed: int | None = None,
        output_dir: Path | None = None,
        test_mode: bool = False,
        use_feature_augmenter: bool | None = None,
    ) -> RunConfig:
        """Apply command-line globals; ``seed`` replaces every seed in the run."""
        data = self._config.model_dump()
        if seed is not None:
            data["seed"] = seed
            data["train"]["seed"] = seed
            data["scene"]["seed"] = seed
        if output_dir is not None:
            data["output_dir"] = output_dir
        if test_mode:
            data["network"]["strict"] = False
        if use_feature_augmenter is not None:
            data["network"]["use_feature_augmenter"] = use_feature_augmenter
        self._config = ConfigManager.from_dict(data, source="<overrides>").config
        return self._config

    def to_yaml(self) -> str:
        return yaml.safe_dump(self._config.model_dump(mode="json"), sort_keys=False)

    def echo(self, out_dir: Path) -> Path:
        """Write the resolved config into ``out_dir`` (atomic rename)."""
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / RESOLVED_CONFIG_NAME
        temp = target.with_suffix(target.suffix + ".tmp")
        temp.write_text(self.to_yaml(), encoding="utf-8")
        temp.replace(target)
        logger.debug(f"Echoed resolved config to {target}")
        return target
