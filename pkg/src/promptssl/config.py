"""
Run configuration for promptssl.

A ``RunConfig`` is resolved in three layers: model defaults, an optional
YAML file, then ``key.path=value`` overrides from the command line. The
resolved configuration is hashed and the hash travels with every
checkpoint and result file.
"""
import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from promptssl.common import ConfigError

DEFAULT_AUGMIX_OPS = (
    "Identity",
    "AutoContrast",
    "Equalize",
    "Posterize",
    "Solarize",
    "Rotate",
    "ShearX",
    "ShearY",
    "TranslateX",
    "TranslateY",
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BackboneConfig(_Section):
    kind: Literal["toy", "adapter"] = "toy"
    # adapter only
    model_name: str = "ViT-B-16"
    pretrained: str = "openai"
    weights_path: Optional[str] = None
    layer_taps: Optional[List[int]] = None
    # toy only
    toy_seed: int = 0
    toy_image_size: int = 32
    toy_layer_dims: List[int] = Field(default_factory=lambda: [8, 16, 32])
    toy_embed_dim: int = 64
    toy_context_capacity: int = 77


class FeaturesConfig(_Section):
    content_layers: Optional[List[int]] = None
    d_seed: int = Field(default=512, ge=1)
    std_epsilon: float = Field(default=1e-5, ge=0.0)
    frg_mode: Literal["projection", "identity"] = "projection"
    frg_trainable: bool = False
    frg_seed: int = 0


class RhoConfig(_Section):
    context_length: int = Field(default=4, ge=1)
    init: Literal["manual", "random", "none"] = "manual"
    hidden_width: Optional[int] = Field(default=None, ge=1)
    base_width: Optional[int] = Field(default=None, ge=1)
    template: str = "a photo of a"


class ProjectorConfig(_Section):
    d_joint: Optional[int] = Field(default=None, ge=1)
    bn_momentum: float = Field(default=0.1, gt=0.0, le=1.0)
    bn_eps: float = Field(default=1e-5, gt=0.0)


class AugmentConfig(_Section):
    min_image_size: int = Field(default=8, ge=1)
    crop_scale: Tuple[float, float] = (0.2, 1.0)
    flip_p: float = Field(default=0.5, ge=0.0, le=1.0)
    jitter_p: float = Field(default=0.8, ge=0.0, le=1.0)
    jitter_brightness: float = 0.4
    jitter_contrast: float = 0.4
    jitter_saturation: float = 0.2
    jitter_hue: float = 0.1
    grayscale_p: float = Field(default=0.2, ge=0.0, le=1.0)
    blur_p: float = Field(default=0.5, ge=0.0, le=1.0)
    blur_sigma: Tuple[float, float] = (0.1, 2.0)
    solarize_p: float = Field(default=0.2, ge=0.0, le=1.0)
    augmix_width: int = Field(default=3, ge=1)
    augmix_depth: Tuple[int, int] = (1, 3)
    augmix_alpha: float = Field(default=1.0, gt=0.0)
    augmix_severity: int = Field(default=3, ge=1, le=10)
    augmix_ops: List[str] = Field(
        default_factory=lambda: list(DEFAULT_AUGMIX_OPS))


class LossConfig(_Section):
    enable_con: bool = True
    enable_ce: bool = True
    enable_sem: bool = True
    sem_use_x1: bool = True
    sem_use_x2: bool = True
    temperature: Optional[float] = Field(default=None, gt=0.0)


class TrainConfig(_Section):
    epochs: int = Field(default=50, ge=0)
    batch_size: int = Field(default=4, ge=2)
    shots: Optional[int] = Field(default=16, ge=1)
    lr: float = Field(default=2e-3, ge=0.0)
    momentum: float = 0.9
    weight_decay: float = 5e-4
    warmup_epochs: int = Field(default=1, ge=0)
    grad_clip: Optional[float] = 5.0
    runs: int = Field(default=3, ge=1)
    seeds: Optional[List[int]] = None
    num_workers: int = Field(default=0, ge=0)
    device: str = "cpu"
    deterministic: bool = True


class DataConfig(_Section):
    source: str = "toy2"
    targets: List[str] = Field(default_factory=list)
    protocol: Literal[
        "none", "base_to_new", "cross_dataset", "domain_generalization"
    ] = "none"
    class_mapping: Optional[str] = None


class RunConfig(_Section):
    seed: int = 0
    backbone: BackboneConfig = Field(default_factory=BackboneConfig)
    features: FeaturesConfig = Field(default_factory=FeaturesConfig)
    rho: RhoConfig = Field(default_factory=RhoConfig)
    pv: ProjectorConfig = Field(default_factory=ProjectorConfig)
    augment: AugmentConfig = Field(default_factory=AugmentConfig)
    loss: LossConfig = Field(default_factory=LossConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    data: DataConfig = Field(default_factory=DataConfig)


class Settings(BaseSettings):
    """Environment settings, read from ``PROMPTSSL_*`` variables or .env."""

    model_config = SettingsConfigDict(
        env_prefix="PROMPTSSL_", env_file=".env", extra="ignore")

    data_root: Path = Path("data")
    cache_root: Path = Path.home() / ".cache" / "promptssl"
    runs_root: Path = Path("runs")


def get_settings() -> Settings:
    """Return the environment settings."""
    return Settings()


def _parse_override(override: str) -> Tuple[List[str], Any]:
    if "=" not in override:
        raise ConfigError(
            f"Override '{override}' must have the form key.path=value")
    key, raw_value = override.split("=", 1)
    path = [part for part in key.strip().split(".") if part]
    if not path:
        raise ConfigError(f"Override '{override}' has an empty key")
    try:
        value = yaml.safe_load(raw_value) if raw_value.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(
            f"Cannot parse value of override '{override}': {e}") from e
    return path, value


def apply_overrides(
    data: Dict[str, Any], overrides: Sequence[str]
) -> Dict[str, Any]:
    """
    Apply dotted-path overrides to a nested configuration mapping.

    Args:
        data: Nested mapping, modified in place
        overrides: Strings of the form ``section.key=value``

    Returns:
        The updated mapping
    """
    for override in overrides:
        path, value = _parse_override(override)
        node = data
        for part in path[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[path[-1]] = value
    return data


def _format_validation_error(error: ValidationError) -> str:
    unknown = []
    invalid = []
    for item in error.errors():
        dotted = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            unknown.append(dotted)
        else:
            invalid.append(f"{dotted}: {item['msg']}")
    lines = []
    if unknown:
        lines.append("Unknown configuration keys: " + ", ".join(unknown))
    if invalid:
        lines.append("Invalid configuration values: " + "; ".join(invalid))
    return "\n".join(lines)


def resolve_config(
    data: Optional[Dict[str, Any]] = None,
    overrides: Sequence[str] = (),
) -> RunConfig:
    """
    Build a RunConfig from a mapping plus overrides.

    Raises:
        ConfigError: Listing every unknown or invalid key at once
    """
    merged = apply_overrides(json.loads(json.dumps(data or {})), overrides)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def load_config(
    path: Optional[Path] = None, overrides: Sequence[str] = ()
) -> RunConfig:
    """
    Load a RunConfig: defaults, then the YAML file, then overrides.

    Args:
        path: Optional YAML config file
        overrides: ``key.path=value`` strings applied last

    Returns:
        The resolved RunConfig

    Raises:
        ConfigError: If the file cannot be read or keys are invalid
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(
                f"Config file {path} must contain a mapping at the top")
        data = loaded
    return resolve_config(data, overrides)


def config_to_dict(config: RunConfig) -> Dict[str, Any]:
    """Return the JSON-compatible form of a resolved config."""
    return config.model_dump(mode="json")


def config_hash(config: RunConfig) -> str:
    """SHA-256 over the sorted-key JSON dump of a resolved config."""
    payload = json.dumps(config_to_dict(config), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def dump_config_yaml(config: RunConfig) -> str:
    """Serialize a resolved config back to YAML."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=True)
