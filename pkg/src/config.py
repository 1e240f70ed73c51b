"""Configuration management for the compliant-foot lab.

Process-level settings come from the environment (``CFLAB_*`` variables or a ``.env``
file). Run configuration comes from a YAML file validated against :mod:`src.schemas`.
"""

import hashlib
import logging
from functools import lru_cache
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict
from ruamel.yaml import YAML
from ruamel.yaml.error import MarkedYAMLError, YAMLError

from src.exceptions import ConfigParseError, ConfigValidationError
from src.schemas import RunConfig

logger = logging.getLogger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.yaml"
PROVENANCE_NAME = "provenance.json"


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    # Overrides RunConfig.output_dir when set
    output_dir: Optional[str] = None

    # Worker processes for sweep cells
    threads: int = 1

    log_level: str = "INFO"

    # "prefect" runs train/sweep as flows, "local" calls the library directly
    orchestrator: str = "local"

    model_config = SettingsConfigDict(
        env_prefix="CFLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


class Provenance(BaseModel):
    """Run provenance written next to every artifact set."""

    run_id: str
    seeds: List[int]
    code_digest: str
    config_digest: str
    command: str


def _yaml() -> YAML:
    yaml = YAML(typ="safe", pure=True)
    yaml.default_flow_style = False
    return yaml


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse YAML text into a plain mapping.

    Raises:
        ConfigParseError: On malformed YAML or duplicate keys
    """
    try:
        data = _yaml().load(text)
    except MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark is not None else 0
        column = mark.column + 1 if mark is not None else 0
        raise ConfigParseError(line, column, e.problem or str(e)) from e
    except YAMLError as e:
        raise ConfigParseError(0, 0, str(e)) from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigParseError(1, 1, "top level of the configuration must be a mapping")
    return data


def validate_config(data: Dict[str, Any]) -> RunConfig:
    """Validate a parsed mapping, applying defaults.

    Raises:
        ConfigValidationError: Naming the first offending key
    """
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        key = ".".join(str(part) for part in error["loc"]) or "<root>"
        raise ConfigValidationError(key, error["msg"]) from e


def dump_config(config: RunConfig) -> str:
    """Serialize a RunConfig to YAML text that reloads to an equal config."""
    stream = StringIO()
    _yaml().dump(config.model_dump(mode="json"), stream)
    return stream.getvalue()


def load_config(
    path: Optional[Union[str, Path]] = None,
    output_dir: Optional[Union[str, Path]] = None,
) -> RunConfig:
    """Load, validate and resolve a run configuration.

    Args:
        path: YAML file; None gives the all-defaults configuration
        output_dir: When given, the resolved configuration is echoed there

    Returns:
        Validated RunConfig

    Raises:
        ConfigParseError: Malformed file or duplicate key
        ConfigValidationError: Unknown key, bad value or unknown stiffness id
    """
    if path is None:
        data: Dict[str, Any] = {}
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigValidationError(str(path), "configuration file not found")
        data = parse_config_text(path.read_text(encoding="utf-8"))

    config = validate_config(data)
    logger.info(f"Loaded configuration {path or '<defaults>'} (run_id={config.run_id})")

    if output_dir is not None:
        echo_config(config, output_dir)
    return config


def echo_config(config: RunConfig, output_dir: Union[str, Path]) -> Path:
    """Write the resolved configuration into an artifact directory."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    target = output_dir / RESOLVED_CONFIG_NAME
    target.write_text(dump_config(config), encoding="utf-8")
    return target


def resolve_output_dir(config: RunConfig, override: Optional[str] = None) -> Path:
    """Output directory precedence: explicit flag, then environment, then config."""
    settings = get_settings()
    return Path(override or settings.output_dir or config.output_dir)


def code_digest() -> str:
    """SHA-256 over the package sources, in sorted path order."""
    root = Path(__file__).resolve().parent
    digest = hashlib.sha256()
    for source in sorted(root.rglob("*.py")):
        digest.update(source.relative_to(root).as_posix().encode("utf-8"))
        digest.update(source.read_bytes())
    return digest.hexdigest()


def write_provenance(
    config: RunConfig,
    output_dir: Union[str, Path],
    seeds: List[int],
    command: str,
) -> Path:
    """Write resolved config plus provenance.json into ``output_dir``."""
    output_dir = Path(output_dir)
    echo_config(config, output_dir)
    provenance = Provenance(
        run_id=config.run_id,
        seeds=list(seeds),
        code_digest=code_digest(),
        config_digest=hashlib.sha256(dump_config(config).encode("utf-8")).hexdigest(),
        command=command,
    )
    target = output_dir / PROVENANCE_NAME
    target.write_text(provenance.model_dump_json(indent=2), encoding="utf-8")
    return target
