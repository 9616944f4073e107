try:
    import tomllib
except ImportError:  # pragma: no cover - Python < 3.11
    import tomli as tomllib
import json
import logging
from dataclasses import replace
from pathlib import Path

from dmala_mimo.exceptions.DmalaError import ConfigError
from dmala_mimo.models.ExperimentConfig import ExperimentConfig

logger = logging.getLogger(__name__)


class ConfigUtils:

    @staticmethod
    def get_version():
        try:
            # pyproject.toml lives at the repo root (two levels above package dir)
            toml_path = Path(__file__).parents[2] / "pyproject.toml"
            with open(toml_path, "rb") as f:
                data = tomllib.load(f)
                return data.get("tool", {}).get("poetry", {}).get("version", "0.0.0")
        except Exception:
            return "0.0.0"

    @staticmethod
    def load_experiment_config(path=None, experiment=None, seed=None, output_path=None) -> ExperimentConfig:
        """
        Read an experiment config from JSON and apply command-line overrides.

        Args:
            path (str, optional): JSON file whose keys are ExperimentConfig field names.
                Without a file the defaults of ``experiment`` are used.
            experiment (str, optional): Experiment name; must match the file's
                ``experiment`` key when both are given.
            seed (int, optional): Overrides the file's seed.
            output_path (str, optional): Overrides the file's output directory.

        Returns:
            ExperimentConfig: Validated configuration.

        Raises:
            ConfigError: If the file is unreadable, malformed or inconsistent.

        Examples:
            >>> config = ConfigUtils.load_experiment_config("tv.json", "tv_curve", seed=7)
        """
        data = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text(encoding="utf-8"))
            except OSError as e:
                raise ConfigError(f"Cannot read config file {path}: {e}") from e
            except json.JSONDecodeError as e:
                raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
            if not isinstance(data, dict):
                raise ConfigError(f"Config file {path} must hold a JSON object")
        if experiment is not None:
            if data.get("experiment", experiment) != experiment:
                raise ConfigError(f"Config file is for '{data['experiment']}', not '{experiment}'")
            data["experiment"] = experiment
        config = ExperimentConfig.from_dict(data)

        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if output_path is not None:
            overrides["output_path"] = str(output_path)
        if overrides:
            config = replace(config, **overrides)
        logger.debug(f"Loaded {config.experiment} config with hash {config.config_hash()}")
        return config
