import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional

from dmala_mimo.exceptions.DmalaError import ConfigError
from dmala_mimo.models.DetectionInstance import ChannelSpec
from dmala_mimo.models.SampleList import DEFAULT_LLR_CLIP
from dmala_mimo.models.SamplerConfig import SamplerConfig

EXPERIMENTS = ("tv_curve", "rate_boxplot", "ser_sweep", "llr_fidelity", "dist_histogram")
DETECTORS = ("dmala", "mmse", "gibbs", "unadjusted_dla")

# Experiments whose samples feed soft decisions draw from the tempered posterior.
TEMPERED_EXPERIMENTS = ("llr_fidelity",)
DEFAULT_LLR_TAU = 2.0

# Filled in when the config omits the key.
EXPERIMENT_DEFAULTS = {
    "rate_boxplot": {"snr_db_list": [4.0, 6.0, 8.0, 10.0], "n_realizations": 100},
    "llr_fidelity": {"n_realizations": 100},
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    modulation: int = 2
    snr_db_list: List[float] = field(default_factory=lambda: [8.0])
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    detectors: List[str] = field(default_factory=lambda: ["dmala"])
    n_realizations: int = 1
    n_symbol_vectors: int = 1000
    nmse: Optional[float] = None
    output_path: str = "results"
    seed: int = 0
    list_sizes: List[int] = field(default_factory=lambda: [256, 1024, 4096])
    pool_burn_in: Optional[int] = None
    llr_clip: float = DEFAULT_LLR_CLIP

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"Unsupported experiment '{self.experiment}', expected one of {EXPERIMENTS}")
        if not self.snr_db_list:
            raise ConfigError("snr_db_list must not be empty")
        if self.n_realizations < 1:
            raise ConfigError(f"n_realizations must be >= 1, got {self.n_realizations}")
        if self.n_symbol_vectors < 1:
            raise ConfigError(f"n_symbol_vectors must be >= 1, got {self.n_symbol_vectors}")
        unknown = [d for d in self.detectors if d not in DETECTORS]
        if unknown:
            raise ConfigError(f"Unsupported detectors {unknown}, expected a subset of {DETECTORS}")
        if self.nmse is not None and self.nmse < 0:
            raise ConfigError(f"nmse must be >= 0, got {self.nmse}")
        if any(s < 1 for s in self.list_sizes):
            raise ConfigError(f"list_sizes must be positive, got {self.list_sizes}")
        if self.pool_burn_in is not None and not 0 <= self.pool_burn_in < self.sampler.T:
            raise ConfigError(f"pool_burn_in must lie in [0, T), got {self.pool_burn_in}")
        if not self.llr_clip > 0:
            raise ConfigError(f"llr_clip must be positive, got {self.llr_clip}")
        if self.modulation < 2 or self.modulation & (self.modulation - 1):
            raise ConfigError(f"modulation must be a power of two >= 2, got {self.modulation}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]):
        """
        Build a config from JSON-decoded data whose keys are the field names.

        Omitted keys take the field defaults, overridden per experiment by
        ``EXPERIMENT_DEFAULTS``. ``llr_fidelity`` samples at tau=2 unless the sampler
        section sets it.

        Raises:
            ConfigError: On unknown keys, missing ``experiment`` or invalid values.
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("Config is missing the 'experiment' key")
        try:
            data = {**copy.deepcopy(EXPERIMENT_DEFAULTS.get(data["experiment"], {})), **data}
            data["channel"] = ChannelSpec.from_dict(data.get("channel", {}))
            sampler = dict(data.get("sampler", {}))
            if "tau" not in sampler and data["experiment"] in TEMPERED_EXPERIMENTS:
                sampler["tau"] = DEFAULT_LLR_TAU
            data["sampler"] = SamplerConfig.from_dict(sampler)
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"Malformed config: {e}") from e

    def to_dict(self):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["channel"] = self.channel.to_dict()
        data["sampler"] = self.sampler.to_dict()
        data["snr_db_list"] = list(self.snr_db_list)
        data["detectors"] = list(self.detectors)
        data["list_sizes"] = list(self.list_sizes)
        return data

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON of every field except ``output_path``."""
        data = self.to_dict()
        data.pop("output_path")
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class ResultRecord:
    """
    Result of one experiment run.

    ``tables`` hold the CSV payloads (column name -> list), ``metrics`` the JSON
    summary. ``wall_clock`` is kept out of the reproducible files.
    """

    experiment: str
    config_hash: str
    seed: int
    metrics: Dict[str, Any] = field(default_factory=dict)
    tables: Dict[str, Dict[str, list]] = field(default_factory=dict)
    wall_clock: float = 0.0

    def to_dict(self, include_timing: bool = False):
        data = {
            "experiment": self.experiment,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "metrics": self.metrics,
        }
        if include_timing:
            data["wall_clock"] = self.wall_clock
        return data
