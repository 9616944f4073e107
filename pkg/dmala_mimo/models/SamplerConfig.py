from dataclasses import dataclass, fields, replace
from typing import Optional, Union

import numpy as np

from dmala_mimo.exceptions.DmalaError import ConfigError

SAMPLER_MODES = ("naive", "preconditioned")
INIT_MODES = ("uniform", "mmse")
BASELINE_KINDS = ("mmse", "gibbs", "unadjusted_dla")


@dataclass(frozen=True)
class SamplerConfig:
    """
    DMALA chain parameters.

    ``alpha``, ``beta`` and ``gamma_damp`` left as None resolve per instance to
    alpha = sigma2, beta = d_min^2 / sigma2 and gamma_damp = sigma2 / (2 d_min^2)
    (see :meth:`resolve`). ``tau`` = 1 samples the posterior, ``tau`` > 1 its tempered
    version.
    """

    alpha: Optional[float] = None
    mode: str = "preconditioned"
    beta: Optional[float] = None
    gamma_damp: Optional[float] = None
    T: int = 100
    n_chains: int = 128
    tau: float = 1.0
    seed: int = 0
    init: str = "uniform"

    def __post_init__(self):
        if self.mode not in SAMPLER_MODES:
            raise ConfigError(f"Unsupported sampler mode '{self.mode}', expected one of {SAMPLER_MODES}")
        if self.init not in INIT_MODES:
            raise ConfigError(f"Unsupported init '{self.init}', expected one of {INIT_MODES}")
        for name in ("alpha", "beta", "gamma_damp"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.T < 1:
            raise ConfigError(f"T must be >= 1, got {self.T}")
        if self.n_chains < 1:
            raise ConfigError(f"n_chains must be >= 1, got {self.n_chains}")
        if not self.tau >= 1.0:
            raise ConfigError(f"tau must be >= 1, got {self.tau}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def resolve(self, instance) -> "SamplerConfig":
        """Fill unset step/damping parameters with the instance-dependent defaults."""
        d2 = instance.constellation.d_min ** 2
        return replace(
            self,
            alpha=instance.sigma2 if self.alpha is None else self.alpha,
            beta=d2 / instance.sigma2 if self.beta is None else self.beta,
            gamma_damp=instance.sigma2 / (2.0 * d2) if self.gamma_damp is None else self.gamma_damp,
        )

    @classmethod
    def from_dict(cls, data: dict):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown sampler keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class BaselineConfig:
    """
    Reference detector settings.

    T counts chain states as for DMALA: the initialization plus T - 1 Gibbs sweeps
    or unadjusted steps. Unadjusted chains take their step parameters from the
    accompanying SamplerConfig.
    """

    kind: str = "mmse"
    T: int = 100
    n_chains: int = 128
    seed: int = 0
    random_scan: bool = False

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ConfigError(f"Unsupported baseline '{self.kind}', expected one of {BASELINE_KINDS}")
        if self.T < 1 or self.n_chains < 1:
            raise ConfigError(f"T and n_chains must be >= 1, got T={self.T}, n_chains={self.n_chains}")


@dataclass(frozen=True, eq=False)
class ProposalTable:
    """
    Factorized categorical proposal: one softmax row per coordinate.

    ``probs`` and ``log_probs`` have shape (..., N, Q); a leading batch axis holds
    the tables of an ensemble of chains.
    """

    probs: np.ndarray
    log_probs: np.ndarray
    alphabet: np.ndarray


@dataclass(frozen=True, eq=False)
class Preconditioner:
    """M = (H^T H + gamma I)^-1, symmetric positive-definite, computed once per instance."""

    m: np.ndarray
    gamma_damp: float


@dataclass(frozen=True, eq=False)
class ChainState:
    """
    Current state of one chain (or a lock-step ensemble when arrays carry a batch axis).

    Attributes:
        x: (..., N) current sample, every entry an alphabet point.
        f_x: (...) cached metric f(x) / tau.
        grad: (..., N) cached tempered gradient at x.
        proposal: cached forward proposal table at x.
        accept_count: accepted moves so far (int, or per-chain array).
    """

    x: np.ndarray
    f_x: Union[float, np.ndarray]
    grad: np.ndarray
    proposal: ProposalTable
    accept_count: Union[int, np.ndarray] = 0

    @property
    def batched(self) -> bool:
        return np.ndim(self.x) > 1


@dataclass(frozen=True, eq=False)
class ChainTrace:
    """
    Output of one chain run.

    ``samples`` holds all T states for a trajectory record, or only the final state
    (shape (1, N)) for a final-only record. ``f_values`` are the tempered metrics
    matching ``samples``; ``accepted`` always has T - 1 step flags.
    """

    samples: np.ndarray
    f_values: np.ndarray
    accepted: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1]

    @property
    def final_f(self) -> float:
        return float(self.f_values[-1])

    @property
    def acceptance_rate(self) -> float:
        if self.accepted.size == 0:
            return float("nan")
        return float(np.mean(self.accepted))
