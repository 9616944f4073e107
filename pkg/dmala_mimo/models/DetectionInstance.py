from dataclasses import dataclass
from typing import Optional

import numpy as np

from dmala_mimo.exceptions.DmalaError import ConfigError, InstanceError
from dmala_mimo.models.Constellation import Constellation

CHANNEL_KINDS = ("rayleigh", "kronecker")


@dataclass(frozen=True)
class ChannelSpec:
    """
    Channel ensemble description: i.i.d. Rayleigh or Kronecker exponential correlation.

    Attributes:
        kind: "rayleigh" or "kronecker".
        rho: exponential correlation coefficient in [0, 1), used for both the receive
            and the transmit side of the Kronecker model.
        nt: complex transmit antennas.
        nr: complex receive antennas.
    """

    kind: str = "rayleigh"
    rho: float = 0.0
    nt: int = 2
    nr: int = 2

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ConfigError(f"Unsupported channel kind '{self.kind}', expected one of {CHANNEL_KINDS}")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"Correlation coefficient rho must lie in [0, 1), got {self.rho}")
        if self.nt < 1 or self.nr < 1:
            raise ConfigError(f"Antenna counts must be >= 1, got nt={self.nt}, nr={self.nr}")

    @classmethod
    def from_dict(cls, data: dict):
        unknown = set(data) - {"kind", "rho", "nt", "nr"}
        if unknown:
            raise ConfigError(f"Unknown channel keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return {"kind": self.kind, "rho": self.rho, "nt": self.nt, "nr": self.nr}


@dataclass(frozen=True, eq=False)
class DetectionInstance:
    """
    One detection problem y = Hx + n in the real-valued model.

    Instances are immutable and shared read-only between chains.

    Attributes:
        H: (M, N) real channel matrix, M = 2 N_r, N = 2 N_t.
        y: (M,) received vector.
        sigma2: complex noise variance (per real component sigma2 / 2).
        constellation: real alphabet of every coordinate of x.
        true_x: optional (N,) transmitted vector for scoring.
        seed: optional seed the instance was drawn with (serialized, not used).
    """

    H: np.ndarray
    y: np.ndarray
    sigma2: float
    constellation: Constellation
    true_x: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "y", y)
        if H.ndim != 2 or y.shape != (H.shape[0],):
            raise InstanceError(f"Shape mismatch: H {H.shape}, y {y.shape}")
        if not self.sigma2 > 0:
            raise InstanceError(f"sigma2 must be positive, got {self.sigma2}")
        if H.shape[0] % 2 or H.shape[1] % 2:
            raise InstanceError(f"Real-valued dimensions must be even, got M={H.shape[0]}, N={H.shape[1]}")
        if self.true_x is not None:
            true_x = np.asarray(self.true_x, dtype=float)
            if true_x.shape != (H.shape[1],):
                raise InstanceError(f"true_x has shape {true_x.shape}, expected ({H.shape[1]},)")
            object.__setattr__(self, "true_x", true_x)

    @property
    def M(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @property
    def Q(self) -> int:
        return self.constellation.q

    @property
    def n_bits(self) -> int:
        return self.N * self.constellation.bits_per_real_symbol

    def to_dict(self):
        """Serialize to the harness JSON schema."""
        data = {
            **self.constellation.to_dict(),
            "H": self.H.tolist(),
            "y": self.y.tolist(),
            "sigma2": float(self.sigma2),
            "seed": self.seed,
        }
        if self.true_x is not None:
            data["true_x"] = self.true_x.tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict):
        # Local import keeps models free of component imports at module load.
        from dmala_mimo.components.ConstellationUtils import ConstellationUtils

        constellation = ConstellationUtils.build_constellation(int(data["q"]))
        if "alphabet" in data and not np.allclose(data["alphabet"], constellation.real_alphabet, atol=1e-12):
            raise InstanceError("Serialized alphabet does not match the normalized alphabet for q")
        return cls(
            H=np.array(data["H"], dtype=float),
            y=np.array(data["y"], dtype=float),
            sigma2=float(data["sigma2"]),
            constellation=constellation,
            true_x=None if data.get("true_x") is None else np.array(data["true_x"], dtype=float),
            seed=data.get("seed"),
        )
