from dataclasses import dataclass

import numpy as np

from dmala_mimo.exceptions.DmalaError import DmalaError

DEFAULT_LLR_CLIP = 30.0


@dataclass(frozen=True, eq=False)
class SampleList:
    """
    Samples used for decisions; repetitions are kept and meaningful.

    Attributes:
        samples: (S, N) states in A^N.
        f_values: (S,) untempered metric f of each sample.
        source_tau: temperature the samples were drawn under.
    """

    samples: np.ndarray
    f_values: np.ndarray
    source_tau: float = 1.0

    def __post_init__(self):
        samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        f_values = np.atleast_1d(np.asarray(self.f_values, dtype=float))
        if samples.shape[0] < 1:
            raise DmalaError("SampleList must hold at least one sample")
        if f_values.shape != (samples.shape[0],):
            raise DmalaError(f"f_values shape {f_values.shape} does not match {samples.shape[0]} samples")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "f_values", f_values)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class LlrVector:
    """Per-bit natural-log LLRs, clamped to [-clip, +clip]."""

    llrs: np.ndarray
    clip: float = DEFAULT_LLR_CLIP

    def to_dict(self):
        return {"llrs": self.llrs.tolist(), "clip": self.clip}

    @classmethod
    def from_dict(cls, data: dict):
        return cls(llrs=np.array(data["llrs"], dtype=float), clip=float(data["clip"]))
