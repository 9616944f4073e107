from dataclasses import dataclass

import numpy as np

STATE_SPACE_CAP = 65536


@dataclass(frozen=True, eq=False)
class StateSpace:
    """
    All Q^N vectors of A^N in mixed-radix order (coordinate 0 most significant).

    Attributes:
        indices: (Q^N, N) alphabet indices of every state.
        values: (Q^N, N) amplitudes of every state.
        q: alphabet size.
    """

    indices: np.ndarray
    values: np.ndarray
    q: int

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def index_of(self, alphabet_indices) -> np.ndarray:
        """Map (..., N) alphabet indices to state indices."""
        alphabet_indices = np.asarray(alphabet_indices, dtype=np.int64)
        n = alphabet_indices.shape[-1]
        radix = self.q ** np.arange(n - 1, -1, -1, dtype=np.int64)
        return alphabet_indices @ radix


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """Exact (possibly tempered) posterior over a StateSpace."""

    pi: np.ndarray
    log_pi: np.ndarray
    space: StateSpace


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Dense row-stochastic kernel P[i, j] = P(x_j | x_i) over a StateSpace."""

    p: np.ndarray
    space: StateSpace
    kind: str = "dmala"
