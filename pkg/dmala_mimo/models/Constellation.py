from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class Constellation:
    """
    Real-valued PAM alphabet of one real dimension of a square QAM constellation.

    Attributes:
        real_alphabet: Q amplitudes sorted ascending, scaled so the Q^2-QAM built from
            two copies has unit average complex power (mean a^2 = 1/2).
        bits_per_real_symbol: log2(Q).
        bit_table: (Q, log2 Q) array of +1/-1 Gray labels, row i labels real_alphabet[i].
            The first label bit is the sign bit (+1 for the upper half).
        label_to_index: maps the integer value of a 0/1 label to its alphabet index.
        flip_table: (Q, log2 Q) array, entry [i, j] is the alphabet index reached by
            flipping label bit j of point i.
        d_min: half the minimum distance between distinct alphabet points.
    """

    real_alphabet: np.ndarray
    bits_per_real_symbol: int
    bit_table: np.ndarray
    label_to_index: np.ndarray
    flip_table: np.ndarray
    d_min: float

    @property
    def q(self) -> int:
        return int(self.real_alphabet.size)

    @property
    def qam_order(self) -> int:
        """Size of the complex constellation (Q^2)."""
        return self.q * self.q

    def to_dict(self):
        return {"q": self.q, "alphabet": self.real_alphabet.tolist()}
