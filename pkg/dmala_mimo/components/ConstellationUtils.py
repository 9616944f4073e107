import numpy as np

from dmala_mimo.exceptions.DmalaError import ConfigError, DemapError
from dmala_mimo.models.Constellation import Constellation


class ConstellationUtils:
    """
    Build normalized PAM alphabets and map bits to real symbols and back.

    One real alphabet describes each real dimension of a square QAM constellation:
    q=2 is QPSK, q=4 is 16-QAM, q=8 is 64-QAM. Labels are Gray codes per real
    dimension, bits are +1/-1, and +1 in the first label bit selects the upper half
    of the alphabet.

    Examples:
        >>> from dmala_mimo import ConstellationUtils
        >>> qam16 = ConstellationUtils.build_constellation(4)
        >>> x = ConstellationUtils.map_bits(np.array([+1, -1, -1, +1]), qam16)
        >>> ConstellationUtils.demap_bits(x, qam16)
        array([ 1, -1, -1,  1])
    """

    @staticmethod
    def build_constellation(q: int) -> Constellation:
        """
        Build the Gray-labeled alphabet {+-1, +-3, ..., +-(q-1)} with unit complex power.

        Args:
            q: Alphabet size per real dimension, a power of two >= 2.

        Returns:
            Constellation: alphabet scaled by sqrt(3 / (2 (q^2 - 1))) so that mean a^2 = 1/2.

        Raises:
            ConfigError: If q is not a power of two or q < 2.

        Examples:
            >>> ConstellationUtils.build_constellation(2).real_alphabet
            array([-0.70710678,  0.70710678])
        """
        if not isinstance(q, (int, np.integer)) or q < 2 or q & (q - 1):
            raise ConfigError(f"Alphabet size must be a power of two >= 2, got {q}")
        q = int(q)
        bits = q.bit_length() - 1
        scale = np.sqrt(3.0 / (2.0 * (q * q - 1)))
        alphabet = scale * np.arange(-(q - 1), q, 2, dtype=float)

        # Binary-reflected Gray code: index i carries label i ^ (i >> 1).
        labels = np.arange(q) ^ (np.arange(q) >> 1)
        shifts = np.arange(bits - 1, -1, -1)
        label_bits = (labels[:, None] >> shifts) & 1
        bit_table = (2 * label_bits - 1).astype(np.int8)

        label_to_index = np.empty(q, dtype=np.int64)
        label_to_index[labels] = np.arange(q)
        flip_table = label_to_index[labels[:, None] ^ (1 << shifts)[None, :]]

        for array in (alphabet, bit_table, label_to_index, flip_table):
            array.flags.writeable = False

        return Constellation(
            real_alphabet=alphabet,
            bits_per_real_symbol=bits,
            bit_table=bit_table,
            label_to_index=label_to_index,
            flip_table=flip_table,
            d_min=float(scale),
        )

    @staticmethod
    def map_bits(bits, constellation: Constellation) -> np.ndarray:
        """
        Gray-map consecutive groups of +1/-1 bits to alphabet points.

        Args:
            bits: (..., N * log2 Q) array of +1/-1.
            constellation: Target alphabet.

        Returns:
            np.ndarray: (..., N) real symbols.

        Raises:
            ValueError: If the trailing length is not a multiple of log2 Q.
        """
        bits = np.asarray(bits)
        b = constellation.bits_per_real_symbol
        if bits.shape[-1] % b:
            raise ValueError(f"Bit vector length {bits.shape[-1]} is not a multiple of {b}")
        groups = (bits.reshape(bits.shape[:-1] + (-1, b)) > 0).astype(np.int64)
        weights = 1 << np.arange(b - 1, -1, -1)
        indices = constellation.label_to_index[groups @ weights]
        return constellation.real_alphabet[indices]

    @staticmethod
    def nearest_indices(x, constellation: Constellation) -> np.ndarray:
        """
        Alphabet index of the nearest point for every entry; exact midpoints go to the
        lower amplitude. No distance check, use for slicing soft estimates.
        """
        distances = np.abs(np.asarray(x, dtype=float)[..., None] - constellation.real_alphabet)
        # argmin returns the first minimum, i.e. the lower of two tied amplitudes.
        return np.argmin(distances, axis=-1)

    @staticmethod
    def snap(x, constellation: Constellation) -> np.ndarray:
        """Nearest alphabet point for every entry (tie-break toward the lower amplitude)."""
        return constellation.real_alphabet[ConstellationUtils.nearest_indices(x, constellation)]

    @staticmethod
    def symbol_indices(x, constellation: Constellation) -> np.ndarray:
        """
        Alphabet indices of entries that are (numerically) alphabet points.

        Raises:
            DemapError: If an entry lies farther than d_min from every alphabet point.
        """
        x = np.asarray(x, dtype=float)
        indices = ConstellationUtils.nearest_indices(x, constellation)
        distance = np.abs(x - constellation.real_alphabet[indices])
        if np.any(distance > constellation.d_min * (1.0 + 1e-9)):
            worst = float(np.max(distance))
            raise DemapError(f"Symbol is {worst:.3g} away from the alphabet, beyond d_min={constellation.d_min:.3g}")
        return indices

    @staticmethod
    def demap_bits(x, constellation: Constellation) -> np.ndarray:
        """
        Exact inverse of :meth:`map_bits`.

        Args:
            x: (..., N) symbols.
            constellation: Source alphabet.

        Returns:
            np.ndarray: (..., N * log2 Q) array of +1/-1.

        Raises:
            DemapError: If an entry is farther than d_min from every alphabet point.

        Examples:
            >>> qpsk = ConstellationUtils.build_constellation(2)
            >>> ConstellationUtils.demap_bits(np.array([0.7071, -0.7071]), qpsk)
            array([ 1, -1])
        """
        indices = ConstellationUtils.symbol_indices(x, constellation)
        bits = constellation.bit_table[indices]
        return bits.reshape(bits.shape[:-2] + (-1,)).astype(np.int64)
