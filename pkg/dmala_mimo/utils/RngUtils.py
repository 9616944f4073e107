import numpy as np


class RngUtils:
    """
    Derive independent, reproducible random streams from a 64-bit seed.

    Streams are addressed by a key path, e.g. (seed, realization, chain), through
    ``numpy.random.SeedSequence`` spawn keys. A stream depends only on its own key,
    so adding chains or realizations never perturbs existing ones, and results do
    not depend on the order or thread that consumes the streams.

    Examples:
        >>> rng = RngUtils.stream(2024, 3)          # realization 3
        >>> chain_rng = RngUtils.chain_rng(2024, 0)  # chain 0 of a sampler config
        >>> child_seed = RngUtils.derive_seed(2024, 1, 3)
    """

    @staticmethod
    def stream(seed: int, *keys: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))))

    @staticmethod
    def chain_rng(seed: int, chain_index: int) -> np.random.Generator:
        """Stream of chain ``chain_index`` for a sampler seeded with ``seed``."""
        return RngUtils.stream(seed, chain_index)

    @staticmethod
    def derive_seed(seed: int, *keys: int) -> int:
        """A 64-bit child seed, used to hand nested components their own seed space."""
        sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
        return int(sequence.generate_state(1, dtype=np.uint64)[0])
