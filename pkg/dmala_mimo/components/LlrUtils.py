import numpy as np

from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.exceptions.DmalaError import ConfigError, DmalaError
from dmala_mimo.models.DetectionInstance import DetectionInstance
from dmala_mimo.models.SampleList import DEFAULT_LLR_CLIP, LlrVector, SampleList

LOOKUP_MIN = -8.0
LOOKUP_STEP = 1.0 / 16.0
_LOOKUP_GRID = np.linspace(LOOKUP_MIN, 0.0, int(round(-LOOKUP_MIN / LOOKUP_STEP)) + 1)
_LOOKUP_VALUES = np.logaddexp(0.0, _LOOKUP_GRID)


class LlrUtils:
    """
    Soft and hard decisions from a list of samples.

    Bits are ordered coordinate by coordinate, label bits MSB first, the same order
    :meth:`ConstellationUtils.demap_bits` produces. LLRs are natural-log ratios
    log P(b=+1 | y) / P(b=-1 | y), clamped to [-clip, +clip].

    Examples:
        >>> samples = DmalaUtils.run_parallel_chains(instance, SamplerConfig(tau=2.0))
        >>> llr = LlrUtils.llr_is(samples, instance)
        >>> x_hat = LlrUtils.hard_decision(samples, instance)
    """

    @staticmethod
    def softplus(a, lookup=False):
        """
        F(a) = log(1 + e^a).

        The lookup variant interpolates a table on [-8, 0] with step 1/16, uses
        F(a) = e^a below the table and F(a) = a + F(-a) above zero.
        """
        a = np.asarray(a, dtype=float)
        if not lookup:
            return np.logaddexp(0.0, a)
        negative = np.minimum(a, 0.0)
        table = np.where(negative < LOOKUP_MIN, np.exp(negative), np.interp(negative, _LOOKUP_GRID, _LOOKUP_VALUES))
        return np.where(a > 0, a + table, table)

    @staticmethod
    def logsumexp_stream(values, lookup=False):
        """
        log sum_s exp(values[s]) by the recursion v <- max(v, a) + F(-|v - a|).

        Works elementwise over trailing axes: ``values`` of shape (S, ...) gives a
        result of shape (...). ``-inf`` entries are absorbed, so an all ``-inf``
        column stays ``-inf``.

        Examples:
            >>> LlrUtils.logsumexp_stream([0.0, 0.0])
            0.6931471805599453
        """
        values = np.asarray(values, dtype=float)
        if values.shape[0] == 0:
            raise DmalaError("logsumexp_stream needs at least one value")
        v = values[0]
        for a in values[1:]:
            with np.errstate(invalid="ignore"):
                gap = -np.abs(v - a)
            gap = np.where(np.isnan(gap), -np.inf, gap)
            v = np.maximum(v, a) + LlrUtils.softplus(gap, lookup)
        return float(v) if np.ndim(v) == 0 else v

    @staticmethod
    def _bit_flip_metrics(sample_list: SampleList, instance: DetectionInstance):
        """
        Untempered f of every sample with each of its bits forced to +1 and to -1.

        Flipping one label bit moves one real coordinate by delta, so
        ||r'||^2 = ||r||^2 - 2 delta (H^T r)_n + delta^2 ||h_n||^2.

        Returns:
            tuple: (f_plus, f_minus), each of shape (S, N, log2 Q).
        """
        constellation = instance.constellation
        samples = sample_list.samples
        indices = ConstellationUtils.symbol_indices(samples, constellation)
        r = ProposalUtils.residual(instance, samples)
        r_norm = np.sum(r * r, axis=-1)
        h_t_r = r @ instance.H
        column_norms = np.sum(instance.H * instance.H, axis=0)

        flipped = constellation.flip_table[indices]
        delta = constellation.real_alphabet[flipped] - samples[..., None]
        f_flip = -(r_norm[:, None, None] - 2.0 * delta * h_t_r[..., None] + delta**2 * column_norms[None, :, None]) / instance.sigma2
        f_own = (-r_norm / instance.sigma2)[:, None, None]
        bit_is_plus = constellation.bit_table[indices] > 0
        return np.where(bit_is_plus, f_own, f_flip), np.where(bit_is_plus, f_flip, f_own)

    @staticmethod
    def llr_is(sample_list: SampleList, instance: DetectionInstance, tau=None, clip=DEFAULT_LLR_CLIP, lookup=False) -> LlrVector:
        """
        Importance-sampling LLR from samples of the tempered posterior.

        With gamma = (f(x+) - f(x-)) / tau and c = (tau - 1) / tau, every sample adds
        c f(x+) - F(-gamma) to the numerator sum and c f(x-) - F(gamma) to the
        denominator sum; both sums are accumulated with :meth:`logsumexp_stream`.
        Duplicate samples count with their multiplicity.

        Args:
            sample_list: Samples drawn under temperature ``tau``.
            instance: Detection problem.
            tau (float, optional): Defaults to ``sample_list.source_tau``.
            clip (float, optional): Clamp magnitude. Defaults to 30.
            lookup (bool, optional): Use the tabulated F. Defaults to False.

        Raises:
            ConfigError: If tau <= 1.
        """
        tau = sample_list.source_tau if tau is None else tau
        if not tau > 1.0:
            raise ConfigError(f"IS LLR needs a tempered sample list (tau > 1), got tau={tau}")
        f_plus, f_minus = LlrUtils._bit_flip_metrics(sample_list, instance)
        gamma = (f_plus - f_minus) / tau
        c = (tau - 1.0) / tau
        numerator = LlrUtils.logsumexp_stream(c * f_plus - LlrUtils.softplus(-gamma, lookup), lookup)
        denominator = LlrUtils.logsumexp_stream(c * f_minus - LlrUtils.softplus(gamma, lookup), lookup)
        llrs = np.clip(np.reshape(numerator - denominator, -1), -clip, clip)
        return LlrVector(llrs=llrs, clip=clip)

    @staticmethod
    def llr_list(sample_list: SampleList, instance: DetectionInstance, clip=DEFAULT_LLR_CLIP, lookup=False) -> LlrVector:
        """
        Conventional list LLR over the distinct candidates of the list, with the
        untempered metric. A bit value no candidate carries gives +-clip.
        """
        candidates = np.unique(sample_list.samples, axis=0)
        f_values = ProposalUtils.metric_f(instance, candidates, 1.0)
        bits = ConstellationUtils.demap_bits(candidates, instance.constellation)
        numerator = LlrUtils.logsumexp_stream(np.where(bits > 0, f_values[:, None], -np.inf), lookup)
        denominator = LlrUtils.logsumexp_stream(np.where(bits < 0, f_values[:, None], -np.inf), lookup)
        numerator = np.atleast_1d(numerator)
        denominator = np.atleast_1d(denominator)
        if np.any(np.isneginf(numerator) & np.isneginf(denominator)):
            raise DmalaError("Both bit subsets are empty")
        with np.errstate(invalid="ignore"):
            llrs = numerator - denominator
        llrs = np.where(np.isneginf(numerator), -clip, np.where(np.isneginf(denominator), clip, llrs))
        return LlrVector(llrs=np.clip(llrs, -clip, clip), clip=clip)

    @staticmethod
    def hard_decision(sample_list: SampleList, instance: DetectionInstance) -> np.ndarray:
        """The sample with the smallest residual norm; ties go to the first in list order."""
        f_values = ProposalUtils.metric_f(instance, sample_list.samples, 1.0)
        return sample_list.samples[int(np.argmax(f_values))].copy()

    @staticmethod
    def hard_bits(llrs) -> np.ndarray:
        """+1/-1 decisions from LLR signs; a zero LLR decides +1."""
        values = llrs.llrs if isinstance(llrs, LlrVector) else np.asarray(llrs, dtype=float)
        return np.where(values >= 0, 1, -1).astype(np.int64)

    @staticmethod
    def bit_errors(bits_hat, bits_true) -> int:
        return int(np.count_nonzero(np.asarray(bits_hat) != np.asarray(bits_true)))
