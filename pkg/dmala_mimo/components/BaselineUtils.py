import logging
from dataclasses import replace

import numpy as np
import scipy.linalg

from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.components.DmalaUtils import DmalaUtils
from dmala_mimo.components.LlrUtils import LlrUtils
from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.models.DetectionInstance import DetectionInstance
from dmala_mimo.models.SampleList import SampleList
from dmala_mimo.models.SamplerConfig import BaselineConfig, ChainTrace, SamplerConfig
from dmala_mimo.utils.PoolUtils import PoolUtils
from dmala_mimo.utils.RngUtils import RngUtils

logger = logging.getLogger(__name__)


class BaselineUtils:
    """
    Reference detectors and contrast samplers.

    - MMSE: regularized linear solve sliced to the alphabet.
    - Gibbs: single-site updates from exact full conditionals, sequential sweep.
    - Unadjusted DLA: the DMALA proposal with every move accepted, which converges
      to a biased distribution and serves as the negative control.

    Examples:
        >>> x_soft, x_hat = BaselineUtils.mmse_detect(instance)
        >>> x_hat = BaselineUtils.detect(instance, BaselineConfig(kind="gibbs", T=50))
    """

    @staticmethod
    def mmse_detect(instance: DetectionInstance):
        """
        x_soft = (H^T H + sigma2 I)^-1 H^T y and its per-coordinate slice.

        Symbols carry power 1/2 per real dimension and the noise sigma2 / 2, which
        makes the regularizer exactly sigma2.

        Returns:
            tuple: (x_soft, x_hat), both of shape (N,).
        """
        H = instance.H
        gram = H.T @ H + instance.sigma2 * np.eye(instance.N)
        x_soft = scipy.linalg.solve(gram, H.T @ instance.y, assume_a="pos")
        return x_soft, ConstellationUtils.snap(x_soft, instance.constellation)

    @staticmethod
    def full_conditional(instance: DetectionInstance, x, n: int, tau: float = 1.0) -> np.ndarray:
        """
        pi(x_n = a | x_-n) for every alphabet point a, from the residual at x.

        Args:
            x: (..., N) states.
            n: Coordinate to resample.

        Returns:
            np.ndarray: (..., Q) probabilities.
        """
        x = np.asarray(x, dtype=float)
        h_n = instance.H[:, n]
        r = ProposalUtils.residual(instance, x)
        delta = instance.constellation.real_alphabet - x[..., n, None]
        log_w = -(-2.0 * delta * (r @ h_n)[..., None] + delta**2 * (h_n @ h_n)) / (tau * instance.sigma2)
        log_w -= log_w.max(axis=-1, keepdims=True)
        w = np.exp(log_w)
        return w / w.sum(axis=-1, keepdims=True)

    @staticmethod
    def gibbs_step(x, instance: DetectionInstance, rng: np.random.Generator, tau: float = 1.0, random_scan=False) -> np.ndarray:
        """
        One Gibbs sweep of N single-site updates.

        The systematic scan visits coordinates 0..N-1 in order; the random scan
        draws N coordinates uniformly with replacement. Batched ``x`` of shape
        (B, N) updates every chain with the same visiting order.

        Returns:
            np.ndarray: new state(s), same shape as ``x``.
        """
        x = np.array(x, dtype=float)
        alphabet = instance.constellation.real_alphabet
        order = rng.integers(0, instance.N, size=instance.N) if random_scan else range(instance.N)
        for n in order:
            cdf = np.cumsum(BaselineUtils.full_conditional(instance, x, n, tau), axis=-1)
            u = rng.random(cdf.shape[:-1])
            indices = np.minimum((u[..., None] >= cdf).sum(axis=-1), instance.Q - 1)
            x[..., n] = alphabet[indices]
        return x

    @staticmethod
    def unadjusted_dla_step(state, instance: DetectionInstance, config: SamplerConfig, rng: np.random.Generator, preconditioner=None):
        """
        Sample the discrete Langevin proposal and always move there.

        Same signature as :meth:`DmalaUtils.dmala_step`, so it plugs into
        ``run_chain`` and ``run_ensemble``.
        """
        x_prime, _ = ProposalUtils.sample_proposal(state.proposal, rng)
        accepted = np.ones(np.shape(state.f_x), dtype=bool) if state.batched else True
        new_state = DmalaUtils.state_at(instance, config, x_prime, preconditioner, state.accept_count + accepted)
        return new_state, accepted

    @staticmethod
    def run_gibbs_chain(instance: DetectionInstance, config: BaselineConfig, rng: np.random.Generator, tau: float = 1.0) -> ChainTrace:
        """Uniform initialization followed by T - 1 sweeps; keeps the final state."""
        x = instance.constellation.real_alphabet[rng.integers(0, instance.Q, size=instance.N)]
        for _ in range(config.T - 1):
            x = BaselineUtils.gibbs_step(x, instance, rng, tau, config.random_scan)
        f_x = ProposalUtils.metric_f(instance, x, tau)
        return ChainTrace(samples=x[None, :], f_values=np.array([f_x]), accepted=np.ones(config.T - 1, dtype=bool))

    @staticmethod
    def run_unadjusted_chain(instance: DetectionInstance, config: BaselineConfig, rng: np.random.Generator, sampler_config=None) -> ChainTrace:
        """Unadjusted discrete Langevin chain with the step parameters of ``sampler_config``."""
        sampler_config = replace(sampler_config or SamplerConfig(), T=config.T, n_chains=config.n_chains, seed=config.seed)
        return DmalaUtils.run_chain(instance, sampler_config, rng, step=BaselineUtils.unadjusted_dla_step)

    @staticmethod
    def sample_baseline(instance: DetectionInstance, config: BaselineConfig, sampler_config=None, threads=1) -> SampleList:
        """
        Final states of ``config.n_chains`` Gibbs or unadjusted chains; chain i draws
        from the stream (config.seed, i).
        """
        tau = sampler_config.tau if sampler_config is not None else 1.0

        def one_chain(chain_index):
            rng = RngUtils.chain_rng(config.seed, chain_index)
            if config.kind == "gibbs":
                return BaselineUtils.run_gibbs_chain(instance, config, rng, tau)
            return BaselineUtils.run_unadjusted_chain(instance, config, rng, sampler_config)

        traces = PoolUtils.map_ordered(one_chain, range(config.n_chains), threads, f"{config.kind} chains")
        samples = np.stack([trace.final for trace in traces])
        return SampleList(samples=samples, f_values=ProposalUtils.metric_f(instance, samples, 1.0), source_tau=tau)

    @staticmethod
    def detect(instance: DetectionInstance, config: BaselineConfig, sampler_config=None, threads=1) -> np.ndarray:
        """
        Hard decision of a baseline detector.

        Args:
            instance: Detection problem.
            config: Baseline kind and chain settings.
            sampler_config (SamplerConfig, optional): Step parameters and temperature
                for the sampling baselines.
            threads (int, optional): Worker threads for the chains.

        Returns:
            np.ndarray: x_hat of shape (N,).

        Raises:
            ValueError: If the baseline kind is not supported.
        """
        if config.kind == "mmse":
            return BaselineUtils.mmse_detect(instance)[1]
        elif config.kind in ("gibbs", "unadjusted_dla"):
            samples = BaselineUtils.sample_baseline(instance, config, sampler_config, threads)
            return LlrUtils.hard_decision(samples, instance)
        else:
            raise ValueError(f"Unsupported baseline kind: {config.kind}")
