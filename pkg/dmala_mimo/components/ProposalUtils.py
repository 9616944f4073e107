import logging

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from dmala_mimo.exceptions.DmalaError import ConfigError, KernelError
from dmala_mimo.models.Constellation import Constellation
from dmala_mimo.models.DetectionInstance import DetectionInstance
from dmala_mimo.models.SamplerConfig import Preconditioner, ProposalTable, SamplerConfig

logger = logging.getLogger(__name__)

CONDITION_WARNING = 1e12


class ProposalUtils:
    """
    Target metric, gradients and the factorized discrete Langevin proposal.

    These kernels are shared by the sampler, the unadjusted baseline and the exact
    transition-matrix oracle. Every function accepts a leading batch axis on ``x`` so
    an ensemble of chains, or all states of a small space, is handled in one call.

    Examples:
        >>> f = ProposalUtils.metric_f(instance, x, tau=1.0)
        >>> grad = ProposalUtils.gradient_f(instance, x, tau=1.0)
        >>> g_eff, a_eff = ProposalUtils.effective_gradient(grad, config, preconditioner)
        >>> table = ProposalUtils.build_proposal(x, g_eff, a_eff, instance.constellation)
        >>> x_prime, log_q = ProposalUtils.sample_proposal(table, rng)
    """

    @staticmethod
    def residual(instance: DetectionInstance, x) -> np.ndarray:
        return instance.y - np.asarray(x, dtype=float) @ instance.H.T

    @staticmethod
    def metric_f(instance: DetectionInstance, x, tau: float = 1.0):
        """
        f(x) = -||y - Hx||^2 / (tau sigma2); tau = 1 is the untempered metric.

        Args:
            instance: Detection problem.
            x: (..., N) states.
            tau: Temperature >= 1.

        Returns:
            float or np.ndarray of shape (...).
        """
        r = ProposalUtils.residual(instance, x)
        return -np.sum(r * r, axis=-1) / (tau * instance.sigma2)

    @staticmethod
    def gradient_f(instance: DetectionInstance, x, tau: float = 1.0) -> np.ndarray:
        """Gradient of the continuous relaxation, (2 / (tau sigma2)) H^T (y - Hx)."""
        r = ProposalUtils.residual(instance, x)
        return (2.0 / (tau * instance.sigma2)) * (r @ instance.H)

    @staticmethod
    def compute_preconditioner(H, gamma_damp: float) -> Preconditioner:
        """
        M = (H^T H + gamma I)^-1 through a Cholesky solve.

        Raises:
            ConfigError: If gamma_damp is not positive.
            KernelError: If the damped Gram matrix cannot be factorized.
        """
        if not gamma_damp > 0:
            raise ConfigError(f"gamma_damp must be positive, got {gamma_damp}")
        H = np.asarray(H, dtype=float)
        n = H.shape[1]
        gram = H.T @ H + gamma_damp * np.eye(n)
        condition = np.linalg.cond(gram)
        if not np.isfinite(condition):
            raise KernelError("Damped Gram matrix is numerically singular")
        if condition > CONDITION_WARNING:
            logger.warning(f"Preconditioner condition number {condition:.3g} is large; consider a larger gamma_damp")
        try:
            m = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), np.eye(n))
        except scipy.linalg.LinAlgError as e:
            raise KernelError(f"Cholesky factorization of H^T H + gamma I failed: {e}") from e
        return Preconditioner(m=0.5 * (m + m.T), gamma_damp=gamma_damp)

    @staticmethod
    def effective_gradient(grad, config: SamplerConfig, preconditioner=None):
        """
        Gradient and step size fed to the proposal kernel.

        Naive mode uses (grad, alpha); preconditioned mode uses
        (M grad / beta, alpha beta), which turns the naive softmax score into the
        preconditioned one without a second kernel.
        """
        if config.mode == "naive":
            return grad, config.alpha
        if preconditioner is None:
            raise ConfigError("Preconditioned mode needs a Preconditioner")
        return (grad @ preconditioner.m) / config.beta, config.alpha * config.beta

    @staticmethod
    def build_proposal(x, grad_effective, alpha_effective: float, constellation: Constellation) -> ProposalTable:
        """
        Per-coordinate softmax over the alphabet of
        score(a) = g_n (a - x_n) / 2 - (a - x_n)^2 / (2 alpha_eff), in the log domain.

        Args:
            x: (..., N) current states.
            grad_effective: (..., N) effective gradient.
            alpha_effective: effective step size.
            constellation: alphabet of every coordinate.

        Returns:
            ProposalTable: probabilities of shape (..., N, Q).
        """
        alphabet = constellation.real_alphabet
        displacement = alphabet - np.asarray(x, dtype=float)[..., None]
        score = 0.5 * np.asarray(grad_effective)[..., None] * displacement - displacement**2 / (2.0 * alpha_effective)
        log_probs = score - logsumexp(score, axis=-1, keepdims=True)
        return ProposalTable(probs=np.exp(log_probs), log_probs=log_probs, alphabet=alphabet)

    @staticmethod
    def log_prob_of_indices(table: ProposalTable, indices) -> np.ndarray:
        """Sum over coordinates of log q_n at the given alphabet indices (broadcasting batch axes)."""
        indices = np.asarray(indices, dtype=np.int64)
        shape = np.broadcast_shapes(table.log_probs.shape[:-1], indices.shape)
        log_probs = np.broadcast_to(table.log_probs, shape + table.log_probs.shape[-1:])
        picked = np.take_along_axis(log_probs, np.broadcast_to(indices, shape)[..., None], axis=-1)[..., 0]
        return picked.sum(axis=-1)

    @staticmethod
    def proposal_log_prob(table: ProposalTable, x_target):
        """
        log q(x_target | x) = sum_n log q_n(x_target[n] | x_n).

        Batch axes of ``table`` and ``x_target`` broadcast, so one table can score
        every state of a space and one target can be scored under many tables.
        """
        x_target = np.asarray(x_target, dtype=float)
        indices = np.argmin(np.abs(x_target[..., None] - table.alphabet), axis=-1)
        return ProposalUtils.log_prob_of_indices(table, indices)

    @staticmethod
    def sample_proposal(table: ProposalTable, rng: np.random.Generator):
        """
        Draw every coordinate independently from its row by inverse-CDF sampling.

        Returns:
            tuple: (x_prime of shape (..., N), joint log-probability of shape (...)).
        """
        cdf = np.cumsum(table.probs, axis=-1)
        u = rng.random(cdf.shape[:-1])
        indices = np.minimum((u[..., None] >= cdf).sum(axis=-1), cdf.shape[-1] - 1)
        x_prime = table.alphabet[indices]
        return x_prime, ProposalUtils.proposal_log_prob(table, x_prime)

    @staticmethod
    def acceptance_probability(f_x, f_xp, log_q_fwd, log_q_rev):
        """
        MH acceptance min{1, exp((f_xp - f_x) + log_q_rev - log_q_fwd)}.

        The ratio is formed in the log domain and exponentiated once.
        """
        log_ratio = (np.asarray(f_xp) - f_x) + (np.asarray(log_q_rev) - log_q_fwd)
        return np.exp(np.minimum(0.0, log_ratio))
