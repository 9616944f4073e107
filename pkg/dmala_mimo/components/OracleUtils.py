import logging

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from dmala_mimo.components.BaselineUtils import BaselineUtils
from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.components.DmalaUtils import DmalaUtils
from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.exceptions.DmalaError import ConfigError, KernelError, OracleCapExceededError
from dmala_mimo.models.DetectionInstance import DetectionInstance
from dmala_mimo.models.OracleTables import STATE_SPACE_CAP, PosteriorTable, StateSpace, TransitionMatrix
from dmala_mimo.models.SampleList import DEFAULT_LLR_CLIP, LlrVector
from dmala_mimo.models.SamplerConfig import ProposalTable, SamplerConfig
from dmala_mimo.utils.PoolUtils import PoolUtils
from dmala_mimo.utils.RngUtils import RngUtils

logger = logging.getLogger(__name__)

KERNEL_KINDS = ("dmala", "unadjusted_dla")
REVERSIBILITY_TOLERANCE = 1e-9
LEADING_EIGENVALUE_TOLERANCE = 1e-8


class OracleUtils:
    """
    Brute-force ground truth over the whole state space A^N (Q^N <= 65536).

    States are enumerated in mixed-radix order with coordinate 0 most significant.
    Transition matrices reuse the sampler's own proposal and acceptance kernels, so
    every property checked here certifies the production code path.

    Examples:
        >>> posterior = OracleUtils.exact_posterior(instance)
        >>> kernel = OracleUtils.build_transition_matrix(instance, SamplerConfig(mode="naive"))
        >>> r = OracleUtils.convergence_rate(kernel, posterior)
        >>> curve = OracleUtils.tv_decay_curve(kernel, posterior, start=0, t_max=100)
    """

    @staticmethod
    def state_space(instance: DetectionInstance) -> StateSpace:
        """
        Raises:
            OracleCapExceededError: If Q^N exceeds 65536.
        """
        q, n = instance.Q, instance.N
        size = q**n
        if size > STATE_SPACE_CAP:
            raise OracleCapExceededError(f"State space Q^N = {q}^{n} = {size} exceeds the oracle cap {STATE_SPACE_CAP}")
        indices = np.stack(np.unravel_index(np.arange(size), (q,) * n), axis=-1).astype(np.int64)
        return StateSpace(indices=indices, values=instance.constellation.real_alphabet[indices], q=q)

    @staticmethod
    def exact_posterior(instance: DetectionInstance, tau: float = 1.0) -> PosteriorTable:
        """exp(f(x) / tau) normalized over every state, in the log domain."""
        space = OracleUtils.state_space(instance)
        f = ProposalUtils.metric_f(instance, space.values, tau)
        log_pi = f - logsumexp(f)
        return PosteriorTable(pi=np.exp(log_pi), log_pi=log_pi, space=space)

    @staticmethod
    def exact_llr(instance: DetectionInstance, clip=DEFAULT_LLR_CLIP) -> LlrVector:
        """Per-bit MAP LLRs from subset sums of the exact posterior."""
        posterior = OracleUtils.exact_posterior(instance)
        bits = ConstellationUtils.demap_bits(posterior.space.values, instance.constellation)
        log_pi = posterior.log_pi[:, None]
        numerator = logsumexp(np.where(bits > 0, log_pi, -np.inf), axis=0)
        denominator = logsumexp(np.where(bits < 0, log_pi, -np.inf), axis=0)
        return LlrVector(llrs=np.clip(numerator - denominator, -clip, clip), clip=clip)

    @staticmethod
    def exact_map(instance: DetectionInstance) -> np.ndarray:
        """Exhaustive MAP hard decision, arg max of the posterior (first state on ties)."""
        posterior = OracleUtils.exact_posterior(instance)
        return posterior.space.values[int(np.argmax(posterior.log_pi))].copy()

    @staticmethod
    def build_transition_matrix(instance: DetectionInstance, config: SamplerConfig, kind="dmala", threads=1) -> TransitionMatrix:
        """
        Dense kernel of the DMALA chain (or of the unadjusted chain, whose kernel is
        the proposal itself).

        Off-diagonal entries are q(x'|x) A(x'|x); the diagonal is the complement of
        the row so every row sums to one exactly.

        Args:
            instance: Detection problem at oracle scale.
            config: Sampler settings (mode, step parameters, temperature).
            kind: "dmala" or "unadjusted_dla".
            threads: Worker threads over rows.

        Raises:
            OracleCapExceededError: If the space is too large.
            KernelError: If a row's off-diagonal mass exceeds one.
        """
        if kind not in KERNEL_KINDS:
            raise ConfigError(f"Unsupported kernel kind '{kind}', expected one of {KERNEL_KINDS}")
        space = OracleUtils.state_space(instance)
        resolved, preconditioner = DmalaUtils.prepare(instance, config)
        states = DmalaUtils.state_at(instance, resolved, space.values, preconditioner)

        def row(i):
            table_i = ProposalTable(states.proposal.probs[i], states.proposal.log_probs[i], states.proposal.alphabet)
            log_fwd = ProposalUtils.log_prob_of_indices(table_i, space.indices)
            p_row = np.exp(log_fwd)
            if kind == "dmala":
                log_rev = ProposalUtils.log_prob_of_indices(states.proposal, space.indices[i])
                p_row = p_row * ProposalUtils.acceptance_probability(states.f_x[i], states.f_x, log_fwd, log_rev)
            p_row[i] = 0.0
            p_row[i] = 1.0 - p_row.sum()
            return p_row

        p = np.stack(PoolUtils.map_ordered(row, range(space.size), threads, "transition matrix rows"))
        if np.any(np.diag(p) < -1e-12):
            raise KernelError("Off-diagonal transition mass exceeds one")
        return TransitionMatrix(p=p, space=space, kind=kind)

    @staticmethod
    def build_gibbs_matrix(instance: DetectionInstance, tau: float = 1.0) -> TransitionMatrix:
        """Systematic-scan Gibbs kernel: the product of the N single-site kernels in scan order."""
        space = OracleUtils.state_space(instance)
        q = space.q
        radix = q ** np.arange(instance.N - 1, -1, -1, dtype=np.int64)
        own = np.arange(space.size)
        p = np.eye(space.size)
        for n in range(instance.N):
            conditional = BaselineUtils.full_conditional(instance, space.values, n, tau)
            base = own - space.indices[:, n] * radix[n]
            targets = base[:, None] + np.arange(q)[None, :] * radix[n]
            site = np.zeros((space.size, space.size))
            site[own[:, None], targets] = conditional
            p = p @ site
        return TransitionMatrix(p=p, space=space, kind="gibbs")

    @staticmethod
    def _matrix(p) -> np.ndarray:
        return p.p if isinstance(p, TransitionMatrix) else np.asarray(p, dtype=float)

    @staticmethod
    def _distribution(pi) -> np.ndarray:
        return pi.pi if isinstance(pi, PosteriorTable) else np.asarray(pi, dtype=float)

    @staticmethod
    def detailed_balance_check(p, pi) -> float:
        """max over pairs of |pi(x) P(x'|x) - pi(x') P(x|x')|."""
        flux = OracleUtils._distribution(pi)[:, None] * OracleUtils._matrix(p)
        return float(np.max(np.abs(flux - flux.T)))

    @staticmethod
    def stationary_distribution(p) -> np.ndarray:
        """Left eigenvector of P for the eigenvalue closest to one, normalized to sum one."""
        eigenvalues, vectors = scipy.linalg.eig(OracleUtils._matrix(p).T)
        # The Perron vector has entries of one sign.
        v = np.abs(np.real(vectors[:, int(np.argmin(np.abs(eigenvalues - 1.0)))]))
        return v / v.sum()

    @staticmethod
    def stationarity_error(p, pi) -> float:
        """||pi P - pi||_inf."""
        pi = OracleUtils._distribution(pi)
        return float(np.max(np.abs(pi @ OracleUtils._matrix(p) - pi)))

    @staticmethod
    def spectrum(p, pi=None) -> np.ndarray:
        """
        Eigenvalues of P sorted by decreasing modulus.

        When P is reversible with respect to ``pi`` the similarity transform
        D^{1/2} P D^{-1/2}, D = diag(pi), is symmetric and ``eigh`` gives a real
        spectrum. Otherwise the general eigensolver is used.

        Raises:
            KernelError: If the leading eigenvalue differs from one by more than 1e-8.
        """
        matrix = OracleUtils._matrix(p)
        if pi is not None:
            pi = OracleUtils._distribution(pi)
            if np.all(pi > 0) and OracleUtils.detailed_balance_check(matrix, pi) <= REVERSIBILITY_TOLERANCE:
                root = np.sqrt(pi)
                symmetric = root[:, None] * matrix / root[None, :]
                eigenvalues = scipy.linalg.eigh(0.5 * (symmetric + symmetric.T), eigvals_only=True)
            else:
                logger.warning("Kernel is not reversible for the given distribution; using the general eigensolver")
                eigenvalues = scipy.linalg.eigvals(matrix)
        else:
            eigenvalues = scipy.linalg.eigvals(matrix)
        if np.iscomplexobj(eigenvalues) and np.all(np.abs(eigenvalues.imag) < 1e-12):
            eigenvalues = eigenvalues.real
        eigenvalues = eigenvalues[np.argsort(-np.abs(eigenvalues), kind="stable")]
        if abs(eigenvalues[0] - 1.0) > LEADING_EIGENVALUE_TOLERANCE:
            raise KernelError(f"Leading eigenvalue {eigenvalues[0]} differs from 1")
        return eigenvalues

    @staticmethod
    def convergence_rate(p, pi=None) -> float:
        """Second-largest eigenvalue modulus r of P; 0 for a single-state space."""
        eigenvalues = OracleUtils.spectrum(p, pi)
        if eigenvalues.size < 2:
            return 0.0
        return float(np.abs(eigenvalues[1]))

    @staticmethod
    def tv_distance(p1, p2) -> float:
        return float(0.5 * np.sum(np.abs(np.asarray(p1, dtype=float) - np.asarray(p2, dtype=float))))

    @staticmethod
    def tv_decay_curve(p, pi, start, t_max: int) -> np.ndarray:
        """
        TV(mu P^t, pi) for t = 1..t_max by iterated row-vector products.

        Args:
            p: Kernel.
            pi: Target distribution.
            start: A state index (mu is a point mass) or a start distribution mu.
            t_max: Number of steps.
        """
        matrix = OracleUtils._matrix(p)
        pi = OracleUtils._distribution(pi)
        if np.ndim(start) == 0:
            mu = np.zeros(matrix.shape[0])
            mu[int(start)] = 1.0
        else:
            mu = np.asarray(start, dtype=float)
        curve = np.empty(t_max)
        for t in range(t_max):
            mu = mu @ matrix
            curve[t] = OracleUtils.tv_distance(mu, pi)
        return curve

    @staticmethod
    def _ensemble_step(kind):
        if kind == "dmala":
            return DmalaUtils.dmala_step
        if kind == "unadjusted_dla":
            return BaselineUtils.unadjusted_dla_step
        raise ConfigError(f"Unsupported kernel kind '{kind}', expected one of {KERNEL_KINDS}")

    @staticmethod
    def empirical_trajectory(instance: DetectionInstance, config: SamplerConfig, n_chains: int, t_max: int, kind="dmala", rng=None) -> np.ndarray:
        """
        State histograms of a lock-step ensemble at every iteration.

        Row t - 1 is the distribution of x^(t); row 0 is the initialization.

        Returns:
            np.ndarray: (t_max, Q^N) normalized histograms.
        """
        space = OracleUtils.state_space(instance)
        rng = rng if rng is not None else RngUtils.stream(config.seed)
        histograms = np.empty((t_max, space.size))

        def record(t, state):
            states = space.index_of(ConstellationUtils.nearest_indices(state.x, instance.constellation))
            histograms[t - 1] = np.bincount(states, minlength=space.size) / n_chains

        DmalaUtils.run_ensemble(instance, config, n_chains, t_max, rng, step=OracleUtils._ensemble_step(kind), on_step=record)
        return histograms

    @staticmethod
    def empirical_distribution(instance: DetectionInstance, config: SamplerConfig, n_chains: int, t: int, kind="dmala", rng=None) -> np.ndarray:
        """Histogram of x^(t) over ``n_chains`` independent chains."""
        space = OracleUtils.state_space(instance)
        rng = rng if rng is not None else RngUtils.stream(config.seed)
        state = DmalaUtils.run_ensemble(instance, config, n_chains, t, rng, step=OracleUtils._ensemble_step(kind))
        states = space.index_of(ConstellationUtils.nearest_indices(state.x, instance.constellation))
        return np.bincount(states, minlength=space.size) / n_chains

    @staticmethod
    def tv_noise_floor(p, n: int) -> float:
        """1/2 sum sqrt(p (1 - p) / n): binomial standard scale of an n-sample histogram's TV."""
        p = np.asarray(p, dtype=float)
        return float(0.5 * np.sum(np.sqrt(np.clip(p * (1.0 - p), 0.0, None) / n)))
