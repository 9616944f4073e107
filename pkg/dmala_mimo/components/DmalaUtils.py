import logging

import numpy as np

from dmala_mimo.components.ProposalUtils import ProposalUtils
from dmala_mimo.exceptions.DmalaError import ConfigError
from dmala_mimo.models.DetectionInstance import DetectionInstance
from dmala_mimo.models.SampleList import SampleList
from dmala_mimo.models.SamplerConfig import ChainState, ChainTrace, ProposalTable, SamplerConfig
from dmala_mimo.utils.PoolUtils import PoolUtils
from dmala_mimo.utils.RngUtils import RngUtils

logger = logging.getLogger(__name__)

RECORD_MODES = ("final_only", "trajectory")


class DmalaUtils:
    """
    The DMALA chain: gradient-informed factorized proposal plus MH correction.

    A chain state caches f(x), the gradient and the forward proposal table at x. A
    step samples every coordinate in parallel from the cached table, builds the
    reverse table at the candidate and accepts with the MH probability. Rejected
    moves keep the old caches and accepted ones install the candidate's, so each
    step evaluates the metric, gradient and proposal exactly once.

    States may carry a leading batch axis; the same step then advances a lock-step
    ensemble of independent chains (see :meth:`run_ensemble`).

    Examples:
        >>> config = SamplerConfig(T=100, n_chains=16, seed=2024)
        >>> samples = DmalaUtils.run_parallel_chains(instance, config)
        >>> trace = DmalaUtils.run_chain(instance, config.resolve(instance), rng, record="trajectory")
    """

    @staticmethod
    def prepare(instance: DetectionInstance, config: SamplerConfig):
        """
        Resolve the instance-dependent defaults and build the preconditioner once.

        Returns:
            tuple: (resolved SamplerConfig, Preconditioner or None in naive mode).
        """
        resolved = config.resolve(instance)
        preconditioner = None
        if resolved.mode == "preconditioned":
            preconditioner = ProposalUtils.compute_preconditioner(instance.H, resolved.gamma_damp)
        return resolved, preconditioner

    @staticmethod
    def state_at(instance: DetectionInstance, config: SamplerConfig, x, preconditioner=None, accept_count=0) -> ChainState:
        """Build a consistent ChainState (metric, gradient and forward table) at ``x``."""
        x = np.array(x, dtype=float)
        f_x = ProposalUtils.metric_f(instance, x, config.tau)
        grad = ProposalUtils.gradient_f(instance, x, config.tau)
        g_eff, a_eff = ProposalUtils.effective_gradient(grad, config, preconditioner)
        proposal = ProposalUtils.build_proposal(x, g_eff, a_eff, instance.constellation)
        if x.ndim == 1:
            f_x = float(f_x)
        return ChainState(x=x, f_x=f_x, grad=grad, proposal=proposal, accept_count=accept_count)

    @staticmethod
    def init_state(instance: DetectionInstance, config: SamplerConfig, rng: np.random.Generator, preconditioner=None, batch=None) -> ChainState:
        """
        Initial state x^(1): uniform over A^N, or the MMSE estimate snapped to the
        alphabet when ``config.init == "mmse"``.

        Args:
            batch (int, optional): Number of independent chains sharing ``rng``.
        """
        shape = (instance.N,) if batch is None else (batch, instance.N)
        if config.init == "mmse":
            from dmala_mimo.components.BaselineUtils import BaselineUtils

            _, x_hat = BaselineUtils.mmse_detect(instance)
            x = np.broadcast_to(x_hat, shape)
        else:
            x = instance.constellation.real_alphabet[rng.integers(0, instance.Q, size=shape)]
        accept_count = 0 if batch is None else np.zeros(batch, dtype=np.int64)
        return DmalaUtils.state_at(instance, config, x, preconditioner, accept_count)

    @staticmethod
    def dmala_step(state: ChainState, instance: DetectionInstance, config: SamplerConfig, rng: np.random.Generator, preconditioner=None):
        """
        One MH-adjusted discrete Langevin transition.

        ``config`` must be resolved (:meth:`SamplerConfig.resolve`); in preconditioned
        mode ``preconditioner`` must be supplied.

        Returns:
            tuple: (new ChainState, accepted flag or per-chain flag array).
        """
        x_prime, log_q_fwd = ProposalUtils.sample_proposal(state.proposal, rng)
        candidate = DmalaUtils.state_at(instance, config, x_prime, preconditioner)
        log_q_rev = ProposalUtils.proposal_log_prob(candidate.proposal, state.x)
        acceptance = ProposalUtils.acceptance_probability(state.f_x, candidate.f_x, log_q_fwd, log_q_rev)

        if not state.batched:
            accepted = bool(rng.random() < acceptance)
            if accepted:
                return ChainState(candidate.x, candidate.f_x, candidate.grad, candidate.proposal, state.accept_count + 1), True
            return state, False

        accepted = rng.random(acceptance.shape) < acceptance
        row = accepted[:, None]
        table = accepted[:, None, None]
        proposal = ProposalTable(
            probs=np.where(table, candidate.proposal.probs, state.proposal.probs),
            log_probs=np.where(table, candidate.proposal.log_probs, state.proposal.log_probs),
            alphabet=state.proposal.alphabet,
        )
        new_state = ChainState(
            x=np.where(row, candidate.x, state.x),
            f_x=np.where(accepted, candidate.f_x, state.f_x),
            grad=np.where(row, candidate.grad, state.grad),
            proposal=proposal,
            accept_count=state.accept_count + accepted,
        )
        return new_state, accepted

    @staticmethod
    def run_chain(instance: DetectionInstance, config: SamplerConfig, rng: np.random.Generator, record="final_only", preconditioner=None, step=None) -> ChainTrace:
        """
        Run one chain for T iterations (initialization plus T - 1 steps).

        Args:
            instance: Detection problem.
            config: Sampler settings; unresolved parameters are resolved here.
            rng: The chain's own generator.
            record: "final_only" keeps the last state, "trajectory" every state.
            preconditioner: Reused when given, otherwise built from ``config``.
            step (callable, optional): Transition with the signature of
                :meth:`dmala_step`. Defaults to :meth:`dmala_step`.

        Returns:
            ChainTrace: states, tempered f values and the T - 1 accept flags.
        """
        if record not in RECORD_MODES:
            raise ConfigError(f"Unsupported record mode '{record}', expected one of {RECORD_MODES}")
        if preconditioner is None:
            config, preconditioner = DmalaUtils.prepare(instance, config)
        else:
            config = config.resolve(instance)

        step = step or DmalaUtils.dmala_step
        state = DmalaUtils.init_state(instance, config, rng, preconditioner)
        keep_all = record == "trajectory"
        samples = [state.x] if keep_all else None
        f_values = [state.f_x] if keep_all else None
        accepted = np.zeros(config.T - 1, dtype=bool)
        for t in range(config.T - 1):
            state, accepted[t] = step(state, instance, config, rng, preconditioner)
            if keep_all:
                samples.append(state.x)
                f_values.append(state.f_x)
        if not keep_all:
            samples, f_values = [state.x], [state.f_x]
        return ChainTrace(samples=np.array(samples), f_values=np.array(f_values, dtype=float), accepted=accepted)

    @staticmethod
    def run_parallel_chains(instance: DetectionInstance, config: SamplerConfig, burn_in=None, threads=1) -> SampleList:
        """
        Run ``n_chains`` independent chains and collect their samples.

        Chain i draws from the stream (config.seed, i), so the list is identical for
        any thread count or execution order.

        Args:
            instance: Detection problem.
            config: Sampler settings.
            burn_in (int, optional): When set, pool every state after the first
                ``burn_in`` iterations of each chain instead of the final state only.
            threads (int, optional): Worker threads. Defaults to 1.

        Returns:
            SampleList: samples in chain order with untempered metrics.

        Raises:
            ConfigError: If ``burn_in`` leaves no samples.
        """
        if burn_in is not None and not 0 <= burn_in < config.T:
            raise ConfigError(f"burn_in must be in [0, T), got {burn_in} with T={config.T}")
        resolved, preconditioner = DmalaUtils.prepare(instance, config)
        record = "final_only" if burn_in is None else "trajectory"

        def one_chain(chain_index):
            rng = RngUtils.chain_rng(resolved.seed, chain_index)
            return DmalaUtils.run_chain(instance, resolved, rng, record=record, preconditioner=preconditioner)

        traces = PoolUtils.map_ordered(one_chain, range(resolved.n_chains), threads, "DMALA chains")
        if burn_in is None:
            samples = np.stack([trace.final for trace in traces])
        else:
            samples = np.concatenate([trace.samples[burn_in:] for trace in traces])
        logger.debug(f"DMALA acceptance rate {np.mean([trace.acceptance_rate for trace in traces]):.3f} over {resolved.n_chains} chains")
        return SampleList(samples=samples, f_values=ProposalUtils.metric_f(instance, samples, 1.0), source_tau=resolved.tau)

    @staticmethod
    def run_ensemble(instance: DetectionInstance, config: SamplerConfig, n_chains: int, steps: int, rng: np.random.Generator, step=None, on_step=None) -> ChainState:
        """
        Advance ``n_chains`` independent chains in lock-step with vectorized kernels.

        Args:
            instance: Detection problem.
            config: Sampler settings (T is ignored in favor of ``steps``).
            n_chains: Ensemble size.
            steps: Number of states per chain, counting the initialization.
            rng: One generator for the whole ensemble.
            step (callable, optional): Transition with the signature of
                :meth:`dmala_step`. Defaults to :meth:`dmala_step`.
            on_step (callable, optional): Called as ``on_step(t, state)`` for
                t = 1..steps, t = 1 being the initialization.

        Returns:
            ChainState: Final batched state.
        """
        if steps < 1 or n_chains < 1:
            raise ConfigError(f"steps and n_chains must be >= 1, got steps={steps}, n_chains={n_chains}")
        step = step or DmalaUtils.dmala_step
        config, preconditioner = DmalaUtils.prepare(instance, config)
        state = DmalaUtils.init_state(instance, config, rng, preconditioner, batch=n_chains)
        if on_step is not None:
            on_step(1, state)
        for t in range(2, steps + 1):
            state, _ = step(state, instance, config, rng, preconditioner)
            if on_step is not None:
                on_step(t, state)
        return state

    @staticmethod
    def sample_ensemble(instance: DetectionInstance, config: SamplerConfig, rng=None, burn_in=None) -> SampleList:
        """
        ``config.n_chains`` chains of T iterations run as one lock-step ensemble.

        The vectorized counterpart of :meth:`run_parallel_chains` for large chain
        counts. All chains share one stream (default: derived from ``config.seed``),
        so the output is deterministic but differs from the per-chain-seeded path.
        Samples are chain-major: the first k chains' samples form a prefix.

        Args:
            burn_in (int, optional): Pool every state after the first ``burn_in``
                iterations instead of the final state only.
        """
        if burn_in is not None and not 0 <= burn_in < config.T:
            raise ConfigError(f"burn_in must be in [0, T), got {burn_in} with T={config.T}")
        rng = rng if rng is not None else RngUtils.stream(config.seed)
        pooled = []

        def collect(t, state):
            if burn_in is not None and t > burn_in:
                pooled.append(state.x)

        state = DmalaUtils.run_ensemble(instance, config, config.n_chains, config.T, rng, on_step=collect)
        samples = state.x if burn_in is None else np.stack(pooled, axis=1).reshape(-1, instance.N)
        logger.debug(f"DMALA ensemble acceptance rate {np.mean(state.accept_count) / max(config.T - 1, 1):.3f}")
        return SampleList(samples=samples, f_values=ProposalUtils.metric_f(instance, samples, 1.0), source_tau=config.tau)
