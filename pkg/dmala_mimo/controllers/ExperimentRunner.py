import logging
import time
from dataclasses import replace

import numpy as np

from dmala_mimo.components.BaselineUtils import BaselineUtils
from dmala_mimo.components.ChannelUtils import ChannelUtils
from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.components.DmalaUtils import DmalaUtils
from dmala_mimo.components.LlrUtils import LlrUtils
from dmala_mimo.components.OracleUtils import OracleUtils
from dmala_mimo.models.ExperimentConfig import ExperimentConfig, ResultRecord
from dmala_mimo.models.OracleTables import STATE_SPACE_CAP
from dmala_mimo.models.SampleList import SampleList
from dmala_mimo.models.SamplerConfig import BaselineConfig
from dmala_mimo.utils.PoolUtils import PoolUtils
from dmala_mimo.utils.RngUtils import RngUtils

logger = logging.getLogger(__name__)

# Stream keys under the experiment seed.
INSTANCE_STREAM = 0
CSI_STREAM = 1
SAMPLER_STREAM = 2
ENSEMBLE_STREAM = 3
BASELINE_STREAM = 4

SLOPE_POINTS = 10
SLOPE_FLOOR = 1e-10
SLOPE_TOLERANCE = 1e-2
TRACKING_SIGMAS = 3.0
STRONG_LLR = 2.0
DISPLAY_CUTOFF = 1e-3


class ExperimentRunner:
    """
    The desk-scale experiments. Each ``run_*`` takes a validated ExperimentConfig and
    returns a ResultRecord whose tables and metrics depend only on the config, never
    on ``threads``.

    Every random quantity is drawn from a stream keyed by
    (config.seed, purpose, SNR index, realization), see :class:`RngUtils`. The
    sampler's own ``seed`` field is replaced by such a derived seed.

    Examples:
        >>> config = ConfigUtils.load_experiment_config(experiment="tv_curve")
        >>> record = ExperimentRunner.run_tv_curve(config, threads=4)
        >>> record.metrics["r"]
    """

    @staticmethod
    def _draw(config: ExperimentConfig, constellation, snr_index: int, realization: int):
        snr_db = config.snr_db_list[snr_index]
        rng = RngUtils.stream(config.seed, INSTANCE_STREAM, snr_index, realization)
        csi_rng = RngUtils.stream(config.seed, CSI_STREAM, snr_index, realization)
        seed = RngUtils.derive_seed(config.seed, INSTANCE_STREAM, snr_index, realization)
        return ChannelUtils.draw_instance(config.channel, constellation, snr_db, rng, nmse=config.nmse, csi_rng=csi_rng, seed=seed)

    @staticmethod
    def _sampler(config: ExperimentConfig, *keys, **overrides):
        return replace(config.sampler, seed=RngUtils.derive_seed(config.seed, SAMPLER_STREAM, *keys), **overrides)

    @staticmethod
    def _single_point(config: ExperimentConfig):
        if len(config.snr_db_list) > 1:
            logger.warning(f"{config.experiment} uses one SNR point; ignoring {config.snr_db_list[1:]}")
        return config.snr_db_list[0]

    @staticmethod
    def _record(config: ExperimentConfig, started: float, metrics: dict, table: dict) -> ResultRecord:
        record = ResultRecord(
            experiment=config.experiment,
            config_hash=config.config_hash(),
            seed=config.seed,
            metrics=metrics,
            tables={config.experiment: table},
            wall_clock=time.perf_counter() - started,
        )
        logger.info(f"Finished {config.experiment} in {record.wall_clock:.1f} s")
        return record

    @staticmethod
    def fit_rate(curve, floor=SLOPE_FLOOR, points=SLOPE_POINTS):
        """
        Geometric rate from the slope of log TV over the last ``points`` values above
        ``floor``; None when fewer than three such values exist.
        """
        curve = np.asarray(curve, dtype=float)
        t = np.flatnonzero(curve > floor)
        if t.size < 3:
            return None
        t = t[-points:]
        slope = np.polyfit(t.astype(float), np.log(curve[t]), 1)[0]
        return float(np.exp(slope))

    @staticmethod
    def run_tv_curve(config: ExperimentConfig, threads=1) -> ResultRecord:
        """
        Exact and empirical TV(x^(t), pi) for one channel draw, the spectral rate r and
        the rate fitted from the late-time slope of the exact curve.

        Chains start uniformly, so the exact curve at iteration t is TV(u P^(t-1), pi).
        """
        started = time.perf_counter()
        snr_db = ExperimentRunner._single_point(config)
        logger.info(f"Running tv_curve at {snr_db} dB")
        constellation = ConstellationUtils.build_constellation(config.modulation)
        instance = ExperimentRunner._draw(config, constellation, 0, 0)
        sampler = ExperimentRunner._sampler(config, 0, 0)

        kernel = OracleUtils.build_transition_matrix(instance, sampler, threads=threads)
        posterior = OracleUtils.exact_posterior(instance, sampler.tau)
        eigenvalues = OracleUtils.spectrum(kernel, posterior)
        r = float(np.abs(eigenvalues[1])) if eigenvalues.size > 1 else 0.0

        t_max = sampler.T
        uniform = np.full(kernel.space.size, 1.0 / kernel.space.size)
        tv_exact = np.concatenate([[OracleUtils.tv_distance(uniform, posterior.pi)], OracleUtils.tv_decay_curve(kernel, posterior, uniform, t_max - 1)])
        rng = RngUtils.stream(config.seed, ENSEMBLE_STREAM, 0, 0)
        histograms = OracleUtils.empirical_trajectory(instance, sampler, sampler.n_chains, t_max, rng=rng)
        tv_empirical = np.array([OracleUtils.tv_distance(h, posterior.pi) for h in histograms])
        noise_floor = np.array([OracleUtils.tv_noise_floor(h, sampler.n_chains) for h in histograms])

        r_slope = ExperimentRunner.fit_rate(tv_exact)
        slope_agrees = r_slope is not None and abs(r_slope - r) <= SLOPE_TOLERANCE
        if not slope_agrees:
            logger.warning(f"Late-time TV slope rate {r_slope} disagrees with spectral rate {r:.4f}")
        tracking = np.abs(tv_empirical - tv_exact) <= TRACKING_SIGMAS * np.maximum(noise_floor, 1.0 / sampler.n_chains)

        metrics = {
            "snr_db": snr_db,
            "n_states": kernel.space.size,
            "r": r,
            "eigenvalues": np.real(eigenvalues).tolist(),
            "r_slope": r_slope,
            "slope_agrees": bool(slope_agrees),
            "tracking_fraction": float(np.mean(tracking)),
            "detailed_balance": OracleUtils.detailed_balance_check(kernel, posterior),
            "stationarity_error": OracleUtils.stationarity_error(kernel, posterior),
            "instance": instance.to_dict(),
        }
        table = {
            "t": list(range(1, t_max + 1)),
            "tv_exact": tv_exact.tolist(),
            "tv_empirical": tv_empirical.tolist(),
            "noise_floor": noise_floor.tolist(),
        }
        return ExperimentRunner._record(config, started, metrics, table)

    @staticmethod
    def _five_numbers(values):
        q = np.percentile(values, [0, 25, 50, 75, 100])
        return dict(zip(("min", "q1", "median", "q3", "max"), (float(v) for v in q)))

    @staticmethod
    def run_rate_boxplot(config: ExperimentConfig, threads=1) -> ResultRecord:
        """Spectral rate r of naive and preconditioned DMALA per SNR over independent channels."""
        started = time.perf_counter()
        constellation = ConstellationUtils.build_constellation(config.modulation)
        modes = ("naive", "preconditioned")

        def one_realization(task):
            snr_index, realization = task
            instance = ExperimentRunner._draw(config, constellation, snr_index, realization)
            posterior = OracleUtils.exact_posterior(instance, config.sampler.tau)
            rates = {}
            for mode in modes:
                sampler = ExperimentRunner._sampler(config, snr_index, realization, mode=mode)
                kernel = OracleUtils.build_transition_matrix(instance, sampler)
                rates[mode] = OracleUtils.convergence_rate(kernel, posterior)
            logger.debug(f"Realization {realization} at {config.snr_db_list[snr_index]} dB: {rates}")
            return rates

        table = {"snr_db": [], "realization": [], "mode": [], "r": []}
        summaries = []
        for snr_index, snr_db in enumerate(config.snr_db_list):
            logger.info(f"Running rate_boxplot at {snr_db} dB")
            tasks = [(snr_index, realization) for realization in range(config.n_realizations)]
            results = PoolUtils.map_ordered(one_realization, tasks, threads, "convergence rates")
            for mode in modes:
                rates = [result[mode] for result in results]
                for realization, r in enumerate(rates):
                    table["snr_db"].append(snr_db)
                    table["realization"].append(realization)
                    table["mode"].append(mode)
                    table["r"].append(r)
                summaries.append({"snr_db": snr_db, "mode": mode, **ExperimentRunner._five_numbers(rates)})

        medians = {(s["mode"], s["snr_db"]): s["median"] for s in summaries}
        low, high = min(config.snr_db_list), max(config.snr_db_list)
        metrics = {
            "summaries": summaries,
            "naive_stalls": medians[("naive", high)] > medians[("naive", low)],
            "preconditioned_not_worse": {str(snr): medians[("preconditioned", snr)] <= medians[("naive", snr)] for snr in config.snr_db_list},
        }
        return ExperimentRunner._record(config, started, metrics, table)

    @staticmethod
    def _symbol_errors(x_hat, x_true, constellation, nt: int):
        wrong = ConstellationUtils.nearest_indices(x_hat, constellation) != ConstellationUtils.nearest_indices(x_true, constellation)
        symbols = wrong[:nt] | wrong[nt:]
        bits = LlrUtils.bit_errors(ConstellationUtils.demap_bits(x_hat, constellation), ConstellationUtils.demap_bits(x_true, constellation))
        return int(symbols.sum()), bits, int(symbols.any())

    @staticmethod
    def run_ser_sweep(config: ExperimentConfig, threads=1) -> ResultRecord:
        """
        Uncoded symbol, bit and vector error rates per SNR and detector, with a fresh
        channel per vector. The exhaustive MAP detector is added when Q^N fits the
        oracle cap. Detectors see the estimated channel when ``nmse`` is set.
        """
        started = time.perf_counter()
        constellation = ConstellationUtils.build_constellation(config.modulation)
        nt = config.channel.nt
        detectors = list(config.detectors)
        if constellation.q ** (2 * nt) <= STATE_SPACE_CAP:
            detectors.append("map")

        def one_vector(task):
            snr_index, vector = task
            instance = ExperimentRunner._draw(config, constellation, snr_index, vector)
            sampler = ExperimentRunner._sampler(config, snr_index, vector)
            errors = {}
            for detector in detectors:
                if detector == "dmala":
                    rng = RngUtils.stream(sampler.seed)
                    x_hat = LlrUtils.hard_decision(DmalaUtils.sample_ensemble(instance, sampler, rng, config.pool_burn_in), instance)
                elif detector == "map":
                    x_hat = OracleUtils.exact_map(instance)
                else:
                    baseline = BaselineConfig(
                        kind=detector,
                        T=sampler.T,
                        n_chains=sampler.n_chains,
                        seed=RngUtils.derive_seed(config.seed, BASELINE_STREAM, snr_index, vector),
                    )
                    x_hat = BaselineUtils.detect(instance, baseline, sampler)
                errors[detector] = ExperimentRunner._symbol_errors(x_hat, instance.true_x, constellation, nt)
            return errors

        table = {"snr_db": [], "detector": [], "ser": [], "ber": [], "ver": [], "n_vectors": []}
        n = config.n_symbol_vectors
        bits_per_vector = 2 * nt * constellation.bits_per_real_symbol
        for snr_index, snr_db in enumerate(config.snr_db_list):
            logger.info(f"Running ser_sweep at {snr_db} dB over {n} vectors")
            results = PoolUtils.map_ordered(one_vector, [(snr_index, v) for v in range(n)], threads, "symbol vectors")
            for detector in detectors:
                symbols, bits, vectors = (sum(result[detector][i] for result in results) for i in range(3))
                table["snr_db"].append(snr_db)
                table["detector"].append(detector)
                table["ser"].append(symbols / (n * nt))
                table["ber"].append(bits / (n * bits_per_vector))
                table["ver"].append(vectors / n)
                table["n_vectors"].append(n)

        metrics = {
            detector: {"ser": [s for s, d in zip(table["ser"], table["detector"]) if d == detector], "snr_db": list(config.snr_db_list)}
            for detector in detectors
        }
        return ExperimentRunner._record(config, started, metrics, table)

    @staticmethod
    def run_llr_fidelity(config: ExperimentConfig, threads=1) -> ResultRecord:
        """
        IS and list LLRs against the exact LLRs for every list size S.

        One ensemble of max(S) chains is run per realization; the list of size S is
        the samples of its first S chains, so the lists are nested.
        """
        started = time.perf_counter()
        constellation = ConstellationUtils.build_constellation(config.modulation)
        sizes = sorted(config.list_sizes)
        per_chain = 1 if config.pool_burn_in is None else config.sampler.T - config.pool_burn_in

        def one_realization(task):
            snr_index, realization = task
            instance = ExperimentRunner._draw(config, constellation, snr_index, realization)
            exact = OracleUtils.exact_llr(instance, config.llr_clip).llrs
            sampler = ExperimentRunner._sampler(config, snr_index, realization, n_chains=sizes[-1])
            samples = DmalaUtils.sample_ensemble(instance, sampler, RngUtils.stream(sampler.seed), config.pool_burn_in)
            strong = np.abs(exact) > STRONG_LLR
            outcome = {}
            for size in sizes:
                subset = SampleList(samples.samples[: size * per_chain], samples.f_values[: size * per_chain], samples.source_tau)
                for estimator, llr in (
                    ("is", LlrUtils.llr_is(subset, instance, sampler.tau, config.llr_clip)),
                    ("list", LlrUtils.llr_list(subset, instance, config.llr_clip)),
                ):
                    agree = np.sign(llr.llrs[strong]) == np.sign(exact[strong])
                    outcome[(estimator, size)] = (np.abs(llr.llrs - exact), int(agree.sum()), int(strong.sum()))
            return outcome

        table = {"snr_db": [], "estimator": [], "list_size": [], "mean_abs_error": [], "median_abs_error": [], "sign_agreement": []}
        for snr_index, snr_db in enumerate(config.snr_db_list):
            logger.info(f"Running llr_fidelity at {snr_db} dB over {config.n_realizations} realizations")
            tasks = [(snr_index, realization) for realization in range(config.n_realizations)]
            results = PoolUtils.map_ordered(one_realization, tasks, threads, "LLR realizations")
            for estimator in ("is", "list"):
                for size in sizes:
                    errors = np.concatenate([result[(estimator, size)][0] for result in results])
                    agreed = sum(result[(estimator, size)][1] for result in results)
                    strong = sum(result[(estimator, size)][2] for result in results)
                    table["snr_db"].append(snr_db)
                    table["estimator"].append(estimator)
                    table["list_size"].append(size)
                    table["mean_abs_error"].append(float(np.mean(errors)))
                    table["median_abs_error"].append(float(np.median(errors)))
                    table["sign_agreement"].append(agreed / strong if strong else float("nan"))

        def column(name, estimator, snr_db):
            return np.array([v for v, e, s in zip(table[name], table["estimator"], table["snr_db"]) if e == estimator and s == snr_db])

        # The list median collapses to zero once the list covers the support; its
        # failures are bits whose minority value is missing, which only the mean sees.
        metrics = {
            "list_sizes": sizes,
            "is_error_decreasing": {str(snr): bool(np.all(np.diff(column("median_abs_error", "is", snr)) < 0)) for snr in config.snr_db_list},
            "is_not_worse_than_list": {
                str(snr): bool(np.all(column("mean_abs_error", "is", snr) <= column("mean_abs_error", "list", snr))) for snr in config.snr_db_list
            },
            "is_median_not_worse_than_list": {
                str(snr): bool(np.all(column("median_abs_error", "is", snr) <= column("median_abs_error", "list", snr))) for snr in config.snr_db_list
            },
            "is_sign_agreement": {str(snr): float(column("sign_agreement", "is", snr)[-1]) for snr in config.snr_db_list},
        }
        return ExperimentRunner._record(config, started, metrics, table)

    @staticmethod
    def run_dist_histogram(config: ExperimentConfig, threads=1) -> ResultRecord:
        """
        Exact posterior against the DMALA and unadjusted ensemble histograms at
        iteration T, plus the exact stationary distribution of the unadjusted kernel.
        """
        started = time.perf_counter()
        snr_db = ExperimentRunner._single_point(config)
        logger.info(f"Running dist_histogram at {snr_db} dB")
        constellation = ConstellationUtils.build_constellation(config.modulation)
        instance = ExperimentRunner._draw(config, constellation, 0, 0)
        sampler = ExperimentRunner._sampler(config, 0, 0)
        posterior = OracleUtils.exact_posterior(instance, sampler.tau)

        histograms = {}
        for key, kind in enumerate(("dmala", "unadjusted_dla")):
            rng = RngUtils.stream(config.seed, ENSEMBLE_STREAM, 0, key)
            histograms[kind] = OracleUtils.empirical_distribution(instance, sampler, sampler.n_chains, sampler.T, kind=kind, rng=rng)
        unadjusted_kernel = OracleUtils.build_transition_matrix(instance, sampler, kind="unadjusted_dla", threads=threads)
        unadjusted_stationary = OracleUtils.stationary_distribution(unadjusted_kernel)

        bits = ConstellationUtils.demap_bits(posterior.space.values, constellation)
        labels = ["".join("1" if b > 0 else "0" for b in row) for row in bits]
        metrics = {
            "snr_db": snr_db,
            "t": sampler.T,
            "n_chains": sampler.n_chains,
            "tv_dmala": OracleUtils.tv_distance(histograms["dmala"], posterior.pi),
            "tv_unadjusted_dla": OracleUtils.tv_distance(histograms["unadjusted_dla"], posterior.pi),
            "tv_unadjusted_stationary": OracleUtils.tv_distance(unadjusted_stationary, posterior.pi),
            "noise_floor": OracleUtils.tv_noise_floor(posterior.pi, sampler.n_chains),
            "instance": instance.to_dict(),
        }
        table = {
            "state": list(range(posterior.space.size)),
            "label": labels,
            "pi": posterior.pi.tolist(),
            "dmala": histograms["dmala"].tolist(),
            "unadjusted_dla": histograms["unadjusted_dla"].tolist(),
            "below_cutoff": (posterior.pi < DISPLAY_CUTOFF).astype(int).tolist(),
        }
        return ExperimentRunner._record(config, started, metrics, table)
