from dmala_mimo.controllers.ExperimentRunner import ExperimentRunner
from dmala_mimo.models.ExperimentConfig import ExperimentConfig
from dmala_mimo.utils.OutputUtils import OutputUtils


class ExperimentDriver:
    """
    High-level experiment router: runs an experiment by name and writes its artifacts.

    Supported experiments: tv_curve, rate_boxplot, ser_sweep, llr_fidelity,
    dist_histogram. The CLI spelling with dashes (``tv-curve``) is accepted too.

    Examples:
        >>> from dmala_mimo.controllers.ExperimentDriver import ExperimentDriver
        >>> config = ConfigUtils.load_experiment_config("tv.json", "tv_curve")
        >>> record, paths = ExperimentDriver.execute("tv_curve", config, threads=4)
        >>> paths["csv"]
        PosixPath('results/tv_curve.csv')
    """

    @staticmethod
    def execute(experiment, config: ExperimentConfig, threads=1, write=True):
        """
        Run ``experiment`` with ``config`` and optionally write its output files.

        Args:
            experiment: Experiment name, e.g. "tv_curve" or "tv-curve".
            config: Validated configuration for that experiment.
            threads: Worker threads; never changes the results.
            write: Write CSV/JSON/timing/plot files into ``config.output_path``.

        Returns:
            tuple: (ResultRecord, dict of written paths, empty when ``write`` is False).

        Raises:
            ValueError: If the experiment name is unknown or does not match the config.
        """
        experiment = experiment.replace("-", "_")
        if experiment != config.experiment:
            raise ValueError(f"Config is for {config.experiment}, not {experiment}")

        if experiment == "tv_curve":
            record = ExperimentRunner.run_tv_curve(config, threads)
        elif experiment == "rate_boxplot":
            record = ExperimentRunner.run_rate_boxplot(config, threads)
        elif experiment == "ser_sweep":
            record = ExperimentRunner.run_ser_sweep(config, threads)
        elif experiment == "llr_fidelity":
            record = ExperimentRunner.run_llr_fidelity(config, threads)
        elif experiment == "dist_histogram":
            record = ExperimentRunner.run_dist_histogram(config, threads)
        else:
            raise ValueError(f"Unsupported experiment: {experiment}")

        paths = OutputUtils.write_result(record, config) if write else {}
        return record, paths
