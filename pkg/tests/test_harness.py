import json

import numpy as np
import pytest

from dmala_mimo import cli
from dmala_mimo.controllers.ExperimentDriver import ExperimentDriver
from dmala_mimo.controllers.ExperimentRunner import ExperimentRunner
from dmala_mimo.models.ExperimentConfig import ExperimentConfig
from dmala_mimo.utils.OutputUtils import OutputUtils

SMALL = {
    "tv_curve": {"sampler": {"T": 30, "n_chains": 2000}},
    "rate_boxplot": {"snr_db_list": [12.0, 4.0], "n_realizations": 3},
    "ser_sweep": {
        "snr_db_list": [6.0, 12.0],
        "n_symbol_vectors": 5,
        "detectors": ["dmala", "mmse", "gibbs", "unadjusted_dla"],
        "sampler": {"T": 10, "n_chains": 16},
    },
    "llr_fidelity": {"list_sizes": [16, 4], "n_realizations": 2, "sampler": {"T": 10}},
    "dist_histogram": {"sampler": {"T": 20, "n_chains": 5000}},
}


def small_config(experiment, tmp_path, **extra):
    data = {"experiment": experiment, "seed": 42, "output_path": str(tmp_path), **SMALL[experiment], **extra}
    return ExperimentConfig.from_dict(data)


def test_tv_curve_outputs(tmp_path):
    record, paths = ExperimentDriver.execute("tv-curve", small_config("tv_curve", tmp_path))
    metrics = record.metrics
    assert metrics["n_states"] == 16
    assert 0.0 < metrics["r"] < 1.0
    assert metrics["eigenvalues"][0] == pytest.approx(1.0, abs=1e-8)
    assert metrics["detailed_balance"] <= 1e-12
    assert metrics["tracking_fraction"] >= 0.8

    comments, columns = OutputUtils.read_csv(paths["csv"])
    table = record.tables["tv_curve"]
    assert columns["t"] == list(range(1, 31))
    assert columns["tv_exact"] == table["tv_exact"]
    assert any(line.startswith("column tv_exact") for line in comments)
    assert np.all(np.diff(columns["tv_exact"]) <= 1e-12)

    written = OutputUtils.read_json(paths["json"])
    assert written["config"]["experiment"] == "tv_curve"
    assert "output_path" not in written["config"]
    assert "wall_clock" not in written
    assert OutputUtils.read_json(paths["timing"])["wall_clock"] >= 0.0
    assert paths["plot"].read_text().startswith('"""Plot tv_curve.csv')


def test_fit_rate_recovers_geometric_decay():
    curve = 0.7 * 0.8 ** np.arange(60)
    assert ExperimentRunner.fit_rate(curve) == pytest.approx(0.8, abs=1e-12)
    assert ExperimentRunner.fit_rate([1.0, 0.0, 0.0]) is None


def test_rate_boxplot_outputs(tmp_path):
    record, _ = ExperimentDriver.execute("rate_boxplot", small_config("rate_boxplot", tmp_path))
    table = record.tables["rate_boxplot"]
    assert len(table["r"]) == 2 * 2 * 3
    assert all(0.0 < r < 1.0 for r in table["r"])
    assert {s["mode"] for s in record.metrics["summaries"]} == {"naive", "preconditioned"}
    for summary in record.metrics["summaries"]:
        assert summary["min"] <= summary["median"] <= summary["max"]
    medians = {(s["mode"], s["snr_db"]): s["median"] for s in record.metrics["summaries"]}
    # the stalling trend compares the highest SNR with the lowest, whatever the list order
    assert record.metrics["naive_stalls"] == (medians[("naive", 12.0)] > medians[("naive", 4.0)])
    assert set(record.metrics["preconditioned_not_worse"]) == {"12.0", "4.0"}


def test_ser_sweep_outputs(tmp_path):
    record, _ = ExperimentDriver.execute("ser_sweep", small_config("ser_sweep", tmp_path))
    table = record.tables["ser_sweep"]
    assert set(table["detector"]) == {"dmala", "mmse", "gibbs", "unadjusted_dla", "map"}
    assert len(table["ser"]) == 2 * 5
    for ser, ber, ver in zip(table["ser"], table["ber"], table["ver"]):
        assert 0.0 <= ber <= 1.0
        assert ser <= ver + 1e-12
    assert set(record.metrics) == set(table["detector"])


def test_ser_sweep_with_zero_nmse_matches_perfect_csi(tmp_path):
    perfect, _ = ExperimentDriver.execute("ser_sweep", small_config("ser_sweep", tmp_path), write=False)
    zero, _ = ExperimentDriver.execute("ser_sweep", small_config("ser_sweep", tmp_path, nmse=0.0), write=False)
    assert perfect.tables == zero.tables


def test_llr_fidelity_outputs(tmp_path):
    record, _ = ExperimentDriver.execute("llr_fidelity", small_config("llr_fidelity", tmp_path))
    table = record.tables["llr_fidelity"]
    assert table["list_size"] == [4, 16, 4, 16]
    assert table["estimator"] == ["is", "is", "list", "list"]
    assert all(e >= 0.0 for e in table["mean_abs_error"])
    assert record.metrics["list_sizes"] == [4, 16]
    assert set(record.metrics) >= {"is_not_worse_than_list", "is_median_not_worse_than_list", "is_sign_agreement"}
    means = dict(zip(zip(table["estimator"], table["list_size"]), table["mean_abs_error"]))
    assert record.metrics["is_not_worse_than_list"]["8.0"] == all(means[("is", s)] <= means[("list", s)] for s in (4, 16))


def test_dist_histogram_outputs(tmp_path):
    record, _ = ExperimentDriver.execute("dist_histogram", small_config("dist_histogram", tmp_path))
    table = record.tables["dist_histogram"]
    assert sum(table["pi"]) == pytest.approx(1.0)
    assert sum(table["dmala"]) == pytest.approx(1.0)
    assert len(table["label"][0]) == 4
    metrics = record.metrics
    assert metrics["tv_dmala"] < 0.1
    assert metrics["tv_unadjusted_stationary"] > 0.0


@pytest.mark.parametrize("experiment", ["tv_curve", "llr_fidelity"])
def test_outputs_do_not_depend_on_threads(tmp_path, experiment):
    serial = small_config(experiment, tmp_path / "serial")
    threaded = small_config(experiment, tmp_path / "threaded")
    _, serial_paths = ExperimentDriver.execute(experiment, serial, threads=1)
    _, threaded_paths = ExperimentDriver.execute(experiment, threaded, threads=4)
    for key in ("csv", "json", "plot"):
        assert serial_paths[key].read_bytes() == threaded_paths[key].read_bytes()


def test_reruns_are_byte_identical(tmp_path):
    first = small_config("dist_histogram", tmp_path / "a")
    second = small_config("dist_histogram", tmp_path / "b")
    _, first_paths = ExperimentDriver.execute("dist_histogram", first)
    _, second_paths = ExperimentDriver.execute("dist_histogram", second)
    assert first_paths["csv"].read_bytes() == second_paths["csv"].read_bytes()
    assert first_paths["json"].read_bytes() == second_paths["json"].read_bytes()


def test_seed_changes_results(tmp_path):
    base, _ = ExperimentDriver.execute("dist_histogram", small_config("dist_histogram", tmp_path), write=False)
    other, _ = ExperimentDriver.execute("dist_histogram", small_config("dist_histogram", tmp_path, seed=43), write=False)
    assert base.tables != other.tables


def test_driver_rejects_mismatched_experiment(tmp_path):
    with pytest.raises(ValueError):
        ExperimentDriver.execute("ser_sweep", small_config("tv_curve", tmp_path))


def write_config(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_cli_success(tmp_path, capsys):
    config = write_config(tmp_path, {"experiment": "dist_histogram", **SMALL["dist_histogram"]})
    code = cli.main(["dist-histogram", "--config", config, "--out", str(tmp_path / "out"), "--seed", "7", "--threads", "2"])
    assert code == cli.EXIT_OK
    assert capsys.readouterr().out.strip().endswith("dist_histogram.csv")
    assert OutputUtils.read_json(tmp_path / "out" / "dist_histogram.json")["seed"] == 7


@pytest.mark.parametrize(
    "content",
    ["{broken", json.dumps({"experiment": "tv_curve", "sampler": {"alpha": -1.0}}), json.dumps({"experiment": "ser_sweep"})],
)
def test_cli_config_errors(tmp_path, content):
    path = tmp_path / "config.json"
    path.write_text(content)
    assert cli.main(["tv-curve", "--config", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_cli_threads_must_be_positive(tmp_path):
    assert cli.main(["tv-curve", "--threads", "0", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_cli_oracle_cap(tmp_path):
    config = write_config(tmp_path, {"experiment": "tv_curve", "channel": {"nt": 4, "nr": 4}, "modulation": 8})
    assert cli.main(["tv-curve", "--config", config, "--out", str(tmp_path)]) == cli.EXIT_ORACLE_CAP


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])


def test_cli_slope_check_is_soft(tmp_path):
    # two exact points are too few to fit a rate, so the check cannot agree
    config = write_config(tmp_path, {"experiment": "tv_curve", "sampler": {"T": 2, "n_chains": 100}})
    assert cli.main(["tv-curve", "--config", config, "--out", str(tmp_path / "out")]) == cli.EXIT_OK
    metrics = OutputUtils.read_json(tmp_path / "out" / "tv_curve.json")["metrics"]
    assert metrics["slope_agrees"] is False
    assert metrics["r_slope"] is None


def test_cli_help_describes_soft_slope_check(capsys):
    with pytest.raises(SystemExit):
        cli.main(["tv-curve", "--help"])
    assert "slope_agrees=false" in capsys.readouterr().out


@pytest.mark.slow
def test_tv_curve_acceptance(slow, tmp_path):
    record, _ = ExperimentDriver.execute("tv_curve", small_config("tv_curve", tmp_path, sampler={"T": 200, "n_chains": 100_000}))
    assert record.metrics["slope_agrees"]
    assert record.metrics["tracking_fraction"] >= 0.95


@pytest.mark.slow
def test_dist_histogram_acceptance(slow, tmp_path):
    record, _ = ExperimentDriver.execute("dist_histogram", small_config("dist_histogram", tmp_path, sampler={"T": 100, "n_chains": 100_000}))
    assert record.metrics["tv_dmala"] <= 3.0 * record.metrics["noise_floor"] + 0.01
    assert record.metrics["tv_unadjusted_stationary"] > 0.0


@pytest.mark.slow
def test_rate_boxplot_acceptance(slow, tmp_path):
    config = ExperimentConfig.from_dict({"experiment": "rate_boxplot", "seed": 42, "output_path": str(tmp_path)})
    record, _ = ExperimentDriver.execute("rate_boxplot", config, threads=4)
    assert record.metrics["naive_stalls"]
    assert record.metrics["preconditioned_not_worse"]["8.0"]
    assert record.metrics["preconditioned_not_worse"]["10.0"]


@pytest.mark.slow
def test_llr_fidelity_acceptance(slow, tmp_path):
    config = ExperimentConfig.from_dict(
        {"experiment": "llr_fidelity", "channel": {"nt": 4, "nr": 4}, "seed": 5, "output_path": str(tmp_path)}
    )
    record, _ = ExperimentDriver.execute("llr_fidelity", config, threads=4)
    assert record.metrics["list_sizes"] == [256, 1024, 4096]
    assert record.metrics["is_error_decreasing"]["8.0"]
    assert record.metrics["is_not_worse_than_list"]["8.0"]
    assert record.metrics["is_sign_agreement"]["8.0"] >= 0.99


@pytest.mark.slow
def test_ser_sweep_is_near_map(slow, tmp_path):
    config = ExperimentConfig.from_dict(
        {
            "experiment": "ser_sweep",
            "channel": {"nt": 4, "nr": 4},
            "modulation": 4,
            "snr_db_list": [18.0],
            "n_symbol_vectors": 3000,
            "sampler": {"T": 100, "n_chains": 16},
            "seed": 9,
            "output_path": str(tmp_path),
        }
    )
    record, _ = ExperimentDriver.execute("ser_sweep", config, threads=4)
    table = record.tables["ser_sweep"]
    ser = dict(zip(table["detector"], table["ser"]))
    assert ser["map"] > 0.0
    assert abs(ser["dmala"] - ser["map"]) <= 0.1 * ser["map"]
