import csv
import json
import logging
from pathlib import Path

from dmala_mimo.models.ExperimentConfig import ExperimentConfig, ResultRecord

logger = logging.getLogger(__name__)

COLUMN_DOCS = {
    "tv_curve": [
        "t: iteration index, t = 1 is the uniform initialization",
        "tv_exact: TV(u P^(t-1), pi) from the dense kernel",
        "tv_empirical: TV of the ensemble histogram at iteration t to pi",
        "noise_floor: binomial standard scale of the empirical TV",
    ],
    "rate_boxplot": [
        "snr_db: SNR per receive antenna in dB",
        "realization: channel realization index",
        "mode: naive or preconditioned DMALA",
        "r: second-largest eigenvalue modulus of the kernel",
    ],
    "ser_sweep": [
        "snr_db: SNR per receive antenna in dB",
        "detector: dmala, mmse, gibbs, unadjusted_dla or map",
        "ser: complex symbol error rate",
        "ber: uncoded bit error rate of the hard decision",
        "ver: vector error rate",
        "n_vectors: transmitted vectors",
    ],
    "llr_fidelity": [
        "snr_db: SNR per receive antenna in dB",
        "estimator: is or list",
        "list_size: samples per realization",
        "mean_abs_error: mean |L - L_exact| over bits and realizations",
        "median_abs_error: median |L - L_exact| over bits and realizations",
        "sign_agreement: sign agreement on bits with |L_exact| > 2",
    ],
    "dist_histogram": [
        "state: state index in mixed-radix order",
        "label: state as a bit string",
        "pi: exact posterior",
        "dmala: DMALA ensemble histogram",
        "unadjusted_dla: unadjusted ensemble histogram",
        "below_cutoff: 1 when pi < 1e-3",
    ],
}

PLOT_BODIES = {
    "tv_curve": """\
plt.semilogy(data["t"], data["tv_exact"], label="exact")
plt.semilogy(data["t"], data["tv_empirical"], "o", markersize=3, label="empirical")
plt.xlabel("iteration t")
plt.ylabel("total variation distance")
""",
    "rate_boxplot": """\
snrs = sorted(set(data["snr_db"]))
for offset, mode in ((-0.3, "naive"), (0.3, "preconditioned")):
    groups = [[r for r, s, m in zip(data["r"], data["snr_db"], data["mode"]) if s == snr and m == mode] for snr in snrs]
    plt.boxplot(groups, positions=[i + offset for i in range(len(snrs))], widths=0.5, labels=[f"{mode[:4]} {s:g}" for s in snrs])
plt.ylabel("convergence rate r")
""",
    "ser_sweep": """\
for detector in sorted(set(data["detector"])):
    rows = [i for i, d in enumerate(data["detector"]) if d == detector]
    plt.semilogy([data["snr_db"][i] for i in rows], [max(data["ser"][i], 1e-7) for i in rows], "o-", label=detector)
plt.xlabel("SNR (dB)")
plt.ylabel("symbol error rate")
""",
    "llr_fidelity": """\
for estimator in sorted(set(data["estimator"])):
    rows = [i for i, e in enumerate(data["estimator"]) if e == estimator]
    plt.loglog([data["list_size"][i] for i in rows], [data["median_abs_error"][i] for i in rows], "o-", label=estimator)
plt.xlabel("list size S")
plt.ylabel("median |L - L_exact|")
""",
    "dist_histogram": """\
keep = [i for i, cut in enumerate(data["below_cutoff"]) if not cut]
positions = range(len(keep))
plt.bar([p - 0.25 for p in positions], [data["pi"][i] for i in keep], width=0.25, label="exact")
plt.bar(list(positions), [data["dmala"][i] for i in keep], width=0.25, label="DMALA")
plt.bar([p + 0.25 for p in positions], [data["unadjusted_dla"][i] for i in keep], width=0.25, label="unadjusted")
plt.xticks(list(positions), [data["label"][i] for i in keep], rotation=90)
plt.ylabel("probability")
""",
}

PLOT_TEMPLATE = '''\
"""Plot {csv_name}. Requires matplotlib (pip install dmala_mimo[plot])."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt


def parse(value):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


with open(Path(__file__).with_name("{csv_name}"), newline="") as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
data = {{key: [parse(row[key]) for row in rows] for key in rows[0]}}

{body}plt.legend()
plt.tight_layout()
plt.savefig(Path(__file__).with_name("{experiment}.png"), dpi=150)
'''


class OutputUtils:
    """
    Write and read experiment artifacts.

    Every experiment produces ``<experiment>.csv`` (column documentation in ``#``
    header comments), ``<experiment>.json`` (config and metrics),
    ``<experiment>_timing.json`` (wall-clock) and ``plot_<experiment>.py``. Only the
    timing file varies between reruns of the same config.

    Examples:
        >>> paths = OutputUtils.write_result(record, config)
        >>> comments, columns = OutputUtils.read_csv(paths["csv"])
    """

    @staticmethod
    def _write_json(path: Path, data):
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @staticmethod
    def write_csv(path, columns: dict, comments=()):
        """Write equal-length columns with ``# `` comment lines above the header."""
        path = Path(path)
        names = list(columns)
        rows = zip(*(columns[name] for name in names))
        with open(path, "w", newline="", encoding="utf-8") as f:
            for comment in comments:
                f.write(f"# {comment}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(names)
            writer.writerows(rows)
        return path

    @staticmethod
    def _parse(value: str):
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
        return value

    @staticmethod
    def read_csv(path):
        """
        Returns:
            tuple: (comment lines without the ``# `` prefix, dict column -> list of
            values parsed as int, float or str).
        """
        with open(path, newline="", encoding="utf-8") as f:
            lines = f.read().splitlines()
        comments = [line[2:] for line in lines if line.startswith("#")]
        reader = csv.reader(line for line in lines if not line.startswith("#"))
        header = next(reader)
        columns = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                columns[name].append(OutputUtils._parse(value))
        return comments, columns

    @staticmethod
    def read_json(path):
        return json.loads(Path(path).read_text(encoding="utf-8"))

    @staticmethod
    def write_result(record: ResultRecord, config: ExperimentConfig, out_dir=None) -> dict:
        """
        Write all artifacts of ``record`` into ``out_dir`` (default ``config.output_path``).

        Returns:
            dict: Paths keyed by "csv", "json", "timing" and "plot".
        """
        out_dir = Path(out_dir if out_dir is not None else config.output_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        experiment = record.experiment

        config_data = config.to_dict()
        config_data.pop("output_path")
        comments = [f"experiment: {experiment}", f"config_hash: {record.config_hash}", f"seed: {record.seed}"]
        comments += [f"column {doc}" for doc in COLUMN_DOCS.get(experiment, [])]

        paths = {}
        for name, columns in record.tables.items():
            file_name = f"{experiment}.csv" if name == experiment else f"{experiment}_{name}.csv"
            written = OutputUtils.write_csv(out_dir / file_name, columns, comments)
            if name == experiment:
                paths["csv"] = written

        paths["json"] = out_dir / f"{experiment}.json"
        OutputUtils._write_json(paths["json"], {**record.to_dict(), "config": config_data})
        paths["timing"] = out_dir / f"{experiment}_timing.json"
        OutputUtils._write_json(paths["timing"], {"experiment": experiment, "config_hash": record.config_hash, "wall_clock": record.wall_clock})
        paths["plot"] = out_dir / f"plot_{experiment}.py"
        paths["plot"].write_text(
            PLOT_TEMPLATE.format(csv_name=f"{experiment}.csv", experiment=experiment, body=PLOT_BODIES[experiment]),
            encoding="utf-8",
        )
        logger.info(f"Wrote {experiment} results to {out_dir}")
        return paths
