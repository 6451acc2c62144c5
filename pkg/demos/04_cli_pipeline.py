"""Drive the whole pipeline through the command-line interface.

Each stage is a subcommand of ``nameproxy``; everything is seeded through
the config file, so re-running this script reproduces identical artifacts.
"""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

RACES = ("asian", "black", "hispanic", "white")

SURNAME_MIX = {
    "chen": (60, 2, 2, 8),
    "nguyen": (55, 1, 3, 6),
    "washington": (1, 58, 2, 10),
    "garcia": (2, 3, 70, 9),
    "hernandez": (1, 2, 65, 7),
    "miller": (3, 8, 4, 80),
}
FIRSTNAMES = {
    "asian": ["wei", "mei"],
    "black": ["lakisha", "jamal"],
    "hispanic": ["maria", "jose"],
    "white": ["brad", "amy"],
}
GEOS = {"10001": (40, 10, 15, 60), "20002": (5, 55, 10, 30), "30003": (8, 12, 70, 25)}


def nameproxy(*args):
    cmd = [sys.executable, "-m", "nameproxy.cli", *map(str, args)]
    print(f"$ nameproxy {' '.join(map(str, args))}")
    subprocess.run(cmd, check=True)


def make_voter_csv(path, seed=0):
    rng = np.random.default_rng(seed)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["first_name", "last_name", "geo_id", "race"])
        for last, counts in SURNAME_MIX.items():
            for race, count in zip(RACES, counts):
                ridx = RACES.index(race)
                weights = np.array([GEOS[g][ridx] for g in GEOS], dtype=float)
                weights /= weights.sum()
                for _ in range(count):
                    first = FIRSTNAMES[race][int(rng.integers(2))]
                    geo = list(GEOS)[int(rng.choice(len(GEOS), p=weights))]
                    writer.writerow([first, last, geo, race])


def make_loan_pool_csv(path):
    """Raw applicant-style rows: distinct names, plus business rows that the
    person-name filter must drop."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["first_name", "last_name", "geo_id", "race"])
        for race in RACES:
            for i in range(60):
                a, b = chr(ord("a") + i % 26), chr(ord("a") + (i // 26) % 26)
                writer.writerow([f"fn{a}{b}", f"ln{race}", "10001", race])
        writer.writerow(["acme", "llc", "10001", "white"])
        writer.writerow(["speedy", "installation", "20002", "black"])


def main():
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        voter = root / "voter.csv"
        make_voter_csv(voter)

        config = {
            "seed": 2024,
            "sample_shares": [0.25, 0.25, 0.25, 0.25],
            "paths": {
                "surname_table": "tables/surname_table.csv",
                "firstname_table": "tables/firstname_table.csv",
                "geo_table": "tables/geo_table.csv",
                "params": "params.bin",
            },
            "train": {
                "epochs": 3,
                "batch_size": 64,
                "embed_dim": 16,
                "hidden": 16,
                "layers": 1,
                "lr": 0.01,
                "weight_decay": 0.0,
            },
        }
        config_path = root / "config.json"
        config_path.write_text(json.dumps(config, indent=2))

        nameproxy("build-tables", "--config", config_path, "--voter", voter,
                  "--out-dir", root / "tables")
        print((root / "tables" / "manifest.json").read_text())

        nameproxy("train", "--config", config_path, "--voter", voter,
                  "--out-params", root / "params.bin", "--out-log", root / "log.csv")
        print((root / "log.csv").read_text())

        nameproxy("predict", "--config", config_path, "--input", voter,
                  "--models", "first_last,first_last_zcta,bisg,bifsg,ensemble",
                  "--out", root / "preds.csv")

        nameproxy("evaluate", "--config", config_path, "--truth", voter,
                  "--predictions", root / "preds.csv",
                  "--out-dir", root / "reports", "--intersect-covered")
        print("report files:")
        for path in sorted((root / "reports").iterdir()):
            print(f"  {path.name}")
        print()
        print((root / "reports" / "metrics_ensemble.csv").read_text())

        pool = root / "loan_pool.csv"
        make_loan_pool_csv(pool)
        nameproxy("sample", "--config", config_path, "--input", pool,
                  "--n", 100, "--out", root / "sampled.csv")
        with open(root / "sampled.csv") as fh:
            n_sampled = sum(1 for _ in fh) - 1
        print(f"stratified sample written: {n_sampled} rows "
              "(business names filtered, duplicates dropped)")


if __name__ == "__main__":
    main()
