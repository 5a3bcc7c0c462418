#!/usr/bin/env python3
"""Run the epsilon ladder from a config and print the scaling table."""

import argparse
import csv
from pathlib import Path

from boussinesq_abcd.experiments import load_config, sweep_epsilon

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=HERE / "configs" / "bbm_sweep.json")
    ap.add_argument("--out", default="runs/scaling")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    result = sweep_epsilon(load_config(args.config), Path(args.out), jobs=args.jobs)
    with open(Path(args.out) / "scaling.csv") as fh:
        for row in csv.DictReader(fh):
            print(f"eps={float(row['epsilon']):<8g} T_exist={row['T_exist']:<12} eps*T={row['eps_T_exist']:<12} "
                  f"censored={row['censored']}")
    print("summary:", result["summary"])


if __name__ == "__main__":
    main()
