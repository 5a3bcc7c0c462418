#!/usr/bin/env python3
"""Distances between runs at successive Friedrichs cutoffs, with observed rates."""

import argparse
import math

import numpy as np

from boussinesq_abcd import GridSpec, RunConfig, WaveState, preset
from boussinesq_abcd.initial import gaussian
from boussinesq_abcd.integrator import m_refinement_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--amplitude", type=float, default=0.5)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--t-end", type=float, default=5.0)
    ap.add_argument("--m", type=float, nargs="+", default=[2.0, 3.0, 4.0, 6.0, 8.0, 10.0])
    args = ap.parse_args()

    g = GridSpec()
    st = WaveState(g, gaussian(g, args.amplitude, args.sigma), np.zeros((1,) + g.shape))
    cfg = RunConfig(preset("bbm-bbm", args.eps), g, t_end=args.t_end, dt=0.01)
    rows = m_refinement_study(cfg, st, args.m)
    prev = None
    print(f"{'m':>6} -> {'m':<6} {'distance':>12} {'rate':>7}")
    for row in rows:
        rate = float("nan")
        if prev and row["distance"] > 0:
            rate = math.log(prev["distance"] / row["distance"]) / math.log(row["m_fine"] / prev["m_fine"])
        print(f"{row['m_coarse']:>6g} -> {row['m_fine']:<6g} {row['distance']:>12.3e} {rate:>7.2f}")
        prev = row


if __name__ == "__main__":
    main()
