#!/usr/bin/env python3
"""Hamiltonian drift of RK4 against dt for a Gaussian BBM-BBM run."""

import argparse
import math

from boussinesq_abcd.verification import hamiltonian_drift


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dts", type=float, nargs="+", default=[4e-3, 2e-3, 1e-3, 5e-4])
    ap.add_argument("--t-end", type=float, default=10.0)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()

    prev = None
    print(f"{'dt':>10} {'drift':>12} {'order':>7}")
    for dt in args.dts:
        d = hamiltonian_drift(dt, t_end=args.t_end, sigma=args.sigma, eps=args.eps)
        order = math.log2(prev[1] / d) / math.log2(prev[0] / dt) if prev and d > 0 else float("nan")
        print(f"{dt:>10.2e} {d:>12.3e} {order:>7.2f}")
        prev = (dt, d)


if __name__ == "__main__":
    main()
