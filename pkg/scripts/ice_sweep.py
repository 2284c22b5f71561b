#!/usr/bin/env python3
"""Sweep ice fraction and tabulate strength/rupture trends.

Reproduces the frozen-mixture laboratory sweep: higher ice content gives
stronger terminal resistance, more stress drops, and bigger drops.
"""

import argparse

import numpy as np

from regosense.intrusion import (
    FROZEN_MIX_TIP,
    IntrusionProtocol,
    detect_ruptures,
    synthesize,
)
from regosense.terrain import EnvironmentConfig, MaterialClass, MaterialColumn


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", default="0.01,0.02,0.05,0.10,0.15",
                    help="comma-separated ice fractions")
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-drop", type=float, default=0.005)
    ap.add_argument("--plot", action="store_true",
                    help="write ice_sweep.png with the force-depth curves")
    args = ap.parse_args()

    env = EnvironmentConfig(rng_seed=args.seed)
    proto = IntrusionProtocol()
    levels = [float(v) for v in args.levels.split(",")]

    print(f"{'phi_i':>6} {'terminal_N':>11} {'ruptures':>9} {'mean_drop_N':>12}")
    curves = []
    for phi_i in levels:
        col = MaterialColumn(MaterialClass.ICE_CEMENTED, 0.59, 2650.0, 3e-4,
                             0.5, 10.0, ice_fraction=phi_i)
        rng = np.random.default_rng(args.seed) if args.noise > 0 else None
        c = synthesize(col, FROZEN_MIX_TIP, proto, env, rng=rng,
                       noise_sigma=args.noise)
        events = detect_ruptures(c, min_drop=args.min_drop)
        mean_drop = np.mean([e.drop_magnitude for e in events]) if events else 0.0
        print(f"{phi_i:6.2f} {np.mean(c.forces[-5:]):11.3f} "
              f"{len(events):9d} {mean_drop:12.4f}")
        curves.append((phi_i, c))

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for phi_i, c in curves:
            ax.plot(c.depths * 100, c.forces, label=f"$\\phi_i$ = {phi_i:.0%}")
        ax.set_xlabel("depth (cm)")
        ax.set_ylabel("force (N)")
        ax.legend()
        fig.tight_layout()
        fig.savefig("ice_sweep.png", dpi=150)
        print("wrote ice_sweep.png")


if __name__ == "__main__":
    main()
