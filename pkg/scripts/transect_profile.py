#!/usr/bin/env python3
"""Walk a transect preset and print the strength profile the leg would see.

For each sampled location: regime label, spring stiffness, and the depths
at which the force crosses 10/20/30 N.
"""

import argparse

import numpy as np

from regosense.config import load_field
from regosense.intrusion import (
    LAB_CYLINDER,
    IntrusionProtocol,
    classify_regime,
    strength_summary,
    synthesize,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--terrain", default="white_sands_transect")
    ap.add_argument("--step", type=float, default=2.5, help="meters")
    ap.add_argument("--noise", type=float, default=0.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    field = load_field(args.terrain)
    proto = IntrusionProtocol()
    length = field.geometry.length
    print(f"{'x_m':>6} {'material':>16} {'regime':>18} {'k_N_per_m':>10} "
          f"{'d10_cm':>7} {'d20_cm':>7} {'d30_cm':>7}")
    for x in np.arange(0.0, length + 1e-9, args.step):
        col = field.column_at(float(x))
        rng = np.random.default_rng(args.seed) if args.noise > 0 else None
        c = synthesize(col, LAB_CYLINDER, proto, field.env, rng=rng,
                       noise_sigma=args.noise)
        label, conf = classify_regime(c)
        s = strength_summary(c)

        def cm(v):
            return f"{v * 100:7.2f}" if v is not None else "      -"

        print(f"{x:6.1f} {col.material.value:>16} "
              f"{label.value:>14} {conf:.2f} {s.fitted_k:10.1f} "
              f"{cm(s.depth_at_10N)} {cm(s.depth_at_20N)} {cm(s.depth_at_30N)}")


if __name__ == "__main__":
    main()
