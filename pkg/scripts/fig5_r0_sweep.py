"""R1 and R0 over a beta1 x beta2 grid for four diffusion rates (host at the origin).

Writes one CSV per D0 and prints the grid maxima.
"""

import argparse
from pathlib import Path

import numpy as np

from airspread.cli import fmt
from airspread.experiments import FIG5_D0, sweep_r0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--out", default="results/fig5")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    b = np.linspace(1e-8, 1e-6, args.steps)
    for D0 in FIG5_D0:
        g = sweep_r0(b, b, D0)
        with open(out / f"r0_D0_{D0:g}.csv", "w") as fh:
            fh.write("beta1,beta2,R1,R0\n")
            for row in zip(g.beta1, g.beta2, g.R1, g.R0):
                fh.write(",".join(map(fmt, row)) + "\n")
        gap = np.max((g.R1 - g.R0) / g.R1)
        print(f"D0={D0:<6g} max R1={g.R1.max():.4g}  max R0={g.R0.max():.4g}  max (R1-R0)/R1={gap:.3f}")


if __name__ == "__main__":
    main()
