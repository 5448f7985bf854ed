"""Grid sweep used to pick the DesConfig defaults.

Minimises the median centered-L2 discrepancy of 64-point sets in 2-D over
five seeds.  Usage: python3 benchmarks/sweep_des_defaults.py
"""
import itertools
import statistics
import warnings

from despso.des import DesConfig, NotConverged, centered_l2_discrepancy, generate_des

SEEDS = range(5)


def main():
    warnings.simplefilter("ignore", NotConverged)
    rows = []
    for q, p, dt, kappa in itertools.product((1.0, 2.0), (5.0, 10.0, 20.0), (0.01, 0.05, 0.1), (1.0, 4.0)):
        cfg = DesConfig(q=q, p=p, dt=dt, kappa=kappa)
        cd = [centered_l2_discrepancy(generate_des(64, 2, cfg, seed=s)) for s in SEEDS]
        rows.append((statistics.median(cd), q, p, dt, kappa))
        print(f"q={q:g} p={p:g} dt={dt:g} kappa={kappa:g}  median CD2={rows[-1][0]:.6f}", flush=True)
    best = min(rows)
    print(f"best: q={best[1]:g} p={best[2]:g} dt={best[3]:g} kappa={best[4]:g}  CD2={best[0]:.6f}")


if __name__ == "__main__":
    main()
