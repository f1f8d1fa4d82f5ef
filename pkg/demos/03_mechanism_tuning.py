"""Tuning a mechanism parameter by simultaneous-perturbation search.

Two parts:

1. the optimizer itself on a smooth synthetic loss, where the convergence
   trace is easy to read;
2. the river-game experiment with its standard settings, where observed Nash
   play becomes socially optimal and the run terminates at the stop tolerance.

Run:  python3 demos/03_mechanism_tuning.py
"""

from __future__ import annotations

import numpy as np

from pareto_forge.experiments import river_spsa_config, run_river_spsa
from pareto_forge.spsa import SPSAConfig, run_mechanism_design


def synthetic_part():
    print("--- part 1: smooth synthetic loss ---")
    target = np.array([0.7, -0.3])

    def loss(theta, seed):
        del seed  # deterministic loss; the seed threads through for real games
        return float(np.sum((np.asarray(theta) - target) ** 2))

    cfg = SPSAConfig(
        a=1.0,
        c=0.1,
        q=1e-6,
        eta=0.25,
        theta_box=np.tile([-2.0, 2.0], (2, 1)),
        max_iters=300,
        stop_tol=1e-6,
        seed=0,
    )
    trace = run_mechanism_design(loss, cfg, theta0=np.array([1.8, 1.8]))
    losses = trace.losses
    marks = [1, 10, 50, 100, len(losses)]
    for n in marks:
        if n <= len(losses):
            print(f"  n={n:4d}  loss={losses[n - 1]:.6f}")
    print(f"  final theta: {trace.records[-1].theta.round(3)}  (target {target})")


def river_part():
    print("\n--- part 2: river-game experiment ---")
    cfg = river_spsa_config(seed=0)
    trace = run_river_spsa(cfg)
    print(f"  iterations: {len(trace.records)}")
    print(f"  final loss: {trace.records[-1].loss:.2e}")
    print("  note: with demand slope d1 = 3 every payoff increases in own")
    print("  action, so equilibrium play exhausts its budgets at any theta in")
    print("  the design box and the social-optimality gap is already zero.")
    print("  The loss landscape over theta is step-valued (an agent idling at")
    print("  zero leaves its whole cap as slack), so gradient search only")
    print("  matters for mechanisms outside this monotone regime.")


def main():
    synthetic_part()
    river_part()


if __name__ == "__main__":
    main()
