"""Auditing observed play for social optimality.

Walks through the revealed-preference toolkit on two synthetic datasets: one
generated by genuinely optimal play (per-agent Cobb-Douglas maximization) and
one with a classic budget-reversal cycle injected.  Shows the combinatorial
verdict, the quantitative gap with its certificate, the additive and
multiplicative relaxations, and utility reconstruction.

Run:  python3 demos/01_revealed_preference_audit.py
"""

from __future__ import annotations

import numpy as np

from pareto_forge.rp import (
    ccei_scalar,
    garp_f_threshold,
    mm_garp,
    pareto_gap,
    reconstruct_utility,
)
from pareto_forge.synthetic import consistent_dataset, violating_dataset


def audit(name, d):
    print(f"--- {name} (T={d.T}, M={d.M}, k={d.k}) ---")
    print(f"combinatorial consistency: {mm_garp(d)}")
    res = pareto_gap(d)
    print(f"social-optimality gap:     {res.gap:.6f}")
    print(f"per-agent gaps:            {[f'{g:.4f}' for g in res.per_agent_gaps]}")
    print(f"certificate validates:     {res.certificate.validates(d, tol=1e-5)}")
    print(f"additive slack threshold:  {garp_f_threshold(d):.6f}")
    effs = [ccei_scalar(d, i) for i in range(d.M)]
    print(f"efficiency indices:        {[f'{e:.4f}' for e in effs]}")
    return res


def main():
    good = consistent_dataset(T=4, M=2, k=2, seed=0)
    res = audit("socially optimal play", good)

    # A zero gap comes with a constructive witness: a concave utility that the
    # observed strategies maximize on their own budgets.
    util = reconstruct_utility(res.certificate, good, agent=0, tol=1e-5)
    x_obs = good.strategies[0][0].mean
    print("\nreconstructed utility for agent 0:")
    print(f"  at the observed strategy: {util(x_obs):.4f}")
    print(f"  at the origin:            {util(np.zeros(2)):.4f}")
    print(f"  at half the observed:     {util(0.5 * x_obs):.4f}")

    print()
    bad = violating_dataset(T=4, M=2, k=2, seed=0)
    audit("play with a budget reversal", bad)
    print("\nnote: the additive threshold tracks the gap exactly on")
    print("budget-exhausting data — both locate the same minimal relaxation.")


if __name__ == "__main__":
    main()
