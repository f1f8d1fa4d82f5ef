"""Adaptive mechanism tuning by simultaneous-perturbation stochastic approximation.

The mechanism parameter θ lives in a box Θ; the loss is the (empirical)
social-optimality gap of the dataset generated by playing the game at θ.  Each
iteration perturbs θ along a random Rademacher direction, forms the two-point
gradient estimate, takes a projected step, and injects annealed Gaussian noise
so the iterate can escape local minima:

    θ_{n+1} = Proj_Θ(θ_n − a_n·G_n(θ_n) + q_n·w_n),   w_n ~ N(0, I).

Gains decay as a_n = a/n, c_n = c/n^η, q_n = sqrt(q / (m·ln ln m)) with
m = n + 3 (the unshifted formula is undefined for n ≤ 3).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .rp import TOL_R

STOP_TOL_DEFAULT = TOL_R


@dataclass(frozen=True)
class SPSAConfig:
    """Gains, box, evaluation budget and seed for one tuning run."""

    a: float
    c: float
    q: float
    eta: float
    theta_box: NDArray[np.float64]  # (p, 2) rows [lo, hi]
    T: int = 10
    max_iters: int = 100
    stop_tol: float = STOP_TOL_DEFAULT
    seed: int = 0

    def __post_init__(self):
        box = np.asarray(self.theta_box, dtype=float).reshape(-1, 2)
        if self.a <= 0 or self.c <= 0 or self.q < 0:
            raise ValueError("require a > 0, c > 0, q >= 0")
        if not (1.0 / 6.0 <= self.eta <= 0.5):
            raise ValueError("eta must lie in [1/6, 1/2]")
        if np.any(box[:, 0] > box[:, 1]):
            raise ValueError("theta_box rows must be [lo, hi] with lo <= hi")
        object.__setattr__(self, "theta_box", box)

    @property
    def p(self) -> int:
        return self.theta_box.shape[0]

    def project(self, theta: NDArray[np.float64]) -> NDArray[np.float64]:
        """Per-coordinate clamp: the norm-minimizing projection onto the box."""
        return np.clip(theta, self.theta_box[:, 0], self.theta_box[:, 1])

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "c": self.c,
            "q": self.q,
            "eta": self.eta,
            "theta_box": self.theta_box.tolist(),
            "T": self.T,
            "max_iters": self.max_iters,
            "stop_tol": self.stop_tol,
            "seed": self.seed,
        }


def gains(n: int, cfg: SPSAConfig) -> tuple[float, float, float]:
    """(a_n, c_n, q_n) at iteration n >= 1."""
    if n < 1:
        raise ValueError("iterations are 1-based")
    m = n + 3
    a_n = cfg.a / n
    c_n = cfg.c / n**cfg.eta
    q_n = float(np.sqrt(cfg.q / (m * np.log(np.log(m)))))
    return a_n, c_n, q_n


@dataclass(frozen=True)
class StepRecord:
    n: int
    theta: NDArray[np.float64]
    loss: float
    gradient_estimate: NDArray[np.float64] | None
    a_n: float
    c_n: float
    q_n: float


@dataclass
class SPSATrace:
    """Per-iteration records of one tuning run, streamable to CSV + manifest."""

    records: list[StepRecord] = field(default_factory=list)

    @property
    def losses(self) -> NDArray[np.float64]:
        return np.array([r.loss for r in self.records])

    @property
    def thetas(self) -> NDArray[np.float64]:
        return np.stack([r.theta for r in self.records])

    def write_csv(self, path) -> None:
        p = self.records[0].theta.size if self.records else 0
        header = ["n", "loss"] + [f"theta_{j + 1}" for j in range(p)] + ["a_n", "c_n", "q_n"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in self.records:
                w.writerow(
                    [r.n, repr(r.loss)]
                    + [repr(float(v)) for v in r.theta]
                    + [repr(r.a_n), repr(r.c_n), repr(r.q_n)]
                )

    def manifest(self, cfg: SPSAConfig) -> dict:
        payload = json.dumps(
            {"config": cfg.to_dict(), "trace": [[r.n, r.loss] + r.theta.tolist() for r in self.records]},
            sort_keys=True,
        )
        return {
            "config": cfg.to_dict(),
            "seed": cfg.seed,
            "iterations": len(self.records),
            "final_loss": self.records[-1].loss if self.records else None,
            "content_hash": hashlib.sha256(payload.encode()).hexdigest(),
        }

    def write_manifest(self, path, cfg: SPSAConfig) -> None:
        with open(path, "w") as fh:
            json.dump(self.manifest(cfg), fh, indent=2, sort_keys=True)
            fh.write("\n")


def spsa_step(theta_n, loss, n: int, cfg: SPSAConfig, seed) -> tuple[NDArray[np.float64], dict]:
    """One update: perturb, estimate the gradient, project the noisy step.

    The two perturbed points θ ± c_n·Δ are evaluated as-is (not projected);
    only the new iterate is clamped into the box.
    """
    theta_n = np.asarray(theta_n, dtype=float)
    rng = np.random.default_rng(seed)
    a_n, c_n, q_n = gains(n, cfg)
    delta = rng.integers(0, 2, size=cfg.p) * 2.0 - 1.0  # Rademacher +-1
    w = rng.standard_normal(cfg.p)
    r1 = float(loss(theta_n + c_n * delta))
    r2 = float(loss(theta_n - c_n * delta))
    grad = (r1 - r2) / (2.0 * c_n * delta)
    theta_next = cfg.project(theta_n - a_n * grad + q_n * w)
    record = {
        "n": n,
        "delta": delta,
        "r_plus": r1,
        "r_minus": r2,
        "gradient_estimate": grad,
        "a_n": a_n,
        "c_n": c_n,
        "q_n": q_n,
    }
    return theta_next, record


def run_mechanism_design(
    loss,
    cfg: SPSAConfig,
    theta0=None,
    retries: int = 3,
) -> SPSATrace:
    """Tune θ until the observed-play loss falls below stop_tol.

    ``loss(theta, seed)`` plays the game at θ (probes drawn from ``seed``) and
    returns the empirical social-optimality gap.  Equilibrium-computation
    failures (RuntimeError) are retried with fresh probe seeds up to
    ``retries`` times before aborting.  The run is bit-reproducible given
    (cfg, theta0).
    """
    ss = np.random.SeedSequence(cfg.seed)
    init_rng = np.random.default_rng(ss.spawn(1)[0])
    if theta0 is None:
        box = cfg.theta_box
        theta = init_rng.uniform(box[:, 0], box[:, 1])
    else:
        theta = cfg.project(np.asarray(theta0, dtype=float))
    trace = SPSATrace()
    for n in range(1, cfg.max_iters + 1):
        seeds = ss.spawn(2)
        eval_seed, step_seed = seeds[0], seeds[1]

        def eval_loss(th, base_seed=eval_seed):
            last_err = None
            for attempt, s in enumerate(base_seed.spawn(retries)):
                try:
                    return loss(th, s)
                except RuntimeError as err:
                    last_err = err
            raise RuntimeError(
                f"loss evaluation failed after {retries} attempts at n={n}: {last_err}"
            )

        a_n, c_n, q_n = gains(n, cfg)
        loss_n = float(eval_loss(theta))
        if loss_n <= cfg.stop_tol:
            trace.records.append(StepRecord(n, theta.copy(), loss_n, None, a_n, c_n, q_n))
            break
        theta_next, rec = spsa_step(theta, eval_loss, n, cfg, step_seed)
        trace.records.append(
            StepRecord(n, theta.copy(), loss_n, rec["gradient_estimate"], a_n, c_n, q_n)
        )
        theta = theta_next
    return trace
