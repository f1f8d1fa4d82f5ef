"""Revealed-preference engine.

Given a dataset of budget probes and observed (mixed) strategies, decide
whether play is consistent with maximization of a common social objective,
and when it is not, quantify the failure:

* ``mm_garp`` — combinatorial consistency test over the revealed-preference
  relation (transitive closure by Floyd-Warshall);
* ``pareto_gap`` — smallest relaxation r making the utility-number inequality
  system feasible (bisection over r, per-agent LP feasibility at each level);
* ``garp_f`` / ``ccei_scalar`` — additive / multiplicative relaxations of the
  combinatorial test;
* ``hoeffding_confidence`` — finite-sample concentration bound on the
  empirical gap;
* ``reconstruct_utility`` — piecewise-linear concave utility built from a
  feasibility certificate;
* ``rank_optimality_check`` — expected k-rank test for ordinal outcome data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from . import lp
from .core import ConstraintFunction, ParetoCertificate, RPDataset, eval_constraint

ALPHA_DEFAULT = 1e-3
TOL_R = 1e-5

# The inequality system is homogeneous in (u, lam): any solution with lam > 0
# rescales to one with lam >= 1.  Solving with lam >= 1 (and u free) keeps the
# r-units effect of the LP residual tolerance bounded by the tolerance itself:
# a residual of eps on a row with lam_t >= 1 relaxes r by at most eps.


def _agent_system(gbar_i: NDArray[np.float64], r: float):
    """Inequality system for one agent: u_s - u_t - lam_t*(gbar[t,s] + r) <= 0.

    Variables are [u_1..u_T, lam_1..lam_T] with u free and lam >= 1.
    """
    T = gbar_i.shape[0]
    A = np.zeros((T * T, 2 * T))
    b = np.zeros(T * T)
    row = 0
    for t in range(T):
        for s in range(T):
            A[row, s] += 1.0
            A[row, t] -= 1.0
            A[row, T + t] = -(gbar_i[t, s] + r)
            row += 1
    lower = np.concatenate([np.full(T, -np.inf), np.ones(T)])
    upper = np.full(2 * T, np.inf)
    return A, b, lower, upper


def _agent_feasible(gbar_i, r, alpha, backend=None):
    T = gbar_i.shape[0]
    A, b, lower, upper = _agent_system(gbar_i, r)
    ok, x = lp.feasible(A, b, lower, upper, backend)
    if not ok:
        return False, None, None
    u, lam = x[:T], x[T:]
    if lam.min() < alpha:  # scale up to honor the alpha floor
        c = alpha / lam.min()
        u, lam = u * c, lam * c
    return True, u, lam


def afriat_feasible(
    d: RPDataset, r: float, alpha: float = ALPHA_DEFAULT, backend=None
) -> tuple[bool, ParetoCertificate | None]:
    """Feasibility of the relaxed utility-number system at level r.

    The system never couples agents (no shared variables), so it is solved
    per agent and the certificates are stacked.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    T, M = d.T, d.M
    u = np.zeros((T, M))
    lam = np.zeros((T, M))
    for i in range(M):
        ok, u_i, lam_i = _agent_feasible(d.gbar[:, :, i], r, alpha, backend)
        if not ok:
            return False, None
        u[:, i], lam[:, i] = u_i, lam_i
    return True, ParetoCertificate(u, lam, float(r), alpha)


@dataclass(frozen=True)
class GapResult:
    gap: float
    certificate: ParetoCertificate
    per_agent_gaps: tuple[float, ...]
    bisection_iters: int


def _normalize_agent_cert(u, lam, alpha):
    """Rescale so max lam = 1 while keeping lam >= alpha (tidier certificates)."""
    c = 1.0 / lam.max()
    if lam.min() * c < alpha:
        c = alpha / lam.min()
    return u * c, lam * c


def _agent_gap(gbar_i, alpha, tol_r, backend=None):
    r_upper = max(0.0, float(-gbar_i.min()))
    ok, u, lam = _agent_feasible(gbar_i, 0.0, alpha, backend)
    if ok:
        return 0.0, u, lam, 1
    iters = 1
    lo = 0.0
    hi = r_upper
    ok_hi, u_hi, lam_hi = _agent_feasible(gbar_i, hi, alpha, backend)
    iters += 1
    if not ok_hi:
        # analytically feasible at r_upper via u == 0; fall back to that witness
        T = gbar_i.shape[0]
        u_hi, lam_hi = np.zeros(T), np.full(T, alpha)
    while hi - lo > tol_r:
        mid = 0.5 * (lo + hi)
        ok, u, lam = _agent_feasible(gbar_i, mid, alpha, backend)
        iters += 1
        if ok:
            hi, u_hi, lam_hi = mid, u, lam
        else:
            lo = mid
    return hi, u_hi, lam_hi, iters


def pareto_gap(
    d: RPDataset,
    alpha: float = ALPHA_DEFAULT,
    tol_r: float = TOL_R,
    backend=None,
) -> GapResult:
    """Smallest relaxation r making the inequality system feasible.

    Feasibility is monotone in r (every constraint relaxes as r grows), so
    per-agent bisection over [0, r_upper] is exact to tol_r; the overall gap
    is the max of the per-agent gaps.
    """
    if alpha <= 0 or tol_r <= 0:
        raise ValueError("alpha and tol_r must be positive")
    T, M = d.T, d.M
    gaps = []
    u = np.zeros((T, M))
    lam = np.zeros((T, M))
    total_iters = 0
    for i in range(M):
        g_i, u_i, lam_i, iters = _agent_gap(d.gbar[:, :, i], alpha, tol_r, backend)
        u_i, lam_i = _normalize_agent_cert(u_i, lam_i, alpha)
        gaps.append(g_i)
        u[:, i], lam[:, i] = u_i, lam_i
        total_iters += iters
    gap = max(gaps)
    cert = ParetoCertificate(u, lam, gap, alpha)
    return GapResult(gap, cert, tuple(gaps), total_iters)


def empirical_pareto_gap(
    d: RPDataset,
    alpha: float = ALPHA_DEFAULT,
    tol_r: float = TOL_R,
    backend=None,
) -> GapResult:
    """Gap on sample-mean budget values (the dataset already stores them).

    Identical computation to :func:`pareto_gap`; exposed separately so that
    callers distinguish the exact gap from its finite-sample estimate.
    """
    return pareto_gap(d, alpha, tol_r, backend)


# --- combinatorial tests ----------------------------------------------------


def _closure(R: NDArray[np.bool_]) -> NDArray[np.bool_]:
    """Transitive closure by Floyd-Warshall on a boolean relation."""
    H = R.copy()
    T = H.shape[0]
    for mid in range(T):
        H |= H[:, mid : mid + 1] & H[mid : mid + 1, :]
    return H


def mm_garp(d: RPDataset, printed_form: bool = False) -> bool:
    """Revealed-preference consistency, checked per agent.

    Relation: k R j iff gbar[k,j,i] <= gbar[k,k,i] (period j's play affordable
    under period k's budget).  Standard verdict: for every k, j with k H j
    (H the transitive closure), gbar[j,k,i] >= gbar[j,j,i].

    ``printed_form=True`` applies the direct relation R in the implication and
    compares against gbar[k,k,i] on the right-hand side instead; kept for
    comparison only.
    """
    for i in range(d.M):
        g = d.gbar[:, :, i]
        diag = np.diag(g)
        R = g <= diag[:, None]
        if printed_form:
            # k R j  =>  g_j(mu_k) >= g_k(mu_k)
            bad = R & (g.T < diag[:, None])
        else:
            H = _closure(R)
            # k H j  =>  g_j(mu_k) >= g_j(mu_j)
            bad = H & (g.T < diag[None, :])
        if bad.any():
            return False
    return True


def garp_f(d: RPDataset, F: float) -> bool:
    """GARP with additive budget slack F, on satiated budgets gbar + 1."""
    if F < 0:
        raise ValueError("F must be >= 0")
    for i in range(d.M):
        g = d.gbar[:, :, i] + 1.0
        diag = np.diag(g)
        R = g + F <= diag[:, None]
        H = _closure(R)
        # k H j  =>  g_j(mu_j) <= g_j(mu_k) + F
        bad = H & (diag[None, :] > g.T + F)
        if bad.any():
            return False
    return True


def garp_f_threshold(d: RPDataset, tol: float = 1e-4, F_hi: float | None = None) -> float:
    """Smallest F at which garp_f passes, located by bisection.

    garp_f is monotone in F: growing F both empties the relation and loosens
    the verdict.
    """
    if garp_f(d, 0.0):
        return 0.0
    if F_hi is None:
        F_hi = max(0.0, float(-d.gbar.min())) + 2.0
    lo, hi = 0.0, F_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if garp_f(d, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _garp_e(g: NDArray[np.float64], e: float) -> bool:
    diag = np.diag(g)
    R = g <= e * diag[:, None]
    H = _closure(R)
    # t H s  =>  e * g_s(mu_s) <= g_s(mu_t)
    bad = H & (e * diag[None, :] > g.T)
    return not bad.any()


def ccei_scalar(d: RPDataset, agent: int, tol_e: float = 1e-4) -> float:
    """Largest common efficiency e in [0,1] passing GARP_e for one agent.

    Uses satiated budgets gbar + 1 so that budget values are positive and the
    multiplicative deflation e is meaningful.
    """
    if not 0 < tol_e < 1:
        raise ValueError("tol_e must be in (0,1)")
    g = d.gbar[:, :, agent] + 1.0
    if _garp_e(g, 1.0):
        return 1.0
    lo, hi = 0.0, 1.0  # passing is monotone decreasing in e
    while hi - lo > tol_e:
        mid = 0.5 * (lo + hi)
        if _garp_e(g, mid):
            lo = mid
        else:
            hi = mid
    return lo


# --- concentration bound ----------------------------------------------------


def hoeffding_confidence(
    eps: float, N: int, T: int, M: int, G: float, c: float = 0.0
) -> float:
    """Lower bound on P(empirical gap <= c + eps), per-sample range G.

    Implemented verbatim as the printed double product with per-factor
    exponent T (net exponent T^2 * M); the bound does not depend on c.
    """
    if eps < 0 or N < 1 or G <= 0:
        raise ValueError("require eps >= 0, N >= 1, G > 0")
    del c  # the bound is uniform in the offset
    inner = max(1.0 - 2.0 * np.exp(-2.0 * eps * eps * N / (G * G)), 0.0)
    return float(inner ** (T * T * M))


# --- utility reconstruction -------------------------------------------------


def reconstruct_utility(cert: ParetoCertificate, d: RPDataset, agent: int, tol: float = 1e-6):
    """Concave utility for one agent from a feasibility certificate.

    Returns gamma -> min_s (u_s + lam_s * g_s(gamma)): the lower envelope of
    the supporting affine-in-g pieces.  At certificate relaxation r <= tol_r
    the observed strategies maximize this utility on their own budgets.
    """
    if not 0 <= agent < d.M:
        raise IndexError(f"agent index {agent} out of range")
    if not cert.validates(d, tol=max(tol, 1e-7)):
        raise ValueError("certificate does not validate against the dataset")
    u = cert.u[:, agent].copy()
    lam = cert.lam[:, agent].copy()
    g_fns: list[ConstraintFunction] = [d.constraints[t][agent] for t in range(d.T)]

    def utility(gamma) -> float:
        vals = [u[s] + lam[s] * eval_constraint(g_fns[s], gamma) for s in range(d.T)]
        return float(min(vals))

    return utility


# --- rank optimality --------------------------------------------------------


@dataclass(frozen=True)
class PreferenceProfile:
    """M strict rankings over D outcomes plus homogeneous utility levels.

    ``rankings[j][p]`` is the outcome at position p (0 = most preferred) of
    agent j's ranking; ``levels[p]`` is the common utility of a p-th-ranked
    outcome, weakly decreasing in p.
    """

    rankings: tuple[tuple[int, ...], ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        D = len(self.levels)
        for rk in self.rankings:
            if sorted(rk) != list(range(D)):
                raise ValueError(f"ranking {rk} is not a permutation of 0..{D-1}")
        if any(self.levels[p] < self.levels[p + 1] for p in range(D - 1)):
            raise ValueError("utility levels must be weakly decreasing")

    @property
    def D(self) -> int:
        return len(self.levels)

    @property
    def M(self) -> int:
        return len(self.rankings)

    def positions(self) -> NDArray[np.int_]:
        """pos[j, o] = 1-based position of outcome o in agent j's ranking."""
        pos = np.empty((self.M, self.D), dtype=int)
        for j, rk in enumerate(self.rankings):
            for p, o in enumerate(rk):
                pos[j, o] = p + 1
        return pos

    def rnk(self) -> NDArray[np.int_]:
        """rnk[k-1, o] = number of agents ranking outcome o within their top k."""
        pos = self.positions()
        ks = np.arange(1, self.D + 1)
        return (pos[None, :, :] <= ks[:, None, None]).sum(axis=1)

    def social_utilities(self) -> NDArray[np.float64]:
        """Sum over agents of the homogeneous utility of each outcome."""
        levels = np.asarray(self.levels, dtype=float)
        return levels[self.positions() - 1].sum(axis=0)


def rank_optimality_check(p: PreferenceProfile, strategy, tol: float = 1e-9) -> bool:
    """True iff the strategy attains the maximal expected k-rank for every k."""
    strategy = np.asarray(strategy, dtype=float)
    if strategy.shape != (p.D,) or np.any(strategy < -tol) or abs(strategy.sum() - 1.0) > 1e-9:
        raise ValueError("strategy must be a probability vector over the D outcomes")
    rnk = p.rnk()  # (D, D): k-index by outcome
    expected = rnk @ strategy
    maxrnk = rnk.max(axis=1)
    return bool(np.all(expected >= maxrnk - tol))
