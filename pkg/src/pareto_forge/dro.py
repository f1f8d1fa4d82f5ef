"""Wasserstein distributionally-robust social-optimality gap estimation.

With only finite samples of each observed strategy, the Pareto gap is computed
against the worst distribution in a Wasserstein-style ambiguity set around the
empirical samples.  The resulting semi-infinite program is solved by the
exchange (cutting) method:

* the **master problem** minimizes ε·v_{N+1} + (1/N)·Σ_k v_k over the utility
  numbers ψ = (u, λ) subject to the accumulated scenario cuts;
* the **constraint-violation oracle** searches the scenario space Γ for the
  most violated cut of the current master solution;
* the loop alternates the two until the maximum violation drops below δ.

Key structural fact used throughout: h(ψ, Φ) is a pointwise maximum of terms
that each touch a single scenario block γ_s^i, so worst-case searches only
ever need to deviate one block from the samples at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .core import RPDataset, eval_constraint_many
from .game import probe_feasible_set


@dataclass(frozen=True)
class PsiVector:
    """Utility numbers u and multipliers λ, both T×M, inside their boxes."""

    u: NDArray[np.float64]
    lam: NDArray[np.float64]

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        if u.shape != lam.shape or u.ndim != 2:
            raise ValueError("u and lam must be T x M arrays of equal shape")
        if np.any(lam <= 0):
            raise ValueError("lam must be positive")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", lam)


@dataclass
class ScenarioSet:
    """Per-sample-index accumulated cuts: cuts[k] is a list of (T, M, k) scenarios."""

    N: int
    cuts: list[list[NDArray[np.float64]]] = field(default_factory=list)

    def __post_init__(self):
        if not self.cuts:
            self.cuts = [[] for _ in range(self.N)]

    @property
    def total(self) -> int:
        return sum(len(c) for c in self.cuts)


@dataclass(frozen=True)
class DROConfig:
    """Boxes, bounds and search budgets for the robust estimation loop."""

    lambda_hat: float = 0.1  # lower bound of the λ box
    lam_max: float = 1.0
    u_bound: float = 1.0  # u box is [-u_bound, u_bound]
    G: float | None = None  # |g| range bound over Γ; None → from dataset
    v_bound: float | None = None  # V; None → 2·u_bound/λ̂ + G (augmented)
    use_paper_v: bool = False  # V = 2·u_bound/λ̂ exactly as printed
    grid_points: int = 9  # per-axis grid in the per-block scenario searches
    multistarts: int = 3
    subgrad_iters: int = 80
    v_grid: int = 9
    max_exchange_iters: int = 60
    seed: int = 0

    def big_v(self, G: float) -> float:
        if self.v_bound is not None:
            return self.v_bound
        v = 2.0 * self.u_bound / self.lambda_hat
        return v if self.use_paper_v else v + G


def _dataset_g_bound(d: RPDataset) -> float:
    """Range bound G: |g| is at most max_t,i |g_t^i(0)| + spread over budgets."""
    vals = [abs(float(c.b)) + abs(float(c.a_t)) + 1.0 for row in d.constraints for c in row]
    return max(max(vals), float(np.abs(d.gbar).max()) + 1.0)


def _samples(d: RPDataset) -> NDArray[np.float64]:
    """(T, M, N, k) sample tensor (requires a common N across blocks)."""
    Ns = {np.asarray(s.samples).shape[0] for row in d.strategies for s in row}
    if len(Ns) != 1:
        raise ValueError("dataset blocks disagree on sample count N")
    return np.stack(
        [np.stack([np.asarray(s.samples, dtype=float) for s in row]) for row in d.strategies]
    )


def _g_tensor(d: RPDataset, phi: NDArray[np.float64]) -> NDArray[np.float64]:
    """G[t, s, i] = g_t^i(γ_s^i) for a scenario array phi of shape (T, M, k)."""
    T, M = d.T, d.M
    out = np.empty((T, T, M))
    for t in range(T):
        for i in range(M):
            out[t, :, i] = eval_constraint_many(d.constraints[t][i], phi[:, i, :])
    return out


def h_value(psi: PsiVector, phi, d: RPDataset) -> float:
    """Closed-form relaxed-system optimum for a fixed ψ and scenario Φ.

    h(ψ, Φ) = max(0, max_{t,s,i} [(u_s^i − u_t^i)/λ_t^i − g_t^i(γ_s^i)]):
    for fixed utility numbers the smallest feasible relaxation r needs no LP.
    """
    phi = np.asarray(phi, dtype=float)
    G = _g_tensor(d, phi)
    u, lam = psi.u, psi.lam
    term = (u[None, :, :] - u[:, None, :]) / lam[:, None, :] - G
    return float(max(0.0, term.max()))


def wasserstein_ball_check(phi, d: RPDataset, eps: float) -> bool:
    """Σ_{t,i} min_k ‖γ_t^i − γ̂_{t,k}^i‖₂ ≤ eps for the scenario phi."""
    phi = np.asarray(phi, dtype=float)
    samp = _samples(d)  # (T, M, N, k)
    dist = np.linalg.norm(samp - phi[:, :, None, :], axis=-1).min(axis=-1)
    return bool(dist.sum() <= eps + 1e-12)


# --- master problem -----------------------------------------------------------


def _cut_data(d: RPDataset, samples, scen: ScenarioSet):
    """Stacked cut tensors: (G_all (J, T, T, M), dist (J,), k_index (J,))."""
    Gs, dists, kidx = [], [], []
    for k in range(scen.N):
        for phi in scen.cuts[k]:
            Gs.append(_g_tensor(d, phi))
            dists.append(np.linalg.norm(phi - samples[:, :, k, :], axis=-1).sum())
            kidx.append(k)
    return np.stack(Gs), np.array(dists), np.array(kidx, dtype=int)


def _cut_scores(u, lam, cut_data):
    """Per-cut h values and the argmax (t, s, i) index of each cut's max term."""
    Gs, dists, _kidx = cut_data
    term = (u[None, None, :, :] - u[None, :, None, :]) / lam[None, :, None, :] - Gs
    flat = term.reshape(len(dists), -1)
    arg = flat.argmax(axis=1)
    vals = flat[np.arange(len(dists)), arg]
    return np.maximum(vals, 0.0), arg


def _master_objective(u, lam, v_n1, cut_data, eps, N, two_v):
    """Objective value and optimal v_k for fixed (ψ, v_{N+1})."""
    Gs, dists, kidx = cut_data
    h, _arg = _cut_scores(u, lam, cut_data)
    scores = h - v_n1 * dists
    v = np.zeros(N)
    np.maximum.at(v, kidx, scores)
    v = np.clip(v, 0.0, two_v)
    return eps * v_n1 + v.sum() / N, v


def _psi_descent(u0, lam0, v_n1, cut_data, eps, N, two_v, cfg: DROConfig, u_lo, u_hi, l_lo, l_hi):
    """Projected subgradient descent over ψ for fixed v_{N+1}."""
    Gs, dists, kidx = cut_data
    shape = Gs.shape[1:]
    u, lam = u0.copy(), lam0.copy()
    best_obj, _ = _master_objective(u, lam, v_n1, cut_data, eps, N, two_v)
    best = (u.copy(), lam.copy())
    step0 = 0.2 * max(u_hi - u_lo, l_hi - l_lo)
    for it in range(cfg.subgrad_iters):
        h, arg = _cut_scores(u, lam, cut_data)
        scores = h - v_n1 * dists
        gu = np.zeros_like(u)
        gl = np.zeros_like(lam)
        any_grad = False
        for k in range(N):
            mask = kidx == k
            if not mask.any():
                continue
            idx = np.flatnonzero(mask)
            j = idx[int(scores[idx].argmax())]
            if scores[j] <= 0.0 or scores[j] >= two_v:
                continue  # clipped regions contribute zero subgradient
            t, s, i = np.unravel_index(arg[j], shape)
            gu[s, i] += 1.0 / (lam[t, i] * N)
            gu[t, i] -= 1.0 / (lam[t, i] * N)
            gl[t, i] -= (u[s, i] - u[t, i]) / (lam[t, i] ** 2 * N)
            any_grad = True
        if not any_grad:
            break
        step = step0 / np.sqrt(it + 1.0)
        u = np.clip(u - step * gu, u_lo, u_hi)
        lam = np.clip(lam - step * gl, l_lo, l_hi)
        obj, _ = _master_objective(u, lam, v_n1, cut_data, eps, N, two_v)
        if obj < best_obj:
            best_obj = obj
            best = (u.copy(), lam.copy())
    return best[0], best[1], best_obj


def master_solve(
    scen: ScenarioSet,
    d: RPDataset,
    eps: float,
    cfg: DROConfig,
    rng=None,
) -> tuple[PsiVector, NDArray[np.float64], float]:
    """Approximate minimizer of the cut-constrained master program.

    Outer refining grid over v_{N+1} ∈ [0, V/ε]; inner projected-subgradient
    descent over ψ with multistart; v_k recovered as the attained cut maxima
    clipped to [0, 2V].
    """
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    T, M, N = d.T, d.M, scen.N
    G = cfg.G if cfg.G is not None else _dataset_g_bound(d)
    V = cfg.big_v(G)
    two_v = 2.0 * V
    u_lo, u_hi = -cfg.u_bound, cfg.u_bound
    l_lo, l_hi = cfg.lambda_hat, cfg.lam_max
    center_u = np.zeros((T, M))
    center_l = np.full((T, M), 0.5 * (l_lo + l_hi))
    if scen.total == 0:
        psi = PsiVector(center_u, center_l)
        return psi, np.zeros(N + 1), 0.0

    samples = _samples(d)
    cut_data = _cut_data(d, samples, scen)
    vmax = V / eps if eps > 0 else two_v

    def solve_inner(v_n1):
        best = None
        starts = [(center_u, center_l)]
        for _ in range(cfg.multistarts - 1):
            starts.append(
                (
                    rng.uniform(u_lo, u_hi, size=(T, M)),
                    rng.uniform(l_lo, l_hi, size=(T, M)),
                )
            )
        for u0, lam0 in starts:
            u, lam, obj = _psi_descent(
                u0, lam0, v_n1, cut_data, eps, N, two_v, cfg, u_lo, u_hi, l_lo, l_hi
            )
            if best is None or obj < best[2]:
                best = (u, lam, obj)
        return best

    lo, hi = 0.0, vmax
    best = None
    for _round in range(2):
        grid = np.linspace(lo, hi, cfg.v_grid)
        results = [(v_n1, solve_inner(v_n1)) for v_n1 in grid]
        v_star, inner = min(results, key=lambda r: r[1][2])
        if best is None or inner[2] < best[1][2]:
            best = (v_star, inner)
        width = (hi - lo) / (cfg.v_grid - 1)
        lo = max(0.0, best[0] - width)
        hi = min(vmax, best[0] + width)
    v_n1, (u, lam, obj) = best
    _, v = _master_objective(u, lam, v_n1, cut_data, eps, N, two_v)
    psi = PsiVector(u, lam)
    return psi, np.concatenate([v, [v_n1]]), float(obj)


# --- constraint-violation oracle ---------------------------------------------


def _block_domain_grid(d: RPDataset, s: int, i: int, n: int):
    """Grid of feasible points of block (s, i)'s budget set, plus its corners."""
    fs = probe_feasible_set(d.constraints[s][i])
    hi = np.where(np.isfinite(fs.upper), fs.upper, 1.0)
    axes = [np.linspace(0.0, h, n) for h in hi]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, fs.dim)
    pts = [p for p in mesh if fs.contains(p)]
    return fs, np.array(pts) if pts else np.zeros((1, fs.dim))


def _block_term(d: RPDataset, psi: PsiVector, s: int, i: int, pts) -> NDArray[np.float64]:
    """max_t [(u_s^i − u_t^i)/λ_t^i − g_t^i(γ)] for each candidate γ in pts."""
    T = d.T
    vals = np.full(len(pts), -np.inf)
    for t in range(T):
        g = eval_constraint_many(d.constraints[t][i], pts)
        vals = np.maximum(vals, (psi.u[s, i] - psi.u[t, i]) / psi.lam[t, i] - g)
    return vals


@dataclass
class DROState:
    psi_hat: PsiVector
    v_hat: NDArray[np.float64]
    cv: NDArray[np.float64]
    iteration: int
    epsilon: float
    delta: float
    certified: bool = False


def _block_terms_at_samples(d: RPDataset, psi: PsiVector, samples) -> NDArray[np.float64]:
    """bt[s, i, n] = max_t [(u_s^i − u_t^i)/λ_t^i − g_t^i(γ̂_{s,n}^i)]."""
    T, M, N, _k = samples.shape
    bt = np.full((T, M, N), -np.inf)
    for i in range(M):
        pts = samples[:, i, :, :].reshape(T * N, -1)
        for t in range(T):
            g = eval_constraint_many(d.constraints[t][i], pts).reshape(T, N)
            vals = (psi.u[:, i, None] - psi.u[t, i]) / psi.lam[t, i] - g
            bt[:, i, :] = np.maximum(bt[:, i, :], vals)
    return bt


def _rest_tensor(bt: NDArray[np.float64]):
    """rest[s, i, n] = max over blocks other than (s, i) of bt[·, ·, n]."""
    T, M, N = bt.shape
    flat = bt.reshape(T * M, N)
    order = np.argsort(flat, axis=0)
    top_idx = order[-1]
    top = flat[top_idx, np.arange(N)]
    second = flat[order[-2], np.arange(N)] if T * M > 1 else np.full(N, -np.inf)
    rest = np.broadcast_to(top, (T * M, N)).copy()
    rest[top_idx, np.arange(N)] = second
    return rest.reshape(T, M, N)


def _cv_all(state: DROState, d: RPDataset, cfg: DROConfig, samples):
    """Most violated scenario per sample index, sharing per-block grids."""
    psi, v_hat = state.psi_hat, state.v_hat
    T, M, N, _kdim = samples.shape
    v_n1 = float(v_hat[-1])
    bt = _block_terms_at_samples(d, psi, samples)
    rest = _rest_tensor(bt)
    base_h = np.maximum(bt.reshape(T * M, N).max(axis=0), 0.0)  # (N,)
    best_val = base_h - v_hat[:N]  # zero-deviation scenario
    best_phi = [samples[:, :, k, :].copy() for k in range(N)]
    for s in range(T):
        for i in range(M):
            fs, pts = _block_domain_grid(d, s, i, cfg.grid_points)
            terms_grid = _block_term(d, psi, s, i, pts)
            span = float(np.where(np.isfinite(fs.upper), fs.upper, 1.0).max())
            for k in range(N):
                anchor = samples[s, i, k]
                rest_k = float(rest[s, i, k])

                def score_terms(terms, cands, anchor=anchor, rest_k=rest_k):
                    hvals = np.maximum(np.maximum(terms, rest_k), 0.0)
                    dist = np.linalg.norm(cands - anchor[None, :], axis=-1)
                    return hvals - v_n1 * dist

                cands = np.vstack([pts, anchor[None, :]])
                terms = np.concatenate([terms_grid, _block_term(d, psi, s, i, anchor[None, :])])
                vals = score_terms(terms, cands)
                j = int(vals.argmax())
                # local polish: shrinking pattern search around the grid argmax
                x = cands[j].copy()
                fx = float(vals[j])
                step = max(span / max(cfg.grid_points - 1, 1), 1e-6)
                for _ in range(20):
                    moves = []
                    for dim in range(fs.dim):
                        for sign in (1.0, -1.0):
                            cand = x.copy()
                            cand[dim] += sign * step
                            moves.append(fs.project(cand))
                    moves = np.stack(moves)
                    mvals = score_terms(_block_term(d, psi, s, i, moves), moves)
                    jj = int(mvals.argmax())
                    if mvals[jj] > fx + 1e-12:
                        x, fx = moves[jj].copy(), float(mvals[jj])
                    else:
                        step *= 0.5
                        if step < 1e-7:
                            break
                if fx - v_hat[k] > best_val[k]:
                    best_val[k] = fx - v_hat[k]
                    phi = samples[:, :, k, :].copy()
                    phi[s, i] = x
                    best_phi[k] = phi
    return best_val, best_phi


def constraint_violation(
    k: int, state: DROState, d: RPDataset, cfg: DROConfig | None = None, rng=None
) -> tuple[float, NDArray[np.float64]]:
    """Most violated scenario for sample index k under the current master point.

    Since h is a pointwise max of single-block terms and the distance penalty
    is additive and nonnegative, an optimal scenario deviates from the index-k
    samples in at most one block; each block is searched by a feasibility grid
    refined with a local polish around the best grid point.
    """
    cfg = cfg or DROConfig()
    samples = _samples(d)
    vals, phis = _cv_all(state, d, cfg, samples)
    return float(vals[k]), phis[k]


# --- exchange loop and robust gap --------------------------------------------


def exchange_loop(
    d: RPDataset,
    eps: float,
    delta: float,
    cfg: DROConfig | None = None,
) -> tuple[PsiVector, DROState, list[dict]]:
    """Alternate master solves and violation searches until max_k CV_k < δ."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    cfg = cfg or DROConfig()
    rng = np.random.default_rng(cfg.seed)
    samples = _samples(d)
    N = samples.shape[2]
    scen = ScenarioSet(N)
    trace: list[dict] = []
    state = None
    for it in range(1, cfg.max_exchange_iters + 1):
        psi, v_hat, obj = master_solve(scen, d, eps, cfg, rng=rng)
        state = DROState(psi, v_hat, np.zeros(N), it, eps, delta)
        cvs, phis = _cv_all(state, d, cfg, samples)
        state.cv = cvs
        trace.append(
            {
                "iter": it,
                "max_cv": float(cvs.max()),
                "master_objective": float(obj),
                "n_cuts_total": scen.total,
            }
        )
        if cvs.max() < delta:
            state.certified = True
            return psi, state, trace
        for k in range(N):
            if cvs[k] > 0:
                scen.cuts[k].append(phis[k])
    return state.psi_hat, state, trace


def robust_gap(psi_hat: PsiVector, d: RPDataset, eps: float, cfg: DROConfig | None = None) -> float:
    """Worst-case h over scenarios within total displacement eps of the samples.

    h decomposes over single-block terms, so the displacement budget is best
    spent on one block: for each block, search the union of eps-balls around
    its samples (intersected with the block's budget set).
    """
    cfg = cfg or DROConfig()
    samples = _samples(d)
    T, M, N, _k = samples.shape
    best = 0.0
    for s in range(T):
        for i in range(M):
            fs, pts = _block_domain_grid(d, s, i, cfg.grid_points)
            for k in range(N):
                anchor = samples[s, i, k]
                if eps <= 0:
                    cands = anchor[None, :]
                else:
                    within = pts[np.linalg.norm(pts - anchor[None, :], axis=-1) <= eps]
                    cands = np.vstack([within, anchor[None, :]])
                vals = _block_term(d, psi_hat, s, i, cands)
                j = int(vals.argmax())
                x, fx = cands[j].copy(), float(vals[j])
                step = max(eps / 2.0, 1e-6) if eps > 0 else 0.0
                while step > 1e-7:
                    moved = False
                    for dim in range(x.size):
                        for sign in (1.0, -1.0):
                            cand = x.copy()
                            cand[dim] += sign * step
                            cand = fs.project(cand)
                            if np.linalg.norm(cand - anchor) > eps + 1e-12:
                                continue
                            fc = float(_block_term(d, psi_hat, s, i, cand[None, :])[0])
                            if fc > fx + 1e-12:
                                x, fx, moved = cand, fc, True
                    if not moved:
                        step *= 0.5
                best = max(best, fx)
    return float(max(0.0, best))
