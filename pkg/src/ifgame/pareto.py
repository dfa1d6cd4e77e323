"""Local Pareto-optimal allocations by distributed augmented-Lagrangian ascent.

The weighted-sum objective sum_i w_i r_i is maximized over the average
power constraints through the augmented Lagrangian

    L(P, lam) = sum_i w_i r_i(P)
              + sum_i lam_i * (pbar_i - E[P_i])
              - c * sum_i (pbar_i - E[P_i])^2

(quadratic penalty with the sign that penalizes constraint violation
under maximization).  The inner loop is a steepest-ascent coordination:
every player forms a candidate gradient step, and only the single player
whose candidate improves L the most is updated (ties broken by lowest
player index).  The outer loop raises or lowers the multipliers by
lam_i <- max(0, lam_i - alpha * (pbar_i - E[P_i])) until every player's
power residual is within eps_feas.

The problem is nonconvex, so the method converges to a local Pareto
point depending on the start; multi_start runs K seeded random starts
and keeps the allocation with the best sum rate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .game import GameSpec, PowerProfile, StateSpace, _powers, expected_rates


@dataclass(frozen=True)
class AlConfig:
    """Tuning knobs of the augmented-Lagrangian solver.

    ``delta = None`` scales the default ascent step by the largest state
    probability (0.05 / max_h pi(h)); gradient entries carry a pi(h)
    factor, so a fixed step would shrink with the state-space size.
    ``max_inner`` caps one ascent call, not the whole solve: a capped,
    still-ascending start simply continues in the next outer round.
    """

    c: float = 10.0
    alpha_mult: float = 10.0
    delta: float | None = None
    eps_grad: float = 1e-4
    eps_feas: float = 1e-4
    max_outer: int = 200
    max_inner: int = 300
    starts: int = 10
    seed: int = 0

    def __post_init__(self):
        if min(self.c, self.alpha_mult, self.eps_grad, self.eps_feas) <= 0:
            raise ValueError("c, alpha_mult, eps_grad, eps_feas must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.starts < 1:
            raise ValueError("need at least one start")


@dataclass(frozen=True)
class StartResult:
    profile: PowerProfile
    sum_rate: float
    outer_iterations: int
    feasibility_residuals: np.ndarray
    converged: bool
    multipliers: np.ndarray
    seed_key: tuple[int, int]


@dataclass(frozen=True)
class ParetoReport:
    best: PowerProfile
    best_sum_rate: float
    per_start: list[StartResult]
    multipliers: np.ndarray
    converged: bool
    trajectories: list[list[float]] | None = None


def _slack(space, P, pbar):
    """pbar_i - E[P_i], shape (..., N)."""
    return pbar - P @ space.probs


def augmented_lagrangian(spec: GameSpec, space: StateSpace, prof, lambdas,
                         c: float) -> float:
    """Value of L(P, lam); scalar for a single profile."""
    return float(_lagrangian(spec, space, _powers(prof),
                             np.asarray(lambdas, float), c))


def _lagrangian(spec, space, P, lam, c):
    slack = _slack(space, P, spec.pbar)
    value = expected_rates(spec, space, P) @ spec.weights
    return value + np.einsum('...i,...i->...', lam, slack) - c * (slack ** 2).sum(axis=-1)


def _grad_all(spec, space, P, lam, c):
    """Gradient of L w.r.t. every power variable, shape (..., N, N1).

    Per state h:  dL/dP_i(h) = pi(h) * [ w_i g_ii A_i
        - sum_{j != i} w_j |h_ji|^2 s_j A_j B_j  - lam_i + 2c (pbar_i - E[P_i]) ]
    with g_ii = alpha_i |h_ii|^2, s_j the received own signal, A_j and
    B_j the reciprocals of (1 + I_j + s_j) and (1 + I_j).
    """
    received = np.einsum('kij,...jk->...ki', space.gains, P)
    diag = np.einsum('kii->ki', space.gains)
    own = np.einsum('ki,...ik->...ki', diag, P)
    signal = spec.alpha * own                       # s_j at [..., k, j]
    interf = 1.0 + received - own                   # 1 + I_j
    a = 1.0 / (interf + signal)
    b = 1.0 / interf
    w_sab = spec.weights * signal * a * b
    cross = np.einsum('kji,...kj->...ki', space.gains, w_sab)
    cross -= np.einsum('kii,...ki->...ki', space.gains, w_sab)
    direct = spec.weights * (spec.alpha * diag) * a
    slack = _slack(space, P, spec.pbar)
    per_state = direct - cross - lam[..., None, :] + 2.0 * c * slack[..., None, :]
    return np.einsum('k,...ki->...ik', space.probs, per_state)


def grad_player(spec: GameSpec, space: StateSpace, prof, lambdas, c: float,
                i: int) -> np.ndarray:
    """Analytic gradient of L w.r.t. player i's powers, one entry per state."""
    g = _grad_all(spec, space, _powers(prof), np.asarray(lambdas, float), c)
    return g[i]


def _projected_grad_norms(P, grads):
    """Norms of the gradients projected on the tangent cone of {P >= 0}."""
    pg = np.where(P > 0, grads, np.maximum(grads, 0.0))
    return np.sqrt((pg ** 2).sum(axis=-1))


def _ascent_batch(spec, space, P, lam, cfg, delta, active=None):
    """Steepest ascent on a batch of profiles; returns (P, iterations, hit_cap).

    Each iteration: every player of every active batch member forms the
    candidate Q_i = max(0, P_i + delta * grad_i); the single player whose
    candidate improves L the most is updated (argmax ties resolve to the
    lowest player index).  A batch member stops when every player's
    nonnegativity-projected gradient norm is below eps_grad (the
    projected norm never exceeds the raw norm, so this also covers the
    unconstrained stationarity test), or at the iteration cap.

    Players already below the tolerance are excluded from the candidate
    evaluation: their improvement is O(delta * eps_grad^2) and cannot win
    the argmax against any player still above it.

    All intermediates are shared between the gradient and the candidate
    values; candidate j differs from the base profile only in row j, so
    only receiver interference terms g_ij * (q_j - P_j) and player j's
    own signal are touched.
    """
    batch, n, _ = P.shape
    if active is None:
        active = np.ones(batch, dtype=bool)
    active = active.copy()
    iterations = np.zeros(batch, dtype=int)
    probs = space.probs
    diag = np.einsum('kii->ki', space.gains)
    geff = spec.alpha * diag                       # (S, N)
    w = spec.weights
    base_value = _lagrangian(spec, space, P, lam, cfg.c)
    for _ in range(cfg.max_inner):
        if not active.any():
            break
        pt = P.transpose(0, 2, 1)                  # (B, S, N)
        received = np.einsum('kij,bjk->bki', space.gains, P)
        own = diag * pt
        signal = spec.alpha * own
        interf = 1.0 + received - own
        slack = spec.pbar - P @ probs              # (B, N)
        # gradient of L for every player
        a = 1.0 / (interf + signal)
        w_sab = w * signal * a / interf
        cross = np.einsum('kji,bkj->bki', space.gains, w_sab) - diag * w_sab
        per_state = (w * geff * a - cross
                     - lam[:, None, :] + 2.0 * cfg.c * slack[:, None, :])
        grads = np.einsum('k,bki->bik', probs, per_state)
        proj = _projected_grad_norms(P, grads)
        eligible = (proj >= cfg.eps_grad) & active[:, None]
        active &= eligible.any(axis=1)
        if not active.any():
            break
        iterations += active
        q = np.maximum(0.0, P + delta * grads)
        sel_b, sel_i = eligible.nonzero()          # ordered by (b, then i)
        m = sel_b.size
        mrows = np.arange(m)
        dp = (q - P)[sel_b, sel_i]                 # (M, S)
        denom = interf[sel_b] + space.gains[:, :, sel_i].transpose(2, 0, 1) \
            * dp[:, :, None]
        denom[mrows, :, sel_i] = interf[sel_b, :, sel_i]
        cand_signal = signal[sel_b]
        cand_signal[mrows, :, sel_i] = geff[:, sel_i].T * q[sel_b, sel_i]
        cand_slack = slack[sel_b]
        cand_slack[mrows, sel_i] -= dp @ probs
        values = (np.einsum('k,mki,i->m', probs, np.log1p(cand_signal / denom), w)
                  + np.einsum('mi,mi->m', lam[sel_b], cand_slack)
                  - cfg.c * (cand_slack ** 2).sum(axis=-1))
        gain = values - base_value[sel_b]
        for b in active.nonzero()[0]:
            group = mrows[sel_b == b]
            pick = group[np.argmax(gain[group])]
            P[b, sel_i[pick], :] = q[b, sel_i[pick], :]
            base_value[b] = values[pick]
    return P, iterations, active


def _default_delta(space, cfg):
    return cfg.delta if cfg.delta is not None else 0.05 / float(space.probs.max())


def steepest_ascent(spec: GameSpec, space: StateSpace, prof, lambdas,
                    config: AlConfig = AlConfig()) -> PowerProfile:
    """Single-profile steepest ascent at fixed multipliers."""
    P = _powers(prof).copy()[None]
    lam = np.asarray(lambdas, float)[None]
    P, _, capped = _ascent_batch(spec, space, P, lam, config,
                                 _default_delta(space, config))
    if capped[0]:
        warnings.warn("steepest ascent hit the inner iteration cap before "
                      "reaching the gradient tolerance", stacklevel=2)
    return PowerProfile(powers=P[0])


def _cap_budgets(space, P, pbar):
    """Scale any row spending more than its budget down to equality."""
    avg = P @ space.probs
    target = np.broadcast_to(pbar, avg.shape)
    over = avg > target
    if np.any(over):
        P = P.copy()
        P[over] *= (target[over] / avg[over])[:, None]
    return P


def _solve_outer_batch(spec, space, P, lam, cfg, track=False):
    """Multiplier loop on a batch; members freeze as they become feasible."""
    batch = P.shape[0]
    delta = _default_delta(space, cfg)
    active = np.ones(batch, dtype=bool)
    outer_iters = np.zeros(batch, dtype=int)
    converged = np.zeros(batch, dtype=bool)
    residuals = np.zeros((batch, spec.n_players))
    trail = [[] for _ in range(batch)] if track else None
    for _ in range(cfg.max_outer):
        if not active.any():
            break
        P, _, capped = _ascent_batch(spec, space, P, lam, cfg, delta,
                                     active=active.copy())
        slack = _slack(space, P, spec.pbar)
        outer_iters += active
        residuals[active] = np.abs(slack[active])
        if track:
            rates = expected_rates(spec, space, P).sum(axis=-1)
            for b in active.nonzero()[0]:
                trail[b].append(float(rates[b]))
        # a member is done only when feasible *and* the ascent reached
        # stationarity (a capped inner loop keeps ascending next round)
        feasible = np.all(np.abs(slack) < cfg.eps_feas, axis=-1) & ~capped
        converged |= active & feasible
        active &= ~feasible
        update = active & (np.abs(slack).max(axis=-1) >= cfg.eps_feas)
        lam[update] = np.maximum(0.0, lam[update] - cfg.alpha_mult * slack[update])
    return P, lam, outer_iters, residuals, converged, trail


def solve_outer(spec: GameSpec, space: StateSpace, init, config: AlConfig = AlConfig(),
                lambdas=None) -> tuple[PowerProfile, np.ndarray, int, bool]:
    """Alternate steepest ascent and multiplier updates from one start.

    Returns (profile, multipliers, outer iterations, converged).  The
    returned profile has any slightly over-budget rows scaled back to
    exact budget equality, so it is always feasible in the strict sense.
    """
    P = _powers(init).copy()[None]
    lam = (np.zeros((1, spec.n_players)) if lambdas is None
           else np.asarray(lambdas, float).reshape(1, -1).copy())
    P, lam, iters, _, conv, _ = _solve_outer_batch(spec, space, P, lam, config)
    P = _cap_budgets(space, P[0], spec.pbar)
    return PowerProfile(powers=P), lam[0], int(iters[0]), bool(conv[0])


def random_start(spec: GameSpec, space: StateSpace, rng) -> np.ndarray:
    """Entries uniform on [0, pbar_i], then scaled so E[P_i] = pbar_i."""
    P = rng.uniform(0.0, 1.0, size=(spec.n_players, space.n_states))
    P *= spec.pbar[:, None]
    P *= (spec.pbar / (P @ space.probs))[:, None]
    return P


def multi_start(spec: GameSpec, space: StateSpace,
                config: AlConfig = AlConfig(), track=False) -> ParetoReport:
    """Run solve_outer from K seeded random starts, keep the best sum rate.

    Start k draws its profile from numpy's PCG64 seeded with
    (config.seed, k), so runs are reproducible and the start sequence is
    nested in K.  The best profile is chosen among converged (feasible)
    starts; if none converged the report carries converged=False and the
    best over all starts.
    """
    k = config.starts
    starts = np.stack([random_start(spec, space, np.random.default_rng([config.seed, j]))
                       for j in range(k)])
    lam = np.zeros((k, spec.n_players))
    P, lam, iters, residuals, conv, trail = _solve_outer_batch(
        spec, space, starts, lam, config, track=track)
    P = _cap_budgets(space, P, spec.pbar)
    rates = expected_rates(spec, space, P).sum(axis=-1)
    per_start = [StartResult(profile=PowerProfile(powers=P[j].copy()),
                             sum_rate=float(rates[j]),
                             outer_iterations=int(iters[j]),
                             feasibility_residuals=residuals[j].copy(),
                             converged=bool(conv[j]),
                             multipliers=lam[j].copy(),
                             seed_key=(config.seed, j))
                 for j in range(k)]
    eligible = conv if conv.any() else np.ones(k, dtype=bool)
    masked = np.where(eligible, rates, -np.inf)
    best = int(masked.argmax())
    return ParetoReport(best=per_start[best].profile,
                        best_sum_rate=per_start[best].sum_rate,
                        per_start=per_start,
                        multipliers=per_start[best].multipliers,
                        converged=bool(conv.any()),
                        trajectories=trail)
