"""Water-filling best response and iterative water-filling.

Against fixed opponents, player i's optimal policy is water-filling on
the per-state floors

    f_i(h) = (1 + sum_{j != i} |h_ij|^2 P_j(h)) / (alpha_i |h_ii|^2):

    P_i(h) = max{0, level - f_i(h)},

with the level chosen so the average-power budget holds with equality
(the rate is strictly increasing in own power, so the budget always
binds).  The level is found exactly by the sorted-breakpoint method.
Iterating the best response of every player (Jacobi or Gauss-Seidel
sweeps) converges to the unique Nash equilibrium whenever the
contraction condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameSpec, PowerProfile, StateSpace, _powers


@dataclass(frozen=True)
class WaterfillResult:
    """One player's water-filled powers, the water level, and the number
    of states with positive power."""

    powers: np.ndarray
    level: float
    active_states: int


@dataclass(frozen=True)
class IwfReport:
    profile: PowerProfile
    iterations: int
    residual_history: list[float]
    converged: bool
    scheme: str


def interference_floor(spec: GameSpec, space: StateSpace, prof, i: int) -> np.ndarray:
    """Per-state floors f_i(h) seen by player i under profile prof."""
    P = _powers(prof)
    received = np.einsum('kj,jk->k', space.gains[:, i, :], P)
    own = space.gains[:, i, i] * P[i]
    return (1.0 + received - own) / (spec.alpha[i] * space.gains[:, i, i])


def waterfill_levels(floors, probs, pbars) -> np.ndarray:
    """Water levels for a stack of problems; floors (..., N1), pbars (...,).

    Sorted-breakpoint method: with floors sorted ascending, the budget
    spent up to level L is piecewise linear in L, so the level solving
    the budget equation is found from cumulative sums in closed form.
    Ties in the floors are broken by state index (stable sort) so the
    result is deterministic.
    """
    floors = np.asarray(floors, dtype=float)
    probs = np.asarray(probs, dtype=float)
    pbars = np.asarray(pbars, dtype=float)
    if floors.shape[-1] == 0:
        raise ValueError("waterfill needs at least one state")
    order = np.argsort(floors, axis=-1, kind='stable')
    f = np.take_along_axis(floors, order, axis=-1)
    p = np.broadcast_to(probs, floors.shape)
    p = np.take_along_axis(p, order, axis=-1)
    mass = np.cumsum(p, axis=-1)
    spend = np.cumsum(p * f, axis=-1)
    with np.errstate(divide='ignore', invalid='ignore'):
        candidates = (pbars[..., None] + spend) / mass
    upper = np.concatenate([f[..., 1:],
                            np.full(f.shape[:-1] + (1,), np.inf)], axis=-1)
    k = np.argmax(candidates <= upper, axis=-1)
    return np.take_along_axis(candidates, k[..., None], axis=-1)[..., 0]


def waterfill(floors, probs, pbar: float) -> WaterfillResult:
    """Exact water-filling: powers = max{0, level - floors} with
    sum_h probs[h] * powers[h] == pbar."""
    floors = np.asarray(floors, dtype=float)
    level = float(waterfill_levels(floors, probs, np.asarray(float(pbar))))
    powers = np.maximum(0.0, level - floors)
    return WaterfillResult(powers=powers, level=level,
                           active_states=int(np.count_nonzero(powers)))


def interference_floors(spec: GameSpec, space: StateSpace, prof) -> np.ndarray:
    """Floors of every player under the same frozen profile, (N, N1)."""
    P = _powers(prof)
    received = np.einsum('kij,jk->ki', space.gains, P)
    diag = np.einsum('kii->ki', space.gains)
    return ((1.0 + received - diag * P.T) / (spec.alpha * diag)).T


def best_response(spec: GameSpec, space: StateSpace, prof, i: int) -> WaterfillResult:
    """Water-filling best response of player i to the others' powers."""
    return waterfill(interference_floor(spec, space, prof, i),
                     space.probs, float(spec.pbar[i]))


def waterfill_map(spec: GameSpec, space: StateSpace, prof) -> np.ndarray:
    """Best responses of all players to the same frozen profile, (N, N1)."""
    floors = interference_floors(spec, space, prof)
    levels = waterfill_levels(floors, space.probs, spec.pbar)
    return np.maximum(0.0, levels[:, None] - floors)


def wf_residual(spec: GameSpec, space: StateSpace, prof) -> float:
    """Fixed-point residual ||P - WF(P)||_inf; zero exactly at an NE."""
    P = _powers(prof)
    return float(np.abs(P - waterfill_map(spec, space, P)).max())


def iterate_waterfilling(spec: GameSpec, space: StateSpace, init=None,
                         scheme: str = "simultaneous", tol: float = 1e-8,
                         max_iter: int = 500) -> IwfReport:
    """Iterate the best-response map until the sweep moves no player.

    ``simultaneous`` updates every player from the same previous profile
    (Jacobi, the scheme the contraction analysis covers); ``sequential``
    updates players in index order using fresh values (Gauss-Seidel).
    Non-convergence within ``max_iter`` is reported, not raised.
    """
    if scheme not in ("simultaneous", "sequential"):
        raise ValueError(f"unknown scheme {scheme!r}")
    n = spec.n_players
    P = np.zeros((n, space.n_states)) if init is None else _powers(init).copy()
    history = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        if scheme == "simultaneous":
            new = waterfill_map(spec, space, P)
        else:
            new = P.copy()
            for i in range(n):
                new[i] = best_response(spec, space, new, i).powers
        residual = float(np.abs(new - P).max())
        history.append(residual)
        P = new
        if residual < tol:
            converged = True
            break
    return IwfReport(profile=PowerProfile(powers=P), iterations=iterations,
                     residual_history=history, converged=converged, scheme=scheme)
