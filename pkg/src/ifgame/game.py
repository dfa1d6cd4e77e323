"""Stochastic power-allocation game on a Gaussian interference channel.

N transmitter-receiver pairs share a channel whose power gains change
i.i.d. from slot to slot.  Direct gains |h_ii|^2 take values in a finite
alphabet H_d, cross gains |h_ij|^2 (i != j) in H_c, each link with its own
categorical distribution.  Player i transmits with a stationary policy
P_i(h) and receives

    SINR_i = alpha_i |h_ii|^2 P_i(h) / (1 + sum_{j != i} |h_ij|^2 P_j(h)),

noise power normalized to 1.  Expected rates are in nats
(natural logarithm), and the budget constraint is on the average power
E_pi[P_i] <= Pbar_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_STATE_CAP = 100_000

#: slack allowed when checking the average-power budget
FEAS_TOL = 1e-9


class StateSpaceTooLargeError(ValueError):
    """Raised when the full channel-state enumeration would exceed the cap."""


def _positive_vector(x, n, name):
    v = np.array(x, dtype=float)  # owned copy; frozen below
    if v.ndim == 0:
        v = np.full(n, float(v))
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got shape {v.shape}")
    if not np.all(v > 0):
        raise ValueError(f"{name} must be strictly positive")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class GainAlphabets:
    """Finite alphabets of direct and cross power gains."""

    direct: np.ndarray
    cross: np.ndarray

    def __post_init__(self):
        for name in ("direct", "cross"):
            v = np.array(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size == 0:
                raise ValueError(f"{name} gain alphabet must be a non-empty vector")
            if not np.all(v > 0):
                raise ValueError(f"{name} gains must be strictly positive")
            v.flags.writeable = False
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class LinkDistribution:
    """Per-link categorical distributions over the gain alphabets.

    ``direct[i]`` is the distribution of link (i, i) over the direct
    alphabet, ``cross[i, j]`` of link (i, j), i != j, over the cross
    alphabet.  Rows must sum to 1 within 1e-12.
    """

    direct: np.ndarray  # (N, n1)
    cross: np.ndarray   # (N, N, n2); diagonal rows unused

    def __post_init__(self):
        d = np.array(self.direct, dtype=float)
        c = np.array(self.cross, dtype=float)
        if d.ndim != 2 or c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[0] != d.shape[0]:
            raise ValueError("inconsistent link-distribution shapes")
        n = d.shape[0]
        if np.any(d < 0) or np.any(c < 0):
            raise ValueError("link probabilities must be nonnegative")
        if np.any(np.abs(d.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("direct-link probabilities must sum to 1")
        off = [(i, j) for i in range(n) for j in range(n) if i != j]
        for i, j in off:
            if abs(c[i, j].sum() - 1.0) > 1e-12:
                raise ValueError(f"cross-link ({i},{j}) probabilities must sum to 1")
        d.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "direct", d)
        object.__setattr__(self, "cross", c)

    @classmethod
    def uniform(cls, n_players, n_direct, n_cross):
        d = np.full((n_players, n_direct), 1.0 / n_direct)
        c = np.full((n_players, n_players, n_cross), 1.0 / n_cross)
        return cls(direct=d, cross=c)


@dataclass(frozen=True)
class GameSpec:
    """Players, gain alphabets, link distributions, budgets and weights."""

    n_players: int
    gains: GainAlphabets
    dists: LinkDistribution
    pbar: np.ndarray
    alpha: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        n = self.n_players
        if n < 1:
            raise ValueError("need at least one player")
        object.__setattr__(self, "pbar", _positive_vector(self.pbar, n, "pbar"))
        alpha = np.ones(n) if self.alpha is None else self.alpha
        weights = np.ones(n) if self.weights is None else self.weights
        object.__setattr__(self, "alpha", _positive_vector(alpha, n, "alpha"))
        object.__setattr__(self, "weights", _positive_vector(weights, n, "weights"))
        if self.dists.direct.shape != (n, self.gains.direct.size):
            raise ValueError("direct link distribution shape does not match alphabet")
        if self.dists.cross.shape != (n, n, self.gains.cross.size):
            raise ValueError("cross link distribution shape does not match alphabet")

    @classmethod
    def symmetric(cls, n_players, direct, cross, pbar, alpha=None, weights=None):
        """Game with uniform link distributions over the given alphabets."""
        gains = GainAlphabets(direct=np.asarray(direct, float),
                              cross=np.asarray(cross, float))
        dists = LinkDistribution.uniform(n_players, gains.direct.size, gains.cross.size)
        return cls(n_players=n_players, gains=gains, dists=dists, pbar=pbar,
                   alpha=alpha, weights=weights)


@dataclass(frozen=True)
class ChannelState:
    """One joint channel realization; entry (i, j) is the power gain
    from transmitter j to receiver i."""

    gains: np.ndarray

    def __post_init__(self):
        g = np.array(self.gains, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("state gains must be a square matrix")
        if not np.all(g > 0):
            raise ValueError("state gains must be strictly positive")
        g.flags.writeable = False
        object.__setattr__(self, "gains", g)


@dataclass(frozen=True)
class StateSpace:
    """Enumerated channel states with their joint probabilities.

    ``gains[k]`` is the N x N gain matrix of state k, ``probs[k]`` its
    probability.  The ordering is deterministic: links in row-major order
    (1,1), (1,2), ..., (N,N), the last link's alphabet index varying
    fastest (plain mixed-radix / lexicographic enumeration).
    """

    gains: np.ndarray  # (N1, N, N)
    probs: np.ndarray  # (N1,)

    def __post_init__(self):
        g = np.array(self.gains, dtype=float)
        p = np.array(self.probs, dtype=float)
        if g.ndim != 3 or g.shape[1] != g.shape[2] or p.shape != (g.shape[0],):
            raise ValueError("inconsistent state-space shapes")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("state probabilities must sum to 1")
        g.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "probs", p)

    @property
    def n_states(self):
        return self.gains.shape[0]

    @property
    def n_players(self):
        return self.gains.shape[1]

    def state(self, k):
        return ChannelState(gains=self.gains[k])


@dataclass(frozen=True)
class PowerProfile:
    """Stationary powers of all players; entry (i, k) is P_i at state k."""

    powers: np.ndarray  # (N, N1)

    def __post_init__(self):
        p = np.array(self.powers, dtype=float)
        if p.ndim != 2:
            raise ValueError("powers must be an N x N1 matrix")
        if np.any(p < 0):
            raise ValueError("powers must be nonnegative")
        p.flags.writeable = False
        object.__setattr__(self, "powers", p)


def _powers(prof):
    """Accept a PowerProfile or a bare (N, N1) array."""
    return prof.powers if isinstance(prof, PowerProfile) else np.asarray(prof, float)


def enumerate_states(spec: GameSpec, cap: int = DEFAULT_STATE_CAP) -> StateSpace:
    """Enumerate the full Cartesian product of per-link gain alphabets.

    The joint probability of a state is the product of its per-link
    probabilities (links are independent).  Raises
    StateSpaceTooLargeError when n1^N * n2^(N(N-1)) exceeds ``cap``.
    """
    n = spec.n_players
    links = [(i, j) for i in range(n) for j in range(n)]
    sizes = [spec.gains.direct.size if i == j else spec.gains.cross.size
             for (i, j) in links]
    required = float(np.prod([float(s) for s in sizes]))
    if required > cap:
        raise StateSpaceTooLargeError(
            f"state space needs {required:.0f} entries, cap is {cap}")
    total = int(required)
    digits = np.unravel_index(np.arange(total), sizes)
    gains = np.empty((total, n, n))
    probs = np.ones(total)
    for link, (i, j) in enumerate(links):
        if i == j:
            alphabet, pvec = spec.gains.direct, spec.dists.direct[i]
        else:
            alphabet, pvec = spec.gains.cross, spec.dists.cross[i, j]
        gains[:, i, j] = alphabet[digits[link]]
        probs *= pvec[digits[link]]
    return StateSpace(gains=gains, probs=probs)


def sinr(spec: GameSpec, state: ChannelState, p, i: int) -> float:
    """SINR of player i at one state for per-player powers p (noise = 1)."""
    g = state.gains if isinstance(state, ChannelState) else np.asarray(state, float)
    p = np.asarray(p, dtype=float)
    interference = g[i] @ p - g[i, i] * p[i]
    return float(spec.alpha[i] * g[i, i] * p[i] / (1.0 + interference))


def _sinr_table(spec, space, P):
    """SINR of every player at every state; P has shape (..., N, N1)."""
    # received[..., k, i] = sum_j |h_ij|^2 P_j(k)
    received = np.einsum('kij,...jk->...ki', space.gains, P)
    diag = np.einsum('kii->ki', space.gains)
    own = np.einsum('ki,...ik->...ki', diag, P)
    signal = spec.alpha * own
    return signal / (1.0 + received - own)


def rate_table(spec, space, prof):
    """Per-state rates log(1 + SINR_i(h)) in nats, shape (N1, N)."""
    return np.log1p(_sinr_table(spec, space, _powers(prof)))


def expected_rate(spec: GameSpec, space: StateSpace, prof, i: int) -> float:
    """Expected rate of player i, E_h[log(1 + SINR_i)], in nats."""
    return float(space.probs @ rate_table(spec, space, prof)[:, i])


def expected_rates(spec, space, prof):
    """Expected rates of all players at once, shape (..., N)."""
    P = _powers(prof)
    rates = np.log1p(_sinr_table(spec, space, P))
    return np.einsum('k,...ki->...i', space.probs, rates)


def average_power(space: StateSpace, prof, i: int) -> float:
    """Average transmit power E_h[P_i(h)] of player i."""
    return float(_powers(prof)[i] @ space.probs)


def average_powers(space, prof):
    return _powers(prof) @ space.probs


def sum_rate(spec: GameSpec, space: StateSpace, prof) -> float:
    """Total expected rate over all players (nats)."""
    return float(expected_rates(spec, space, prof).sum())


def weighted_sum_rate(spec, space, prof):
    return float(spec.weights @ expected_rates(spec, space, prof))


def is_feasible(space: StateSpace, prof, pbar) -> np.ndarray:
    """Per-player feasibility: nonnegative and E[P_i] <= pbar_i + 1e-9."""
    P = _powers(prof)
    pbar = np.asarray(pbar, dtype=float)
    nonneg = np.all(P >= 0, axis=-1)
    return nonneg & (P @ space.probs <= pbar + FEAS_TOL)
