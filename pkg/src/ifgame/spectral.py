"""Uniqueness and convergence condition checks for the power game.

The water-filling best response is affine in the opponents' powers with a
block-diagonal coupling operator: per state h,

    hhat(h)_i   = 1 / (alpha_i |h_ii|^2),
    Hhat(h)_ij  = |h_ij|^2 / (alpha_i |h_ii|^2)   (i != j, zero diagonal),

and Smax_ij = max_h Hhat(h)_ij.  Three checks decide which solver is
guaranteed to work:

  * contraction: (N-1) * max(H_c) / min(H_d) < 1, equivalent to
    rho(Smax) < 1 (all rows of Smax have that common sum), which makes
    iterative water-filling a contraction with a unique fixed point;
  * rho(Hhat) over the whole block-diagonal operator, equal to rho(Smax)
    because Smax is itself one of the blocks and dominates the rest;
  * positive (semi)definiteness of the quadratic form of
    Htilde = I + Hhat, tested on the symmetric part of each block; this
    is the monotonicity condition under which the regularized projection
    solver converges even when rho(Hhat) >= 1.

Spectral radii are computed by power iteration with the deterministic
all-ones start; the block-diagonal operator is never densified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import GameSpec, StateSpace


@dataclass(frozen=True)
class InterferenceOperator:
    """Blockwise interference coupling of the best-response map."""

    hhat: np.ndarray    # (N1, N): hhat[k] is the block of state k
    blocks: np.ndarray  # (N1, N, N): Hhat(h) per state, zero diagonals
    smax: np.ndarray    # (N, N): entrywise max of the blocks

    @property
    def n_states(self):
        return self.blocks.shape[0]

    @property
    def n_players(self):
        return self.blocks.shape[1]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of all solver-guarantee checks for one game."""

    rho_smax: float
    rho_hhat: float
    ratio_bound: float       # (N-1) * max cross gain / min direct gain
    contraction_ok: bool
    htilde_psd: bool
    htilde_pd: bool
    min_sym_eig: float


def build_operator(spec: GameSpec, space: StateSpace) -> InterferenceOperator:
    """Assemble hhat, the Hhat blocks and Smax for an enumerated game.

    alpha_i is folded into the effective direct gain alpha_i * |h_ii|^2.
    """
    diag = np.einsum('kii->ki', space.gains)
    geff = spec.alpha * diag
    blocks = space.gains / geff[:, :, None]
    n = space.n_players
    blocks[:, np.arange(n), np.arange(n)] = 0.0
    return InterferenceOperator(hhat=1.0 / geff, blocks=blocks,
                                smax=blocks.max(axis=0))


def _rho_batch(blocks, tol=1e-12, max_iter=10_000):
    """Spectral radii of a stack of square nonnegative matrices.

    Power iteration on A + I (shift keeps iterates strictly positive and
    preserves rho(A) = rho(A+I) - 1 for nonnegative A), all-ones start,
    with Collatz-Wielandt bounds min_i (Bx)_i/x_i <= rho(B) <= max_i as
    the convergence certificate.  For a matrix with equal row sums the
    bounds coincide at the first step, so the row sum is returned exactly.
    """
    blocks = np.asarray(blocks, dtype=float)
    k, n, _ = blocks.shape
    x = np.ones((k, n))
    hi = np.empty(k)
    lo = np.empty(k)
    for _ in range(max_iter):
        y = np.einsum('kij,kj->ki', blocks, x) + x
        ratios = y / x
        hi = ratios.max(axis=1)
        lo = ratios.min(axis=1)
        if np.all(hi - lo <= tol * hi):
            break
        x = y / y.max(axis=1, keepdims=True)
    return 0.5 * (hi + lo) - 1.0


def spectral_radius(matrix, tol=1e-12, max_iter=10_000) -> float:
    """rho(A) of a square nonnegative matrix by power iteration."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    return float(_rho_batch(a[None], tol=tol, max_iter=max_iter)[0])


def rho_blockdiag(op: InterferenceOperator) -> float:
    """rho of the block-diagonal operator: max over blocks of rho(Hhat(h))."""
    return float(_rho_batch(op.blocks).max())


def contraction_condition(spec: GameSpec) -> tuple[float, bool]:
    """Contraction ratio (N-1) * max(H_c) / min(H_d) and whether it is < 1."""
    if spec.n_players == 1:
        return 0.0, True
    ratio = (spec.n_players - 1) * spec.gains.cross.max() / spec.gains.direct.min()
    return float(ratio), bool(ratio < 1.0)


def definiteness(op: InterferenceOperator) -> tuple[bool, bool, float]:
    """Quadratic-form definiteness of Htilde = I + Hhat.

    Returns (psd, pd, min_sym_eig) where min_sym_eig is the smallest
    eigenvalue over all blocks of I + (Hhat(h) + Hhat(h)^T)/2.  The
    symmetric part is what bounds (P-V)^T Htilde (P-V), which is the
    quantity the monotonicity analysis needs; for nonsymmetric blocks it
    is not implied by eigenvalues having positive real parts.
    """
    sym = 0.5 * (op.blocks + op.blocks.transpose(0, 2, 1))
    n = op.n_players
    sym[:, np.arange(n), np.arange(n)] += 1.0
    m = float(np.linalg.eigvalsh(sym)[:, 0].min())
    return bool(m >= -1e-10), bool(m > 1e-10), m


def condition_report(spec: GameSpec, space: StateSpace,
                     op: InterferenceOperator | None = None) -> ConditionReport:
    """Run every check once and collect the results."""
    if op is None:
        op = build_operator(spec, space)
    rho_s = spectral_radius(op.smax)
    ratio, _ = contraction_condition(spec)
    psd, pd, min_eig = definiteness(op)
    return ConditionReport(
        rho_smax=rho_s,
        rho_hhat=rho_blockdiag(op),
        ratio_bound=ratio,
        contraction_ok=bool(rho_s < 1.0),
        htilde_psd=psd,
        htilde_pd=pd,
        min_sym_eig=min_eig,
    )
