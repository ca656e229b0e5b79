"""Equilibrium-quality measures.

Nash gap and its entropy-regularized version for matrix games, the
generalized two-matrix diagnostic, the Nash-distribution (quantal response)
fixed point, and the Nash gap for stochastic games. The entropy-regularized
inner maximum is evaluated in closed form,

    max_mu (mu^T x + tau nu(mu)) = tau * logsumexp(x / tau),

attained at the softmax of x, rather than by numerical optimization over
the simplex.

The module also carries list-based twins of the matrix-game gaps; the
dynamics' recording loops call those to avoid array overhead on 2x2 and
3x3 games. Unit tests pin them to the public functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotZeroSum
from .games import JointPolicy, MatrixGame, StochasticGame, validate_joint_policy
from .ops import best_response_value, policy_value, softmax


def _tau_logsumexp(x: np.ndarray, tau: float) -> float:
    m = float(x.max())
    return m + tau * math.log(float(np.exp((x - m) / tau).sum()))


def _entropy_term(pi: np.ndarray) -> float:
    mask = pi > 0.0
    return float(-(pi[mask] * np.log(pi[mask])).sum()) + 0.0


def _matrix_joint(game: MatrixGame, joint: JointPolicy) -> JointPolicy:
    return validate_joint_policy(joint.pi1, joint.pi2, game)


def nash_gap_matrix(game: MatrixGame, joint: JointPolicy) -> float:
    """Sum over players of the best pure-deviation improvement.

    Zero exactly at a Nash equilibrium; tiny negative float residue is
    clamped to zero.
    """
    joint = _matrix_joint(game, joint)
    x1 = game.R1 @ joint.pi2
    x2 = game.R2 @ joint.pi1
    gap = (float(x1.max()) - float(joint.pi1 @ x1)) + (float(x2.max()) - float(joint.pi2 @ x2))
    return max(0.0, gap)


def regularized_nash_gap(game: MatrixGame, joint: JointPolicy, tau: float) -> float:
    """Entropy-regularized Nash gap; zero exactly at the Nash distribution."""
    joint = _matrix_joint(game, joint)
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    gap = _vx_terms(game.R1, game.R2, joint.pi1, joint.pi2, tau)
    return max(0.0, gap)


def _vx_terms(X1: np.ndarray, X2: np.ndarray, pi1: np.ndarray, pi2: np.ndarray,
              tau: float) -> float:
    x1 = X1 @ pi2
    x2 = X2 @ pi1
    term1 = _tau_logsumexp(x1, tau) - (float(pi1 @ x1) + tau * _entropy_term(pi1))
    term2 = _tau_logsumexp(x2, tau) - (float(pi2 @ x2) + tau * _entropy_term(pi2))
    return term1 + term2


def generalized_gap_vx(X1, X2, joint: JointPolicy, tau: float) -> float:
    """Regularized-gap diagnostic for an arbitrary matrix pair.

    X1 and X2 need not be antisymmetric counterparts of each other; with
    X2 = -X1^T this coincides with regularized_nash_gap on that game. Also
    serves as the per-state inner-loop policy diagnostic.
    """
    a1 = np.asarray(X1, dtype=np.float64)
    a2 = np.asarray(X2, dtype=np.float64)
    if a1.ndim != 2 or a2.ndim != 2 or a2.shape != (a1.shape[1], a1.shape[0]):
        raise DimensionMismatch(
            f"X1 and X2 must be transposed-compatible matrices, got {a1.shape}, {a2.shape}")
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    pi1 = np.asarray(joint.pi1, dtype=np.float64)
    pi2 = np.asarray(joint.pi2, dtype=np.float64)
    if pi1.shape != (a1.shape[0],) or pi2.shape != (a1.shape[1],):
        raise DimensionMismatch("policy shapes do not match the matrices")
    return _vx_terms(a1, a2, pi1, pi2, tau)


# ---------------------------------------------------------------------------
# Nash distribution (quantal response fixed point)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NashDistribution:
    """The unique joint policy with each side a softmax reply to the other."""

    joint: JointPolicy
    residual: float


def _qre_residual(game: MatrixGame, pi1: np.ndarray, pi2: np.ndarray, tau: float) -> float:
    r1 = float(np.abs(pi1 - softmax(game.R1 @ pi2, tau)).max())
    r2 = float(np.abs(pi2 - softmax(game.R2 @ pi1, tau)).max())
    return max(r1, r2)


def nash_distribution(game: MatrixGame, tau: float, tol: float = 1e-10,
                      damping: float = 0.5, max_iters: int = 100_000) -> NashDistribution:
    """Damped simultaneous fixed-point iteration for the Nash distribution.

    pi^i <- (1 - eta) pi^i + eta softmax(R_i pi^{-i} / tau), from uniform.
    The iteration is not globally contractive for small tau, so on
    NoConvergence the damping is halved automatically down to 1/16 before
    the error surfaces.
    """
    if not game.zero_sum:
        raise NotZeroSum("nash_distribution requires a zero-sum game")
    if not (0.0 < damping <= 1.0):
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    eta = damping
    while True:
        pi1 = np.full(game.n_actions_1, 1.0 / game.n_actions_1)
        pi2 = np.full(game.n_actions_2, 1.0 / game.n_actions_2)
        for _ in range(max_iters):
            residual = _qre_residual(game, pi1, pi2, tau)
            if residual <= tol:
                joint = validate_joint_policy(pi1 / pi1.sum(), pi2 / pi2.sum(), game)
                return NashDistribution(joint=joint, residual=residual)
            target1 = softmax(game.R1 @ pi2, tau)
            target2 = softmax(game.R2 @ pi1, tau)
            pi1 = (1.0 - eta) * pi1 + eta * target1
            pi2 = (1.0 - eta) * pi2 + eta * target2
        if eta <= 1.0 / 16.0 + 1e-15:
            raise NoConvergence(
                f"Nash-distribution iteration missed tol={tol} within {max_iters} "
                f"iterations even at damping {eta}")
        eta = eta / 2.0


# ---------------------------------------------------------------------------
# Stochastic-game Nash gap
# ---------------------------------------------------------------------------

def nash_gap_stochastic(game: StochasticGame, joint: JointPolicy,
                        tol: float = 1e-6) -> float:
    """Sum over players of best-response minus achieved utility under p_o.

    Best responses come from the value-iteration oracle (accurate to
    tol/2), achieved values from an exact linear solve, so the result is
    correct to 2 tol and is clamped to zero from below.
    """
    joint = validate_joint_policy(joint.pi1, joint.pi2, game)
    gap = 0.0
    for player, opponent in ((1, joint.pi2), (2, joint.pi1)):
        br = best_response_value(game, player, opponent, tol=tol)
        achieved = policy_value(game, player, joint)
        gap += float(game.initial_dist @ br.v) - float(game.initial_dist @ achieved)
    return max(0.0, gap)


# ---------------------------------------------------------------------------
# List-based twins for the recording loops
# ---------------------------------------------------------------------------

def ng_matrix_lists(R1, R2, pi1, pi2) -> float:
    """nash_gap_matrix on nested lists; hot-loop twin of the public form."""
    n1, n2 = len(pi1), len(pi2)
    best1 = -math.inf
    ach1 = 0.0
    for a in range(n1):
        row = R1[a]
        x = 0.0
        for b in range(n2):
            x += row[b] * pi2[b]
        if x > best1:
            best1 = x
        ach1 += pi1[a] * x
    best2 = -math.inf
    ach2 = 0.0
    for b in range(n2):
        row = R2[b]
        x = 0.0
        for a in range(n1):
            x += row[a] * pi1[a]
        if x > best2:
            best2 = x
        ach2 += pi2[b] * x
    return max(0.0, (best1 - ach1) + (best2 - ach2))


def _lse_entropy_gap(x, pi, tau: float) -> float:
    # tau*logsumexp(x/tau) - pi.x - tau*entropy(pi), all on lists
    m = max(x)
    total = 0.0
    for xi in x:
        total += math.exp((xi - m) / tau)
    best = m + tau * math.log(total)
    ach = 0.0
    ent = 0.0
    for p, xi in zip(pi, x):
        ach += p * xi
        if p > 0.0:
            ent -= p * math.log(p)
    return best - ach - tau * ent


def ngtau_matrix_lists(R1, R2, pi1, pi2, tau: float) -> float:
    """regularized_nash_gap on nested lists; hot-loop twin."""
    n1, n2 = len(pi1), len(pi2)
    x1 = [sum(R1[a][b] * pi2[b] for b in range(n2)) for a in range(n1)]
    x2 = [sum(R2[b][a] * pi1[a] for a in range(n1)) for b in range(n2)]
    return max(0.0, _lse_entropy_gap(x1, pi1, tau) + _lse_entropy_gap(x2, pi2, tau))
