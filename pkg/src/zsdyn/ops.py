"""Stateless mathematical operators.

Softmax family, entropy, guaranteed exploration floors, one-step lookahead
and minimax Bellman operators, the exact matrix-game value (dense simplex,
Bland's rule), a best-response MDP solver, exact policy evaluation, and the
stationary-distribution ergodicity diagnostic. Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingGamma,
    NoConvergence,
    NonFiniteInput,
    NotADistribution,
    NotErgodic,
)
from .games import JointPolicy, StochasticGame, validate_joint_policy


# ---------------------------------------------------------------------------
# Softmax family and exploration floors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SoftmaxParams:
    """Temperature and exploration mix for the smoothed best response."""

    tau: float
    eps_bar: float = 0.0

    def __post_init__(self):
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")
        if not (0.0 <= self.eps_bar <= 1.0):
            raise ValueError(f"eps_bar must lie in [0, 1], got {self.eps_bar}")


def softmax(q, tau: float) -> np.ndarray:
    """Temperature-tau softmax, computed shift-stably.

    Subtracts the max before exponentiation, so temperatures down to 1e-4
    underflow harmlessly instead of overflowing. Output sums to 1 with every
    entry >= 1/((n-1) exp(2 max|q| / tau) + 1) when that floor is
    representable.
    """
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau}")
    arr = np.asarray(q, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"q must be a non-empty vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("softmax input contains non-finite entries")
    z = (arr - arr.max()) / tau
    e = np.exp(z)
    return e / e.sum()


def softmax_explore(q, params: SoftmaxParams) -> np.ndarray:
    """eps_bar-mixed softmax: eps_bar * uniform + (1 - eps_bar) * softmax.

    Every entry is >= eps_bar / n.
    """
    base = softmax(q, params.tau)
    n = base.shape[0]
    return params.eps_bar / n + (1.0 - params.eps_bar) * base


def entropy(mu) -> float:
    """Shannon entropy with the convention 0 log 0 = 0."""
    arr = np.asarray(mu, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise NotADistribution(f"entropy input must be a non-empty vector, got {arr.shape}")
    if not np.isfinite(arr).all() or arr.min() < 0.0:
        raise NotADistribution("entropy input has a negative or non-finite entry")
    if abs(float(arr.sum()) - 1.0) > 1e-12:
        raise NotADistribution(f"entropy input sums to {float(arr.sum())}")
    mask = arr > 0.0
    return float(-(arr[mask] * np.log(arr[mask])).sum()) + 0.0


@dataclass(frozen=True)
class ExplorationBound:
    """Guaranteed minimum policy entry for one dynamics variant.

    For extremely small temperatures the true floor can fall below the
    smallest positive float; it then degrades to 0.0, which is still a
    valid (if vacuous) lower bound.
    """

    value: float
    setting: str
    variant: str


def _softmax_floor(x: float, a_max: int) -> float:
    # 1 / ((a_max - 1) e^x + 1) in the underflow-safe form
    # e^{-x} / (e^{-x} + (a_max - 1)).
    if a_max == 1:
        return 1.0
    em = math.exp(-x)
    return em / (em + (a_max - 1))


def exploration_bound(setting: str, variant: str, params: SoftmaxParams,
                      a_max: int, gamma: float | None = None) -> ExplorationBound:
    """Lower bound on every policy entry maintained by the named dynamics.

    setting is "matrix" or "stochastic", variant "plain" or "explore".
    The plain stochastic bound needs gamma (MissingGamma otherwise); the
    explore stochastic bound is eps_bar / a_max and does not.
    """
    if a_max < 1:
        raise ValueError(f"a_max must be >= 1, got {a_max}")
    if setting == "matrix":
        if variant == "plain":
            value = _softmax_floor(2.0 / params.tau, a_max)
        elif variant == "explore":
            value = params.eps_bar / a_max + (1.0 - params.eps_bar) * _softmax_floor(
                2.0 / params.tau, a_max)
        else:
            raise ValueError(f"unknown variant {variant!r}")
    elif setting == "stochastic":
        if variant == "plain":
            if gamma is None:
                raise MissingGamma("the plain stochastic bound needs gamma")
            value = _softmax_floor(2.0 / ((1.0 - gamma) * params.tau), a_max)
        elif variant == "explore":
            value = params.eps_bar / a_max
        else:
            raise ValueError(f"unknown variant {variant!r}")
    else:
        raise ValueError(f"unknown setting {setting!r}")
    return ExplorationBound(value=float(value), setting=setting, variant=variant)


# ---------------------------------------------------------------------------
# Matrix-game value via dense simplex
# ---------------------------------------------------------------------------

class GameValue(NamedTuple):
    value: float
    maximin: np.ndarray
    minimax: np.ndarray


_PIVOT_EPS = 1e-12


def _simplex_max(A: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Maximize c^T z subject to A z <= b, z >= 0, with b >= 0.

    Dense tableau simplex from the slack basis. Entering and leaving
    variables follow Bland's smallest-index rule so degenerate ties cannot
    cycle. Returns (z, y, objective) where y holds the dual multipliers of
    the rows, read off the slack columns of the final cost row.
    """
    n_rows, n_cols = A.shape
    width = n_cols + n_rows + 1
    T = np.zeros((n_rows + 1, width))
    T[:n_rows, :n_cols] = A
    T[:n_rows, n_cols:n_cols + n_rows] = np.eye(n_rows)
    T[:n_rows, -1] = b
    T[-1, :n_cols] = -c
    basis = list(range(n_cols, n_cols + n_rows))

    max_pivots = 50 * (n_rows + n_cols) + 1000  # Bland terminates; cap is defensive
    for _ in range(max_pivots):
        enter = -1
        for j in range(n_cols + n_rows):
            if T[-1, j] < -_PIVOT_EPS:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = math.inf
        for i in range(n_rows):
            coef = T[i, enter]
            if coef > _PIVOT_EPS:
                ratio = T[i, -1] / coef
                if ratio < best - 1e-15:
                    best = ratio
                    leave = i
                elif ratio <= best + 1e-15 and leave >= 0 and basis[i] < basis[leave]:
                    leave = i
        if leave < 0:
            raise ArithmeticError("LP is unbounded; a shifted game LP never is")
        T[leave] /= T[leave, enter]
        col = T[:, enter].copy()
        col[leave] = 0.0
        T -= np.outer(col, T[leave])
        basis[leave] = enter
    else:
        raise ArithmeticError("simplex exceeded its pivot budget")

    z = np.zeros(n_cols)
    for i, var in enumerate(basis):
        if var < n_cols:
            z[var] = T[i, -1]
    y = T[-1, n_cols:n_cols + n_rows].copy()
    return z, y, float(c @ z)


def matrix_game_value(X) -> GameValue:
    """Exact value and optimal mixed strategies of the game with payoff X.

    X pays the row player, who maximizes. Solved by the standard
    normalization: shift X by 1 + max|X| so the value is positive, solve
    the bounded LP max 1^T z s.t. (X + shift) z <= 1, z >= 0, and
    renormalize. The primal solution gives the column player's minimax
    strategy and the dual multipliers give the row player's maximin one.
    """
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatch(f"X must be a non-empty matrix, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("matrix_game_value input contains non-finite entries")
    shift = 1.0 + float(np.abs(arr).max())
    shifted = arr + shift
    n, m = shifted.shape
    z, y, w = _simplex_max(shifted, np.ones(n), np.ones(m))
    if not (w > 0.0 and np.isfinite(w)):
        raise ArithmeticError(f"degenerate LP objective {w}")
    minimax = z / w
    y_sum = float(y.sum())
    if y_sum <= 0.0:
        raise ArithmeticError("simplex returned a non-positive dual vector")
    maximin = y / y_sum
    value = 1.0 / w - shift
    return GameValue(value=float(value), maximin=maximin, minimax=minimax)


# ---------------------------------------------------------------------------
# Bellman operators for stochastic games
# ---------------------------------------------------------------------------

def _check_values(game: StochasticGame, v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (game.n_states,):
        raise DimensionMismatch(
            f"v must have shape {(game.n_states,)}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteInput("value vector contains non-finite entries")
    return arr


def bellman_T(game: StochasticGame, v, player: int) -> np.ndarray:
    """One-step lookahead tensor: R_i(s,a,b) + gamma E[v(S') | s,a,b].

    Indexed (state, own action, opponent action) for the given player, so
    player 2's slice at each state is a matrix over (a2, a1).
    """
    arr = _check_values(game, v)
    expect = np.tensordot(game.transition, arr, axes=([3], [0]))  # (S, A1, A2)
    if player == 1:
        return game.R1 + game.gamma * expect
    if player == 2:
        return game.R2 + game.gamma * np.swapaxes(expect, 1, 2)
    raise ValueError(f"player must be 1 or 2, got {player}")


def minimax_bellman(game: StochasticGame, v, player: int) -> np.ndarray:
    """Per-state game value of the lookahead tensor: a gamma-contraction."""
    tensor = bellman_T(game, v, player)
    return np.array([matrix_game_value(tensor[s]).value for s in range(game.n_states)])


def minimax_fixed_point(game: StochasticGame, player: int, tol: float = 1e-6) -> np.ndarray:
    """Fixed point of the minimax Bellman operator, accurate to tol/2.

    Iterates from v = 0 until successive iterates differ by at most
    tol (1 - gamma) / (2 gamma), which bounds the distance to the true
    fixed point by tol/2; the players' fixed points then sum to at most
    tol in sup norm.
    """
    gamma = game.gamma
    threshold = tol * (1.0 - gamma) / (2.0 * gamma)
    v = np.zeros(game.n_states)
    for _ in range(1_000_000):
        v_next = minimax_bellman(game, v, player)
        if float(np.abs(v_next - v).max()) <= threshold:
            return v_next
        v = v_next
    raise NoConvergence("minimax fixed-point iteration exhausted its budget")


class BestResponse(NamedTuple):
    v: np.ndarray
    policy: np.ndarray  # deterministic, one action index per state


def _marginalize(game: StochasticGame, player: int, opponent: np.ndarray):
    """Reward table and transition kernel of the MDP faced by `player`
    when the opponent plays the fixed per-state mixture `opponent`."""
    if player == 1:
        r = np.einsum("sab,sb->sa", game.R1, opponent)
        kernel = np.einsum("sabt,sb->sat", game.transition, opponent)
    elif player == 2:
        r = np.einsum("sba,sa->sb", game.R2, opponent)
        kernel = np.einsum("sabt,sa->sbt", game.transition, opponent)
    else:
        raise ValueError(f"player must be 1 or 2, got {player}")
    return r, kernel


def _check_opponent(game: StochasticGame, player: int, opponent) -> np.ndarray:
    arr = np.asarray(opponent, dtype=np.float64)
    n_opp = game.n_actions_2 if player == 1 else game.n_actions_1
    if arr.shape != (game.n_states, n_opp):
        raise DimensionMismatch(
            f"opponent policy must have shape {(game.n_states, n_opp)}, got {arr.shape}")
    for s in range(game.n_states):
        row = arr[s]
        if not np.isfinite(row).all() or row.min() < 0.0 or abs(float(row.sum()) - 1.0) > 1e-12:
            raise NotADistribution(f"opponent policy row {s} is not a distribution")
    return arr


def best_response_value(game: StochasticGame, player: int, opponent,
                        tol: float = 1e-6) -> BestResponse:
    """Optimal value against a fixed opponent policy, with its greedy policy.

    Marginalizes the opponent into the rewards and transitions and runs
    value iteration to a sup-norm step of tol (1 - gamma) / (2 gamma), so
    the returned v is within tol/2 of the true best-response value.
    """
    opp = _check_opponent(game, player, opponent)
    r, kernel = _marginalize(game, player, opp)
    gamma = game.gamma
    threshold = tol * (1.0 - gamma) / (2.0 * gamma)
    v = np.zeros(game.n_states)
    for _ in range(1_000_000):
        q = r + gamma * np.tensordot(kernel, v, axes=([2], [0]))
        v_next = q.max(axis=1)
        if float(np.abs(v_next - v).max()) <= threshold:
            return BestResponse(v=v_next, policy=q.argmax(axis=1))
        v = v_next
    raise NoConvergence("best-response value iteration exhausted its budget")


def policy_value(game: StochasticGame, player: int, joint: JointPolicy) -> np.ndarray:
    """Exact discounted value of a fixed joint policy via a linear solve."""
    joint = validate_joint_policy(joint.pi1, joint.pi2, game)
    if player == 1:
        r = np.einsum("sab,sa,sb->s", game.R1, joint.pi1, joint.pi2)
    elif player == 2:
        r = np.einsum("sba,sb,sa->s", game.R2, joint.pi2, joint.pi1)
    else:
        raise ValueError(f"player must be 1 or 2, got {player}")
    kernel = np.einsum("sabt,sa,sb->st", game.transition, joint.pi1, joint.pi2)
    return np.linalg.solve(np.eye(game.n_states) - game.gamma * kernel, r)


# ---------------------------------------------------------------------------
# Stationary distribution and ergodicity diagnostic
# ---------------------------------------------------------------------------

_EDGE_EPS = 1e-12


def induced_chain(game: StochasticGame, joint: JointPolicy) -> np.ndarray:
    """State transition matrix under a fixed joint policy."""
    joint = validate_joint_policy(joint.pi1, joint.pi2, game)
    return np.einsum("sabt,sa,sb->st", game.transition, joint.pi1, joint.pi2)


def _is_irreducible(adj: np.ndarray) -> bool:
    n = adj.shape[0]
    reach = adj.copy()
    for _ in range(n):
        reach = reach | (reach @ adj)
    return bool(reach.all())


def _period(adj: np.ndarray) -> int:
    # gcd of (level[u] + 1 - level[v]) over edges of a strongly connected
    # graph, with BFS levels from state 0.
    n = adj.shape[0]
    level = [-1] * n
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(n):
                if adj[u, v] and level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    g = 0
    for u in range(n):
        for v in range(n):
            if adj[u, v]:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g)


def stationary_distribution(game: StochasticGame, joint: JointPolicy) -> np.ndarray:
    """Stationary distribution of the chain induced by a joint policy.

    Raises NotErgodic when the chain (on edges with probability above
    1e-12) is reducible or periodic. Otherwise solves mu^T P = mu^T with
    the normalization row and checks the residual to 1e-10.
    """
    P = induced_chain(game, joint)
    adj = P > _EDGE_EPS
    if not _is_irreducible(adj):
        raise NotErgodic("induced chain is reducible")
    if _period(adj) != 1:
        raise NotErgodic("induced chain is periodic")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    mu = np.linalg.solve(A, b)
    residual = float(np.abs(mu @ P - mu).max())
    if residual > 1e-10:
        raise ArithmeticError(f"stationary solve residual {residual} exceeds 1e-10")
    return mu
