"""Game descriptions, joint policies, and trajectory records.

Immutable, validated containers shared by every other module. Payoff
matrices are required to lie in [-1, 1] entrywise and are rejected rather
than rescaled when they do not, so that the temperature values quoted in
experiment configs keep their meaning. Each player's payoff table is
indexed (own action, opponent action); for stochastic games a leading
state axis is added.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import (
    BadDiscount,
    BadTransitionRow,
    DimensionMismatch,
    NotADistribution,
    NotZeroSum,
    PayoffOutOfRange,
)

ZERO_SUM_TOL = 1e-12
DIST_TOL = 1e-12


def _as_float_array(x, name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(x, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{name} is not a rectangular numeric array: {exc}") from None
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name} must have {ndim} axes, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatch(f"{name} must be non-empty")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, order="C", copy=True)
    out.setflags(write=False)
    return out


def _check_payoff_range(arr: np.ndarray, name: str) -> None:
    if not np.isfinite(arr).all():
        raise PayoffOutOfRange(f"{name} contains non-finite entries")
    worst = float(np.abs(arr).max())
    if worst > 1.0:
        raise PayoffOutOfRange(f"{name} entries must satisfy |r| <= 1, max |r| is {worst}")


def _check_distribution(vec: np.ndarray, name: str) -> None:
    if not np.isfinite(vec).all():
        raise NotADistribution(f"{name} contains non-finite entries")
    if vec.min() < 0.0:
        raise NotADistribution(f"{name} has a negative entry")
    total = float(vec.sum())
    if abs(total - 1.0) > DIST_TOL:
        raise NotADistribution(f"{name} sums to {total}, expected 1 within {DIST_TOL}")


# ---------------------------------------------------------------------------
# Matrix games
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MatrixGame:
    """Two-player matrix game with payoffs normalized into [-1, 1].

    R1 has shape (n1, n2), R2 has shape (n2, n1). zero_sum records whether
    R1 + R2^T vanishes to tolerance; learning-dynamics runs require it,
    the generalized-gap diagnostic does not.
    """

    R1: np.ndarray
    R2: np.ndarray
    zero_sum: bool
    notes: tuple[str, ...] = ()

    @property
    def n_actions_1(self) -> int:
        return self.R1.shape[0]

    @property
    def n_actions_2(self) -> int:
        return self.R1.shape[1]

    @property
    def a_max(self) -> int:
        return max(self.R1.shape)

    def payoff(self, player: int) -> np.ndarray:
        """Payoff table of `player` indexed (own action, opponent action)."""
        if player == 1:
            return self.R1
        if player == 2:
            return self.R2
        raise ValueError(f"player must be 1 or 2, got {player}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixGame):
            return NotImplemented
        return (
            np.array_equal(self.R1, other.R1)
            and np.array_equal(self.R2, other.R2)
            and self.zero_sum == other.zero_sum
        )


def validate_matrix_game(R1, R2=None, require_zero_sum: bool = True,
                         notes: tuple[str, ...] = ()) -> MatrixGame:
    """Validate a payoff pair into a MatrixGame.

    R2 defaults to -R1^T. Raises DimensionMismatch, PayoffOutOfRange, or
    NotZeroSum (the latter only when require_zero_sum). Validating an
    already-validated game returns an equal game.
    """
    if isinstance(R1, MatrixGame):
        game = R1
        return validate_matrix_game(game.R1, game.R2, require_zero_sum, game.notes)
    r1 = _as_float_array(R1, "R1", 2)
    if R2 is None:
        r2 = -r1.T
    else:
        r2 = _as_float_array(R2, "R2", 2)
    if r2.shape != (r1.shape[1], r1.shape[0]):
        raise DimensionMismatch(
            f"R2 must have shape {(r1.shape[1], r1.shape[0])}, got {r2.shape}")
    _check_payoff_range(r1, "R1")
    _check_payoff_range(r2, "R2")
    defect = float(np.abs(r1 + r2.T).max())
    zero_sum = defect <= ZERO_SUM_TOL
    if require_zero_sum and not zero_sum:
        raise NotZeroSum(f"max |R1 + R2^T| = {defect} exceeds {ZERO_SUM_TOL}")
    return MatrixGame(R1=_frozen(r1), R2=_frozen(r2), zero_sum=zero_sum,
                      notes=tuple(notes))


# ---------------------------------------------------------------------------
# Stochastic games
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StochasticGame:
    """Tabular discounted two-player zero-sum stochastic game.

    transition[s, a1, a2, s'] is the probability of moving to s'; R1 is
    indexed (s, a1, a2) and R2 (s, a2, a1), each player seeing (state, own
    action, opponent action). initial_dist is the start-state distribution,
    uniform when the description omitted it.
    """

    transition: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    gamma: float
    initial_dist: np.ndarray
    zero_sum: bool
    notes: tuple[str, ...] = ()

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions_1(self) -> int:
        return self.transition.shape[1]

    @property
    def n_actions_2(self) -> int:
        return self.transition.shape[2]

    @property
    def a_max(self) -> int:
        return max(self.n_actions_1, self.n_actions_2)

    def payoff(self, player: int) -> np.ndarray:
        if player == 1:
            return self.R1
        if player == 2:
            return self.R2
        raise ValueError(f"player must be 1 or 2, got {player}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, StochasticGame):
            return NotImplemented
        return (
            np.array_equal(self.transition, other.transition)
            and np.array_equal(self.R1, other.R1)
            and np.array_equal(self.R2, other.R2)
            and self.gamma == other.gamma
            and np.array_equal(self.initial_dist, other.initial_dist)
            and self.zero_sum == other.zero_sum
        )


def validate_stochastic_game(transition, R1, R2=None, gamma: float | None = None,
                             initial_dist=None, require_zero_sum: bool = True,
                             notes: tuple[str, ...] = ()) -> StochasticGame:
    """Validate a raw description into a StochasticGame.

    R2 defaults to the antisymmetric counterpart -R1 with the action axes
    swapped; initial_dist defaults to uniform (noted on the game).
    """
    if isinstance(transition, StochasticGame):
        g = transition
        return validate_stochastic_game(g.transition, g.R1, g.R2, g.gamma,
                                        g.initial_dist, require_zero_sum, g.notes)
    p = _as_float_array(transition, "transition", 4)
    r1 = _as_float_array(R1, "R1", 3)
    n_states, n_a1, n_a2 = r1.shape
    if p.shape != (n_states, n_a1, n_a2, n_states):
        raise DimensionMismatch(
            f"transition must have shape {(n_states, n_a1, n_a2, n_states)}, got {p.shape}")
    if R2 is None:
        r2 = -np.swapaxes(r1, 1, 2)
    else:
        r2 = _as_float_array(R2, "R2", 3)
    if r2.shape != (n_states, n_a2, n_a1):
        raise DimensionMismatch(
            f"R2 must have shape {(n_states, n_a2, n_a1)}, got {r2.shape}")

    if gamma is None:
        raise BadDiscount("gamma is required")
    gamma = float(gamma)
    if not (0.0 < gamma < 1.0) or not np.isfinite(gamma):
        raise BadDiscount(f"gamma must lie in (0, 1), got {gamma}")

    if not np.isfinite(p).all() or p.min() < 0.0:
        raise BadTransitionRow("transition has a negative or non-finite entry")
    row_sums = p.sum(axis=-1)
    worst = float(np.abs(row_sums - 1.0).max())
    if worst > DIST_TOL:
        raise BadTransitionRow(f"a transition row sums to 1 only within {worst}")

    _check_payoff_range(r1, "R1")
    _check_payoff_range(r2, "R2")
    defect = float(np.abs(r1 + np.swapaxes(r2, 1, 2)).max())
    zero_sum = defect <= ZERO_SUM_TOL
    if require_zero_sum and not zero_sum:
        raise NotZeroSum(f"max |R1(s,a,b) + R2(s,b,a)| = {defect} exceeds {ZERO_SUM_TOL}")

    notes = tuple(notes)
    if initial_dist is None:
        p_o = np.full(n_states, 1.0 / n_states)
        if "initial_dist defaulted to uniform" not in notes:
            notes = notes + ("initial_dist defaulted to uniform",)
    else:
        p_o = _as_float_array(initial_dist, "initial_dist", 1)
        if p_o.shape != (n_states,):
            raise DimensionMismatch(
                f"initial_dist must have shape {(n_states,)}, got {p_o.shape}")
        _check_distribution(p_o, "initial_dist")

    return StochasticGame(transition=_frozen(p), R1=_frozen(r1), R2=_frozen(r2),
                          gamma=gamma, initial_dist=_frozen(p_o),
                          zero_sum=zero_sum, notes=notes)


# ---------------------------------------------------------------------------
# Policies and learner iterates
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointPolicy:
    """Per-player mixed strategies; one row per state for stochastic games."""

    pi1: np.ndarray
    pi2: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointPolicy):
            return NotImplemented
        return np.array_equal(self.pi1, other.pi1) and np.array_equal(self.pi2, other.pi2)


def validate_joint_policy(pi1, pi2, game=None) -> JointPolicy:
    """Validate a policy pair. Rows must be distributions to 1e-12.

    When `game` is given the shapes are checked against it: vectors for a
    MatrixGame, (n_states, n_actions) tables for a StochasticGame.
    """
    if isinstance(pi1, JointPolicy) and pi2 is None:
        return validate_joint_policy(pi1.pi1, pi1.pi2, game)
    a1 = np.asarray(pi1, dtype=np.float64)
    a2 = np.asarray(pi2, dtype=np.float64)
    if a1.ndim != a2.ndim or a1.ndim not in (1, 2):
        raise DimensionMismatch(
            f"policies must both be vectors or both be tables, got shapes {a1.shape}, {a2.shape}")
    if game is not None:
        if isinstance(game, MatrixGame):
            want1, want2 = (game.n_actions_1,), (game.n_actions_2,)
        elif isinstance(game, StochasticGame):
            want1 = (game.n_states, game.n_actions_1)
            want2 = (game.n_states, game.n_actions_2)
        else:
            raise TypeError(f"unsupported game type {type(game).__name__}")
        if a1.shape != want1 or a2.shape != want2:
            raise DimensionMismatch(
                f"policy shapes {a1.shape}, {a2.shape} do not match game "
                f"requirements {want1}, {want2}")
    for name, arr in (("pi1", a1), ("pi2", a2)):
        rows = arr if arr.ndim == 2 else arr[None, :]
        for s in range(rows.shape[0]):
            _check_distribution(rows[s], f"{name} row {s}")
    return JointPolicy(pi1=_frozen(a1), pi2=_frozen(a2))


def uniform_joint_policy(game) -> JointPolicy:
    """The uniform joint policy for a matrix or stochastic game."""
    if isinstance(game, MatrixGame):
        return JointPolicy(pi1=_frozen(np.full(game.n_actions_1, 1.0 / game.n_actions_1)),
                           pi2=_frozen(np.full(game.n_actions_2, 1.0 / game.n_actions_2)))
    if isinstance(game, StochasticGame):
        shape1 = (game.n_states, game.n_actions_1)
        shape2 = (game.n_states, game.n_actions_2)
        return JointPolicy(pi1=_frozen(np.full(shape1, 1.0 / game.n_actions_1)),
                           pi2=_frozen(np.full(shape2, 1.0 / game.n_actions_2)))
    raise TypeError(f"unsupported game type {type(game).__name__}")


@dataclass(frozen=True, eq=False)
class LearnerState:
    """One player's iterates: q-values, policy, and (VI runs only) values."""

    q: np.ndarray
    pi: np.ndarray
    v: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Trajectory records
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Metric series plus final iterates for one seeded run.

    index holds (t, k) rows, strictly increasing lexicographically; series
    maps each metric name to a value per row. Matrix-game runs use t = 0
    throughout. config_echo is the full resolved run configuration.
    """

    config_echo: dict
    index: np.ndarray
    series: dict
    final_policy: JointPolicy
    final_q: tuple
    final_v: tuple | None
    warnings: tuple = ()

    def __post_init__(self):
        idx = np.asarray(self.index, dtype=np.int64)
        if idx.ndim != 2 or idx.shape[1] != 2:
            raise DimensionMismatch(f"index must have shape (n, 2), got {idx.shape}")
        if idx.shape[0] > 1:
            t, k = idx[:, 0], idx[:, 1]
            increasing = (t[1:] > t[:-1]) | ((t[1:] == t[:-1]) & (k[1:] > k[:-1]))
            if not increasing.all():
                raise DimensionMismatch("index rows must be strictly increasing")
        for name, values in self.series.items():
            if len(values) != idx.shape[0]:
                raise DimensionMismatch(
                    f"series {name!r} has {len(values)} values for {idx.shape[0]} index rows")
        object.__setattr__(self, "index", idx)

    def rows(self) -> Iterator[tuple]:
        """Yield (t, k, metric, value) samples in index order."""
        for name in sorted(self.series):
            values = self.series[name]
            for i in range(self.index.shape[0]):
                yield int(self.index[i, 0]), int(self.index[i, 1]), name, float(values[i])

    def metric(self, name: str) -> np.ndarray:
        return np.asarray(self.series[name], dtype=np.float64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrajectoryRecord):
            return NotImplemented
        if self.config_echo != other.config_echo or self.warnings != other.warnings:
            return False
        if not np.array_equal(self.index, other.index):
            return False
        if sorted(self.series) != sorted(other.series):
            return False
        for name in self.series:
            if not np.array_equal(self.series[name], other.series[name]):
                return False
        if self.final_policy != other.final_policy:
            return False
        if len(self.final_q) != len(other.final_q):
            return False
        for a, b in zip(self.final_q, other.final_q):
            if not np.array_equal(a, b):
                return False
        if (self.final_v is None) != (other.final_v is None):
            return False
        if self.final_v is not None:
            for a, b in zip(self.final_v, other.final_v):
                if not np.array_equal(a, b):
                    return False
        return True


# ---------------------------------------------------------------------------
# Builtin games and file loading
# ---------------------------------------------------------------------------

def matching_pennies() -> MatrixGame:
    return validate_matrix_game([[1.0, -1.0], [-1.0, 1.0]], notes=("builtin:mp",))


def rock_paper_scissors() -> MatrixGame:
    R1 = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]]
    return validate_matrix_game(R1, notes=("builtin:rps",))


def tilted_rps(n: int) -> MatrixGame:
    """3x3 cyclic game whose (0,0) payoff is tilted to n, then scaled by
    1/max(n,1) so payoffs stay in [-1, 1]. Its equilibrium moves toward
    ((1/3, 2/3, 0), (0, 2/3, 1/3)) as n grows."""
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    # divide rather than multiply by a reciprocal: n/n is exactly 1.0,
    # n * (1.0/n) rounds above 1.0 for some n and would fail range checks
    R1 = np.array([[n, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]]) / max(n, 1)
    return validate_matrix_game(R1, notes=(f"builtin:appF:N={n}",
                                           f"payoffs scaled by 1/{max(n, 1)} into [-1, 1]"))


def _game_from_dict(doc: dict):
    if not isinstance(doc, dict) or "type" not in doc:
        raise DimensionMismatch("game document must be a mapping with a 'type' field")
    kind = doc["type"]
    if kind == "matrix":
        return validate_matrix_game(doc["R1"], doc.get("R2"))
    if kind == "stochastic":
        return validate_stochastic_game(doc["transition"], doc["R1"], doc.get("R2"),
                                        gamma=doc.get("gamma"),
                                        initial_dist=doc.get("initial_dist"))
    raise DimensionMismatch(f"unknown game type {kind!r}")


def load_game(source):
    """Load a game from a dict, a JSON file path, or a builtin name.

    Builtins: "builtin:mp", "builtin:rps", "builtin:appF:N=<int>".
    File documents carry fields: type ("matrix" | "stochastic"), R1, and
    optionally R2 (default -R1^T), transition, gamma, initial_dist.
    """
    if isinstance(source, (MatrixGame, StochasticGame)):
        return source
    if isinstance(source, dict):
        return _game_from_dict(source)
    if not isinstance(source, str):
        raise TypeError(f"game source must be dict or str, got {type(source).__name__}")
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        if name == "mp":
            return matching_pennies()
        if name == "rps":
            return rock_paper_scissors()
        if name.startswith("appF:N="):
            try:
                n = int(name[len("appF:N="):])
            except ValueError:
                raise ValueError(f"bad builtin game id {source!r}") from None
            return tilted_rps(n)
        raise ValueError(f"unknown builtin game {source!r}")
    with open(source, "r", encoding="utf-8") as fh:
        return _game_from_dict(json.load(fh))


def game_hash(game) -> str:
    """Stable hex digest of a validated game's numeric content."""
    h = hashlib.blake2b(digest_size=16)
    if isinstance(game, MatrixGame):
        h.update(b"matrix")
        h.update(np.array(game.R1.shape, dtype=np.int64).tobytes())
        h.update(game.R1.tobytes())
        h.update(game.R2.tobytes())
    elif isinstance(game, StochasticGame):
        h.update(b"stochastic")
        h.update(np.array(game.transition.shape, dtype=np.int64).tobytes())
        h.update(game.transition.tobytes())
        h.update(game.R1.tobytes())
        h.update(game.R2.tobytes())
        h.update(np.float64(game.gamma).tobytes())
        h.update(game.initial_dist.tobytes())
    else:
        raise TypeError(f"unsupported game type {type(game).__name__}")
    return h.hexdigest()
