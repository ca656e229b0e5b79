"""Seeded multi-trajectory experiments: sweeps, aggregation, CSV/JSON output.

Seed derivation (documented contract): the seed of trajectory j at a sweep
point is

    splitmix64(splitmix64(base_seed XOR point_key) XOR j)

where point_key is the first 8 bytes (big-endian) of the BLAKE2b digest of
the sweep point's canonical JSON {axis: value, ...} with sorted keys. The
key depends only on the point's own axis values, never on the position of
the point in the grid, so reordering an axis's value list or adding axes
elsewhere leaves every trajectory's seed unchanged and points can run in
parallel in any order.

CSV cells use the shortest round-trip decimal representation of each float
(Python repr), so identical runs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import MatrixRunConfig, VisbrConfig
from .errors import (BadConfig, GridMismatch, NonPositiveValues, OutputExists)
from .games import MatrixGame, StochasticGame, TrajectoryRecord, game_hash, load_game
from .matrix_dyn import run_matrix_dynamics
from .visbr import run_visbr

_M64 = (1 << 64) - 1

_SWEEP_AXES = {
    "matrix": ("tau", "eps_bar", "schedule", "K"),
    "stochastic": ("tau", "eps_bar", "schedule", "K", "T"),
}

_AGG_MODES = ("mean", "median", "both")

MATRIX_CSV_COLUMNS = ("k", "ng_mean", "ng_std", "ngtau_mean", "ngtau_std",
                      "min_pi", "q_inf")
STOCHASTIC_CSV_COLUMNS = ("t", "k", "ng_mean", "ng_std", "lsum", "min_pi",
                          "q_inf", "v_inf")


def splitmix64(x: int) -> int:
    """One output of the splitmix64 generator seeded at x."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


def sweep_point_key(point: dict[str, Any]) -> int:
    """64-bit content key of a sweep point; independent of grid ordering."""
    blob = json.dumps(point, sort_keys=True, separators=(",", ":")).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "big")


def trajectory_seed(base_seed: int, point: dict[str, Any], j: int) -> int:
    """Seed for trajectory j at the given sweep point."""
    return splitmix64(splitmix64(base_seed ^ sweep_point_key(point)) ^ j)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise BadConfig(msg)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a game, a run template, sweep axes, and seeding.

    run is a run-config dict without the seed field; seeds are derived per
    trajectory. sweep maps axis names to value lists; the run executes at
    every point of the cross product.
    """

    kind: str
    game: Any
    run: dict[str, Any]
    n_trajectories: int
    base_seed: int
    sweep: dict[str, list] = field(default_factory=dict)
    aggregation: str = "both"
    out_dir: str | None = None
    sweep_cap: int = 10_000

    def __post_init__(self) -> None:
        _require(self.kind in ("matrix", "stochastic"),
                 f"kind must be 'matrix' or 'stochastic', got {self.kind!r}")
        _require(isinstance(self.game, (str, dict)),
                 "game must be a source string or an inline dict")
        _require(isinstance(self.run, dict), "run must be a run-config dict")
        _require("seed" not in self.run,
                 "run template must not carry a seed; seeds are derived per trajectory")
        _require(isinstance(self.n_trajectories, int) and self.n_trajectories >= 1,
                 f"n_trajectories must be an integer >= 1, got {self.n_trajectories!r}")
        _require(isinstance(self.base_seed, int) and 0 <= self.base_seed < 2 ** 64,
                 f"base_seed must be an integer in [0, 2^64), got {self.base_seed!r}")
        _require(self.aggregation in _AGG_MODES,
                 f"aggregation must be one of {_AGG_MODES}, got {self.aggregation!r}")
        allowed = _SWEEP_AXES[self.kind]
        _require(isinstance(self.sweep, dict), "sweep must be a dict of axis lists")
        total = 1
        for axis, values in self.sweep.items():
            _require(axis in allowed,
                     f"sweep axis {axis!r} not allowed for kind {self.kind!r}; "
                     f"allowed: {allowed}")
            _require(isinstance(values, list) and len(values) >= 1,
                     f"sweep axis {axis!r} must be a non-empty list")
            total *= len(values)
        _require(isinstance(self.sweep_cap, int) and self.sweep_cap >= 1,
                 "sweep_cap must be a positive integer")
        _require(total <= self.sweep_cap,
                 f"sweep cross product has {total} points, above the cap "
                 f"{self.sweep_cap}")
        # every sweep point must yield a valid run config once a seed is
        # supplied; swept axes may be absent from the template
        for point in self.sweep_points():
            self._run_config(point, seed=0)

    def _run_config(self, point: dict[str, Any], seed: int):
        d = dict(self.run)
        d.update(point)
        d["seed"] = seed
        if self.kind == "matrix":
            return MatrixRunConfig.from_dict(d)
        return VisbrConfig.from_dict(d)

    def sweep_points(self) -> list[dict[str, Any]]:
        """Cross product of axis values; axes in sorted name order."""
        if not self.sweep:
            return [{}]
        axes = sorted(self.sweep)
        return [dict(zip(axes, combo))
                for combo in itertools.product(*(self.sweep[a] for a in axes))]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "game": self.game,
            "run": self.run,
            "n_trajectories": self.n_trajectories,
            "base_seed": self.base_seed,
            "sweep": self.sweep,
            "aggregation": self.aggregation,
            "out_dir": self.out_dir,
            "sweep_cap": self.sweep_cap,
        }

    @staticmethod
    def from_dict(d: dict[str, Any]) -> "ExperimentConfig":
        _require(isinstance(d, dict), f"experiment config must be a dict, got {type(d).__name__}")
        known = {"kind", "game", "run", "n_trajectories", "base_seed", "sweep",
                 "aggregation", "out_dir", "sweep_cap"}
        extra = set(d) - known
        _require(not extra, f"unknown experiment config keys: {sorted(extra)}")
        for key in ("kind", "game", "run", "n_trajectories", "base_seed"):
            _require(key in d, f"experiment config is missing {key!r}")
        return ExperimentConfig(
            kind=d["kind"],
            game=d["game"],
            run=dict(d["run"]),
            n_trajectories=int(d["n_trajectories"]),
            base_seed=int(d["base_seed"]),
            sweep={k: list(v) for k, v in d.get("sweep", {}).items()},
            aggregation=d.get("aggregation", "both"),
            out_dir=d.get("out_dir"),
            sweep_cap=int(d.get("sweep_cap", 10_000)),
        )


@dataclass(frozen=True)
class AggregateSeries:
    """Per-index statistics of one metric across trajectories."""

    name: str
    index: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    median: np.ndarray
    min: np.ndarray
    max: np.ndarray
    n: int


def aggregate(runs: list[TrajectoryRecord], mode: str = "both") -> list[AggregateSeries]:
    """Elementwise statistics over trajectories sharing one index grid."""
    _require(mode in _AGG_MODES, f"mode must be one of {_AGG_MODES}, got {mode!r}")
    if not runs:
        raise GridMismatch("need at least one record to aggregate")
    first = runs[0]
    names = list(first.series)
    for rec in runs[1:]:
        if not np.array_equal(rec.index, first.index):
            raise GridMismatch("records disagree on the (t, k) index grid")
        if list(rec.series) != names:
            raise GridMismatch(
                f"records disagree on metrics: {list(rec.series)} vs {names}")
    out = []
    for name in names:
        values = np.stack([rec.series[name] for rec in runs])
        out.append(AggregateSeries(
            name=name,
            index=first.index.copy(),
            mean=values.mean(axis=0),
            std=values.std(axis=0),
            median=np.median(values, axis=0),
            min=values.min(axis=0),
            max=values.max(axis=0),
            n=len(runs),
        ))
    return out


def rate_fit(series: AggregateSeries, k_min: int, stat: str = "mean") -> float:
    """OLS slope of log(stat) against log(k) over rows with k >= k_min.

    k is the inner-index column of the series grid. All selected values
    must be strictly positive.
    """
    k = series.index[:, 1].astype(np.float64)
    values = np.asarray(getattr(series, stat), dtype=np.float64)
    mask = k >= k_min
    k, values = k[mask], values[mask]
    if k.size < 2:
        raise ValueError(f"need at least 2 rows with k >= {k_min}, got {k.size}")
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise NonPositiveValues(
            f"rate_fit needs positive finite values beyond k_min={k_min}")
    if np.any(k <= 0.0):
        raise NonPositiveValues("rate_fit needs positive k indices")
    logk = np.log(k)
    logv = np.log(values)
    slope = np.polyfit(logk, logv, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _atomic_write(path: str, data: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _series_map(aggregates: list[AggregateSeries]) -> dict[str, AggregateSeries]:
    return {s.name: s for s in aggregates}


def _csv_text(kind: str, aggregates: list[AggregateSeries]) -> str:
    """Fixed-schema CSV: mean/std for the gap metrics, worst case for the
    bound metrics (min over trajectories for min_pi, max for q_inf and
    v_inf), mean for the drift diagnostics (lsum, v_err)."""
    by_name = _series_map(aggregates)
    index = aggregates[0].index
    if kind == "matrix":
        columns = list(MATRIX_CSV_COLUMNS)
    else:
        columns = list(STOCHASTIC_CSV_COLUMNS)
        if "v_err" in by_name:
            columns.append("v_err")
    lines = [",".join(columns)]
    for row in range(index.shape[0]):
        cells = []
        for col in columns:
            if col == "t":
                cells.append(str(int(index[row, 0])))
            elif col == "k":
                cells.append(str(int(index[row, 1])))
            elif col.endswith("_mean"):
                cells.append(_fmt(by_name[col[:-5]].mean[row]))
            elif col.endswith("_std"):
                cells.append(_fmt(by_name[col[:-4]].std[row]))
            elif col == "min_pi":
                cells.append(_fmt(by_name[col].min[row]))
            elif col in ("q_inf", "v_inf"):
                cells.append(_fmt(by_name[col].max[row]))
            else:  # lsum, v_err
                cells.append(_fmt(by_name[col].mean[row]))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PointResult:
    """Everything produced at one sweep point."""

    point: dict[str, Any]
    label: str
    aggregates: list[AggregateSeries]
    warnings: tuple[str, ...]
    records: tuple[TrajectoryRecord, ...]


@dataclass(frozen=True)
class ExperimentBundle:
    """run_experiment output: per-point results plus the manifest dict."""

    config: ExperimentConfig
    points: list[PointResult]
    manifest: dict[str, Any]
    out_dir: str | None


def run_experiment(config: ExperimentConfig, *, force: bool = False,
                   quiet: bool = True, keep_records: bool = False) -> ExperimentBundle:
    """Execute every (sweep point, trajectory) run, aggregate, write files.

    Writes point_NNNN.csv per sweep point plus manifest.json when out_dir
    is set; refuses to overwrite existing outputs unless force is given.
    keep_records retains the raw per-trajectory records on each PointResult
    (memory permitting) for library callers.
    """
    from . import __version__

    out_dir = config.out_dir
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        manifest_path = os.path.join(out_dir, "manifest.json")
        existing = [p for p in ("manifest.json",) if os.path.exists(os.path.join(out_dir, p))]
        existing += [name for name in sorted(os.listdir(out_dir))
                     if name.startswith("point_") and name.endswith(".csv")]
        if existing and not force:
            raise OutputExists(
                f"{out_dir} already holds {existing[:3]}; pass force to overwrite")

    game = load_game(config.game)
    if config.kind == "matrix" and not isinstance(game, MatrixGame):
        raise BadConfig("kind 'matrix' needs a matrix game source")
    if config.kind == "stochastic" and not isinstance(game, StochasticGame):
        raise BadConfig("kind 'stochastic' needs a stochastic game source")

    runner = run_matrix_dynamics if config.kind == "matrix" else run_visbr
    points = []
    warnings_manifest: dict[str, list[str]] = {}
    for i, point in enumerate(config.sweep_points()):
        label = f"point_{i:04d}"
        records = []
        for j in range(config.n_trajectories):
            run_cfg = config._run_config(point, trajectory_seed(config.base_seed, point, j))
            records.append(runner(game, run_cfg))
        aggregates = aggregate(records, config.aggregation)
        warnings: list[str] = []
        for rec in records:
            for w in rec.warnings:
                if w not in warnings:
                    warnings.append(w)
        if not quiet:
            print(f"{label}: {point if point else 'no sweep'}"
                  f" ({config.n_trajectories} trajectories)")
            for w in warnings:
                print(f"  warning: {w}")
        if out_dir is not None:
            _atomic_write(os.path.join(out_dir, f"{label}.csv"),
                          _csv_text(config.kind, aggregates))
        warnings_manifest[label] = warnings
        points.append(PointResult(
            point=point, label=label, aggregates=aggregates,
            warnings=tuple(warnings),
            records=tuple(records) if keep_records else ()))

    manifest = {
        "config": config.to_dict(),
        "warnings": warnings_manifest,
        "condition_notes": ("closed-form stepsize checks only; remaining "
                            "conditions depend on analysis constants that are "
                            "not machine-checkable"),
        "tool_version": __version__,
        "game_hash": game_hash(game),
    }
    if out_dir is not None:
        _atomic_write(manifest_path,
                      json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return ExperimentBundle(config=config, points=points, manifest=manifest,
                            out_dir=out_dir)
