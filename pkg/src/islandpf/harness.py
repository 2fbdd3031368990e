"""Configuration-driven experiment runner.

A JSON config declares a model, a grid of (N1, N2) cells, a list of
within/across scheme pairings and a replication count; the runner executes
every (cell, pair, replication) run, parallelized over replications, and
writes two UTF-8 RFC-4180 CSVs:

- raw: one row per (cell, pair, replication, test function), byte-identical
  across reruns and worker counts for a fixed config and master seed;
- summary: one row per (cell, pair, function) with oracle-based bias,
  variance, MSE and the interaction/resample counters (bias always uses
  the oracle, never the sample mean).

Per-replication seeds derive from (master seed, cell index, replication
index), so no replication shares a stream and scheme pairs see common
random numbers within a cell.

Oracles: exact flow for finite models, the Kalman predictive law for the
linear Gaussian model, and for the stochastic volatility model a pinned
reference value from a one-million-particle bootstrap run (whose Monte
Carlo error is estimated from independent smaller runs and reported in the
``oracle_se`` column).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from . import _rng
from .asymptotics import constants, crossover_n1
from .engine import (
    AdaptiveESS,
    Bootstrap,
    EmpiricalEssSup,
    EpsilonBootstrap,
    FixedSchedule,
    SupNormInverse,
)
from .errors import IslandPfError, MissingCell
from .fk import FiniteModel, TimeIndexedModel, exact_flow, kalman_predictive
from .island import Independent, RunConfig, run
from .models import LgmParams, SvParams, make_finite_hmm, make_lgm, make_sv, simulate

RAW_COLUMNS = [
    "config_hash", "cell", "within", "across", "N1", "N2", "rep", "function",
    "estimate", "log_gamma1", "interactions", "island_resamples",
    "particle_resamples", "seed",
]

FAILURE_COLUMNS = [
    "config_hash", "cell", "within", "across", "N1", "N2", "rep", "seed",
    "error",
]

SUMMARY_COLUMNS = [
    "config_hash", "cell", "within", "across", "N1", "N2", "function", "reps",
    "mean", "oracle", "oracle_se", "bias", "variance", "mse", "rmse", "se",
    "mean_interactions", "mean_island_resamples", "mean_particle_resamples",
    "wall_clock_s",
]

WITHIN_LABELS = ("bootstrap", "epsilon-supnorm", "epsilon-empirical",
                 "epsilon-fixed", "ess")
ACROSS_LABELS = ("independent",) + WITHIN_LABELS

REFERENCE_PARTICLES = 1_000_000
REFERENCE_PILOT_PARTICLES = 100_000
REFERENCE_PILOTS = 8


class ConfigError(ValueError):
    """Bad experiment configuration, with location diagnostics when parsing."""


@dataclass(frozen=True)
class SchemePair:
    within: str
    across: str

    def __post_init__(self):
        if self.within not in WITHIN_LABELS:
            raise ConfigError(f"unknown within scheme {self.within!r}")
        if self.across not in ACROSS_LABELS:
            raise ConfigError(f"unknown across scheme {self.across!r}")

    @property
    def label(self) -> str:
        return f"{self.within}/{self.across}"


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    grid: tuple[tuple[int, int], ...]
    pairs: tuple[SchemePair, ...]
    replications: int
    seed: int
    functions: tuple[str, ...] = ("identity",)
    alpha_particles: float = 0.5
    alpha_islands: float = 0.5
    epsilon_schedule: Optional[tuple[float, ...]] = None
    crossover: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.grid:
            raise ConfigError("grid must list at least one (N1, N2) cell")
        for n1, n2 in self.grid:
            if n1 < 1 or n2 < 1:
                raise ConfigError(f"invalid cell ({n1}, {n2})")
        if not self.pairs:
            raise ConfigError("at least one scheme pair is required")
        if not 0 <= self.seed < 2**63:
            raise ConfigError("seed must be a 63-bit nonnegative integer")

    def canonical_json(self) -> str:
        payload = {
            "model": self.model,
            "grid": [list(c) for c in self.grid],
            "pairs": [{"within": p.within, "across": p.across} for p in self.pairs],
            "replications": self.replications,
            "seed": self.seed,
            "functions": list(self.functions),
            "alpha_particles": self.alpha_particles,
            "alpha_islands": self.alpha_islands,
            "epsilon_schedule": (
                list(self.epsilon_schedule) if self.epsilon_schedule else None
            ),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        pairs = tuple(
            SchemePair(within=p["within"], across=p["across"])
            for p in raw["pairs"]
        )
        cfg = ExperimentConfig(
            model=raw["model"],
            grid=tuple((int(a), int(b)) for a, b in raw["grid"]),
            pairs=pairs,
            replications=int(raw["replications"]),
            seed=int(raw["seed"]),
            functions=tuple(raw.get("functions", ["identity"])),
            alpha_particles=float(raw.get("alpha_particles", 0.5)),
            alpha_islands=float(raw.get("alpha_islands", 0.5)),
            epsilon_schedule=(
                tuple(float(e) for e in raw["epsilon_schedule"])
                if raw.get("epsilon_schedule")
                else None
            ),
            crossover=raw.get("crossover", {}),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc.args[0]!r}") from exc
    build_model(cfg.model)  # validate the declaration eagerly
    for name in cfg.functions:
        parse_function(name)
    return cfg


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# model declarations and test functions


def model_observations(decl: dict) -> Optional[np.ndarray]:
    """The observation sequence of an lgm/sv declaration (inline or seeded)."""
    kind = decl.get("kind")
    if kind == "finite":
        return None
    if "observations" in decl:
        return np.asarray(decl["observations"], dtype=float)
    try:
        horizon = int(decl["horizon"])
        data_seed = int(decl["data_seed"])
        params = decl["params"]
    except KeyError as exc:
        raise ConfigError(
            f"{kind} model needs observations or (horizon, data_seed): "
            f"missing {exc.args[0]!r}"
        ) from exc
    rng = _rng.derive_rng(data_seed, _rng.DATA)
    if kind == "lgm":
        p = LgmParams(observations=(0.0,), **params)
    else:
        p = SvParams(observations=(0.0,), **params)
    _, obs = simulate(kind, p, horizon, rng)
    return obs


def build_model(decl: dict) -> TimeIndexedModel:
    """A TimeIndexedModel from a JSON model declaration."""
    if not isinstance(decl, dict) or "kind" not in decl:
        raise ConfigError("model declaration needs a 'kind'")
    kind = decl["kind"]
    if kind == "finite":
        return build_finite(decl).time_indexed()
    if kind in ("lgm", "sv"):
        obs = tuple(float(y) for y in model_observations(decl))
        params = decl["params"]
        if kind == "lgm":
            return make_lgm(LgmParams(observations=obs, **params))
        return make_sv(SvParams(observations=obs, **params))
    raise ConfigError(f"unknown model kind {kind!r}")


def build_finite(decl: dict) -> FiniteModel:
    if "eta0" in decl:
        return make_finite_hmm(
            d=len(decl["eta0"]),
            horizon=len(decl["transitions"]),
            eta0=decl["eta0"],
            transitions=decl["transitions"],
            potentials=decl["potentials"],
        )
    try:
        return make_finite_hmm(
            d=int(decl["d"]),
            horizon=int(decl["horizon"]),
            seed=int(decl["seed"]),
            mixing=float(decl.get("mixing", 1.0)),
        )
    except KeyError as exc:
        raise ConfigError(
            f"finite model needs explicit tables or (d, horizon, seed): "
            f"missing {exc.args[0]!r}"
        ) from exc


def parse_function(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """Named test functions: identity, square, indicator(a,b)."""
    if name == "identity":
        return lambda x: np.asarray(x, dtype=float)
    if name == "square":
        return lambda x: np.asarray(x, dtype=float) ** 2
    if name.startswith("indicator(") and name.endswith(")"):
        try:
            a, b = (float(t) for t in name[len("indicator("):-1].split(","))
        except ValueError as exc:
            raise ConfigError(f"bad indicator spec {name!r}") from exc
        return lambda x: ((np.asarray(x, dtype=float) >= a)
                          & (np.asarray(x, dtype=float) < b)).astype(float)
    raise ConfigError(f"unknown test function {name!r}")


def scheme_from_label(label: str, level: str, cfg: ExperimentConfig):
    """Scheme object for a label; ``level`` picks the alpha to use."""
    if label == "independent":
        return Independent()
    if label == "bootstrap":
        return Bootstrap()
    if label == "ess":
        alpha = cfg.alpha_particles if level == "within" else cfg.alpha_islands
        return AdaptiveESS(alpha=alpha)
    if label == "epsilon-supnorm":
        return EpsilonBootstrap(SupNormInverse())
    if label == "epsilon-empirical":
        return EpsilonBootstrap(EmpiricalEssSup())
    if label == "epsilon-fixed":
        if cfg.epsilon_schedule is None:
            raise ConfigError("epsilon-fixed requires an epsilon_schedule")
        return EpsilonBootstrap(FixedSchedule(values=cfg.epsilon_schedule))
    raise ConfigError(f"unknown scheme label {label!r}")


# ---------------------------------------------------------------------------
# oracles


def oracle_values(cfg: ExperimentConfig) -> dict[str, tuple[float, float]]:
    """(value, monte-carlo error) of the target quantity per test function."""
    kind = cfg.model["kind"]
    if kind == "finite":
        fin = build_finite(cfg.model)
        flow = exact_flow(fin)
        states = np.arange(fin.d)
        return {
            name: (float(flow.etas[-1] @ parse_function(name)(states)), 0.0)
            for name in cfg.functions
        }
    if kind == "lgm":
        obs = model_observations(cfg.model)
        params = cfg.model["params"]
        pred = kalman_predictive(
            params["phi"], params["sigma_u"], params["sigma_v"], obs
        )
        mean, var = float(pred[-1, 0]), float(pred[-1, 1])
        out = {}
        for name in cfg.functions:
            if name == "identity":
                out[name] = (mean, 0.0)
            elif name == "square":
                out[name] = (var + mean * mean, 0.0)
            elif name.startswith("indicator("):
                a, b = (float(t) for t in name[len("indicator("):-1].split(","))
                sd = math.sqrt(var)
                out[name] = (
                    float(norm.cdf((b - mean) / sd) - norm.cdf((a - mean) / sd)),
                    0.0,
                )
            else:
                raise ConfigError(f"no LGM oracle for function {name!r}")
        return out
    if kind == "sv":
        return _sv_reference(cfg)
    raise ConfigError(f"unknown model kind {kind!r}")


def _sv_reference(cfg: ExperimentConfig) -> dict[str, tuple[float, float]]:
    """Pinned high-N bootstrap reference for the SV model.

    One run with 1e6 particles gives the value; the MC error is the
    standard error of 8 independent 1e5-particle runs scaled to the large
    run's size.
    """
    model = build_model(cfg.model)
    functions = {name: parse_function(name) for name in cfg.functions}
    ref_seed = _rng.derive_seed(cfg.seed, _rng.REFERENCE)

    def bootstrap_estimates(n1: int, seed: int) -> dict[str, float]:
        res = run(model, RunConfig(n1=n1, n2=1, within=Bootstrap(),
                                   across=Independent(), seed=seed,
                                   test_functions=functions))
        return res.estimates

    big = bootstrap_estimates(REFERENCE_PARTICLES, ref_seed)
    pilots = [
        bootstrap_estimates(
            REFERENCE_PILOT_PARTICLES,
            _rng.derive_seed(cfg.seed, _rng.REFERENCE, 1 + k),
        )
        for k in range(REFERENCE_PILOTS)
    ]
    scale = math.sqrt(REFERENCE_PILOT_PARTICLES / REFERENCE_PARTICLES)
    out = {}
    for name in cfg.functions:
        spread = np.std([p[name] for p in pilots], ddof=1)
        out[name] = (float(big[name]), float(spread * scale / math.sqrt(1)))
    return out


# ---------------------------------------------------------------------------
# the sweep


def replication_seed(cfg: ExperimentConfig, cell_index: int, rep: int) -> int:
    return _rng.derive_seed(cfg.seed, _rng.REPLICATION, cell_index, rep)


_MODEL_CACHE: dict[str, TimeIndexedModel] = {}


def _cached_model(decl_json: str) -> TimeIndexedModel:
    model = _MODEL_CACHE.get(decl_json)
    if model is None:
        model = build_model(json.loads(decl_json))
        _MODEL_CACHE[decl_json] = model
    return model


def _run_chunk(payload) -> tuple[list[tuple], list[tuple], tuple[int, int], float]:
    (decl_json, cfg_json, cell_index, n1, n2, pair_index,
     within_label, across_label, reps, island_workers) = payload
    t0 = time.perf_counter()
    cfg = config_from_dict(json.loads(cfg_json))
    model = _cached_model(decl_json)
    functions = {name: parse_function(name) for name in cfg.functions}
    within = scheme_from_label(within_label, "within", cfg)
    across = scheme_from_label(across_label, "across", cfg)
    rows = []
    failures = []
    for rep in reps:
        seed = replication_seed(cfg, cell_index, rep)
        try:
            res = run(
                model,
                RunConfig(n1=n1, n2=n2, within=within, across=across, seed=seed,
                          test_functions=functions),
                island_workers=island_workers,
            )
        except IslandPfError as exc:
            # a dead replication is recorded, not fatal to the sweep
            failures.append((cell_index, pair_index, rep, seed,
                             f"{type(exc).__name__}: {exc}"))
            continue
        for name in cfg.functions:
            rows.append((
                cell_index, pair_index, rep, name,
                res.estimates[name], res.log_gamma1, res.interactions,
                res.island_resamples, res.particle_resamples, seed,
            ))
    return rows, failures, (cell_index, pair_index), time.perf_counter() - t0


def _chunked(indices, size):
    for start in range(0, len(indices), size):
        yield indices[start:start + size]


def run_experiment(
    cfg: ExperimentConfig,
    out_dir,
    workers: Optional[int] = None,
    island_workers: int = 1,
) -> tuple[Path, Path]:
    """Execute the full sweep; returns the (raw, summary) CSV paths.

    Replications are distributed over a process pool; rows are sorted by
    (cell, pair, replication, function) before writing so output bytes do
    not depend on the worker count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = workers or os.cpu_count() or 1
    decl_json = json.dumps(cfg.model, sort_keys=True)
    cfg_json = cfg.canonical_json()

    tasks = []
    chunk = max(1, math.ceil(cfg.replications / max(1, workers * 8)))
    for cell_index, (n1, n2) in enumerate(cfg.grid):
        for pair_index, pair in enumerate(cfg.pairs):
            for reps in _chunked(range(cfg.replications), chunk):
                tasks.append((
                    decl_json, cfg_json, cell_index, n1, n2, pair_index,
                    pair.within, pair.across, list(reps), island_workers,
                ))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks, chunksize=1))
    else:
        chunks = [_run_chunk(t) for t in tasks]

    rows = [row for chunk_rows, _, _, _ in chunks for row in chunk_rows]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    failures = [f for _, chunk_failures, _, _ in chunks for f in chunk_failures]
    failures.sort(key=lambda f: (f[0], f[1], f[2]))

    group_clock: dict[tuple[int, int], float] = {}
    for _, _, group, elapsed in chunks:
        group_clock[group] = group_clock.get(group, 0.0) + elapsed

    raw_path = out / "raw.csv"
    _write_raw(cfg, rows, raw_path)
    if failures:
        _write_failures(cfg, failures, out / "failures.csv")
    summary_path = out / "summary.csv"
    summary = summarize_rows(cfg, rows, group_clock)
    _write_csv(summary_path, SUMMARY_COLUMNS, summary)
    return raw_path, summary_path


def _write_failures(cfg: ExperimentConfig, failures, path: Path) -> None:
    out = []
    for cell_index, pair_index, rep, seed, message in failures:
        n1, n2 = cfg.grid[cell_index]
        pair = cfg.pairs[pair_index]
        out.append((
            cfg.config_hash, f"{n1}x{n2}", pair.within, pair.across, n1, n2,
            rep, seed, message,
        ))
    _write_csv(path, FAILURE_COLUMNS, out)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(v) for v in row])


def _write_raw(cfg: ExperimentConfig, rows, path: Path) -> None:
    out = []
    for (cell_index, pair_index, rep, name, estimate, log_gamma1,
         interactions, island_resamples, particle_resamples, seed) in rows:
        n1, n2 = cfg.grid[cell_index]
        pair = cfg.pairs[pair_index]
        out.append((
            cfg.config_hash, f"{n1}x{n2}", pair.within, pair.across, n1, n2,
            rep, name, float(estimate), float(log_gamma1), interactions,
            island_resamples, particle_resamples, seed,
        ))
    _write_csv(path, RAW_COLUMNS, out)


def summarize_rows(
    cfg: ExperimentConfig,
    rows,
    group_clock: Optional[dict] = None,
) -> list[tuple]:
    """Summary rows (one per cell, pair, function) from in-memory raw rows."""
    oracles = oracle_values(cfg)
    grouped: dict[tuple[int, int, str], list] = {}
    for row in rows:
        grouped.setdefault((row[0], row[1], row[3]), []).append(row)
    out = []
    for (cell_index, pair_index, name), members in sorted(grouped.items()):
        n1, n2 = cfg.grid[cell_index]
        pair = cfg.pairs[pair_index]
        est = np.array([m[4] for m in members], dtype=float)
        oracle, oracle_se = oracles[name]
        bias = float(est.mean() - oracle)
        variance = float(est.var(ddof=0))
        mse = float(np.mean((est - oracle) ** 2))
        se = float(est.std(ddof=1) / math.sqrt(est.size)) if est.size > 1 else 0.0
        clock = (group_clock or {}).get((cell_index, pair_index), "")
        out.append((
            cfg.config_hash, f"{n1}x{n2}", pair.within, pair.across, n1, n2,
            name, est.size, float(est.mean()), oracle, oracle_se, bias,
            variance, mse, math.sqrt(mse), se,
            float(np.mean([m[6] for m in members])),
            float(np.mean([m[7] for m in members])),
            float(np.mean([m[8] for m in members])),
            clock if clock == "" else float(clock),
        ))
    return out


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def summarize_raw_file(
    raw_path, cfg: Optional[ExperimentConfig] = None
) -> list[tuple]:
    """Summary recomputed from a raw CSV.

    With a config the oracle columns are filled; without one they are left
    empty (bias is never taken against the sample mean).
    """
    records = read_csv(raw_path)
    oracles = None
    if cfg is not None:
        oracles = oracle_values(cfg)
    grouped: dict[tuple, list[dict]] = {}
    for rec in records:
        key = (rec["cell"], rec["within"], rec["across"], rec["function"])
        grouped.setdefault(key, []).append(rec)
    out = []
    for (cell, within, across, name), members in sorted(grouped.items()):
        est = np.array([float(m["estimate"]) for m in members])
        n1, n2 = int(members[0]["N1"]), int(members[0]["N2"])
        if oracles is not None:
            oracle, oracle_se = oracles[name]
            bias = float(est.mean() - oracle)
            mse = float(np.mean((est - oracle) ** 2))
            rmse = math.sqrt(mse)
        else:
            oracle = oracle_se = bias = mse = rmse = ""
        se = float(est.std(ddof=1) / math.sqrt(est.size)) if est.size > 1 else 0.0
        out.append((
            members[0]["config_hash"], cell, within, across, n1, n2, name,
            est.size, float(est.mean()), oracle, oracle_se, bias,
            float(est.var(ddof=0)), mse, rmse, se,
            float(np.mean([float(m["interactions"]) for m in members])),
            float(np.mean([float(m["island_resamples"]) for m in members])),
            float(np.mean([float(m["particle_resamples"]) for m in members])),
            "",
        ))
    return out


# ---------------------------------------------------------------------------
# derived tables


def variance_gain_table(summary_rows: list[dict], baseline_across: str = "bootstrap"):
    """Percentage variance gain of each across scheme over the baseline.

    100 * (1 - var_alt / var_baseline) per (cell, within, function); raises
    MissingCell when the baseline lacks a matching cell.
    """
    baseline = {}
    alts = []
    for rec in summary_rows:
        key = (rec["cell"], rec["within"], rec["function"])
        if rec["across"] == baseline_across:
            baseline[key] = float(rec["variance"])
        else:
            alts.append(rec)
    out = []
    for rec in alts:
        key = (rec["cell"], rec["within"], rec["function"])
        if key not in baseline:
            raise MissingCell(
                f"no {baseline_across}-across row for cell {key[0]!r}, "
                f"within {key[1]!r}, function {key[2]!r}"
            )
        base = baseline[key]
        gain = 100.0 * (1.0 - float(rec["variance"]) / base) if base > 0 else 0.0
        out.append({
            "cell": rec["cell"], "N1": int(rec["N1"]), "N2": int(rec["N2"]),
            "within": rec["within"], "across": rec["across"],
            "function": rec["function"], "gain_percent": gain,
        })
    return out


def crossover_report(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
) -> list[dict]:
    """Empirical MSE on both sides of the predicted interaction threshold.

    For each N2: the threshold B^2 N2 / V_tilde plus the empirical MSE of
    independent vs double-bootstrap islands at N1 a factor below and above
    it.  Needs a finite model.
    """
    if cfg.model.get("kind") != "finite":
        raise ConfigError("crossover report needs a finite model")
    fin = build_finite(cfg.model)
    opts = cfg.crossover
    name = opts.get("function", cfg.functions[0])
    n2_list = [int(v) for v in opts.get("n2", [256])]
    factor = float(opts.get("factor", 4.0))
    reps = int(opts.get("replications", cfg.replications))
    f_vec = parse_function(name)(np.arange(fin.d))
    c = constants(fin, f_vec, name=name)
    flow = exact_flow(fin)
    truth = float(flow.etas[-1] @ f_vec)

    out = []
    for n2 in n2_list:
        threshold = crossover_n1(c, n2)
        if not np.isfinite(threshold) or threshold <= 0:
            out.append({
                "N2": n2, "threshold": threshold, "N1": "", "mode": "",
                "mse": "", "se": "", "note": "degenerate threshold",
            })
            continue
        sizes = sorted({max(1, round(threshold / factor)),
                        max(2, round(threshold * factor))})
        for n1 in sizes:
            for mode, across in (("independent", "independent"),
                                 ("interacting", "bootstrap")):
                sub = ExperimentConfig(
                    model=cfg.model, grid=((n1, n2),),
                    pairs=(SchemePair(within="bootstrap", across=across),),
                    replications=reps, seed=cfg.seed,
                    functions=(name,),
                )
                rows = _run_config_rows(sub, workers)
                est = np.array([r[4] for r in rows])
                sq = (est - truth) ** 2
                out.append({
                    "N2": n2, "threshold": threshold, "N1": n1, "mode": mode,
                    "mse": float(sq.mean()),
                    "se": float(sq.std(ddof=1) / math.sqrt(sq.size)),
                    "note": "",
                })
    return out


def _run_config_rows(cfg: ExperimentConfig, workers: Optional[int]) -> list[tuple]:
    """All raw rows of a config, without touching the filesystem."""
    workers = workers or os.cpu_count() or 1
    decl_json = json.dumps(cfg.model, sort_keys=True)
    cfg_json = cfg.canonical_json()
    chunk = max(1, math.ceil(cfg.replications / max(1, workers * 8)))
    tasks = []
    for cell_index, (n1, n2) in enumerate(cfg.grid):
        for pair_index, pair in enumerate(cfg.pairs):
            for reps in _chunked(range(cfg.replications), chunk):
                tasks.append((
                    decl_json, cfg_json, cell_index, n1, n2, pair_index,
                    pair.within, pair.across, list(reps), 1,
                ))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks, chunksize=1))
    else:
        chunks = [_run_chunk(t) for t in tasks]
    rows = [row for chunk_rows, _, _, _ in chunks for row in chunk_rows]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows


def exact_constants_table(cfg: ExperimentConfig) -> list[dict]:
    """B, V, B_tilde, V_tilde and the per-N2 crossover slope per function."""
    if cfg.model.get("kind") != "finite":
        raise ConfigError("exact constants need a finite model")
    fin = build_finite(cfg.model)
    states = np.arange(fin.d)
    out = []
    for name in cfg.functions:
        f_vec = parse_function(name)(states)
        c = constants(fin, f_vec, name=name)
        slope = crossover_n1(c, 1)
        out.append({
            "function": name, "n": fin.horizon, "B": c.b, "V": c.v,
            "B_tilde": c.b_tilde, "V_tilde": c.v_tilde,
            "crossover_N1_per_N2": slope,
        })
    return out
