"""Seeded Monte Carlo trial runners for the three dimensional regimes.

Each trial derives child seeds from the root seed by counter
(``SeedSequence(seed, spawn_key=(trial, stream))`` with stream 0 for the
measure, 1 for the stack or directions, 2 for auxiliary randomness), so
summaries are pure functions of their configuration and trials can be
replayed or partitioned in any order.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, SupercriticalRegimeError
from .measure import DiscreteMeasure, measures_equal, new_discrete_measure
from .projection import ProjectionLaw, sample_stack
from .reconstruction import (
    Regime,
    ToleranceConfig,
    Verdict,
    candidate_support,
    certify_uniqueness,
    classify_regime,
)
from .sliced import empirical_sw, null_sw_witness, sample_directions, wasserstein2_exact

SEPARATION_MIN = 1e-6

_ATOM_LAWS = ("normal", "uniform")
_WEIGHT_MODES = ("uniform", "random")


@dataclass(frozen=True)
class TrialConfig:
    d: int
    n: int
    block_dims: tuple[int, ...]
    law: ProjectionLaw = ProjectionLaw.GAUSSIAN
    trials: int = 100
    seed: int = 0
    tolerances: ToleranceConfig = ToleranceConfig()
    atom_law: str = "normal"
    weight_mode: str = "uniform"
    witness_t: float = 1.0
    perturbation_scale: float = 1e-2
    coupling_steps: int = 100


@dataclass(frozen=True)
class TrialSummary:
    kind: str
    trials_run: int
    uniqueness_rate: float  # fraction of trials passing the regime's property
    support_cardinality_histogram: dict
    residual_extrema: dict
    failures: tuple[int, ...]
    wall_time: float


def _validate(cfg: TrialConfig) -> TrialConfig:
    if cfg.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {cfg.trials}")
    if cfg.seed < 0:
        raise ConfigError(f"seed must be nonnegative, got {cfg.seed}")
    if cfg.d < 2:
        raise ConfigError(f"ambient dimension must be >= 2, got {cfg.d}")
    if cfg.n < 1:
        raise ConfigError(f"atom count must be >= 1, got {cfg.n}")
    dims = tuple(int(k) for k in cfg.block_dims)
    if not dims or any(not 1 <= k < cfg.d for k in dims):
        raise ConfigError(f"block dims {dims} must each lie in [1, {cfg.d - 1}]")
    if cfg.atom_law not in _ATOM_LAWS:
        raise ConfigError(f"atom_law must be one of {_ATOM_LAWS}")
    if cfg.weight_mode not in _WEIGHT_MODES:
        raise ConfigError(f"weight_mode must be one of {_WEIGHT_MODES}")
    return replace(cfg, block_dims=dims, law=ProjectionLaw(cfg.law))


def _rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, stream)))


def _int_seed(seed: int, trial: int, stream: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(trial, stream)).generate_state(1, np.uint64)[0])


def _sample_measure(cfg: TrialConfig, trial: int) -> DiscreteMeasure:
    rng = _rng(cfg.seed, trial, 0)
    if cfg.atom_law == "normal":
        points = rng.standard_normal((cfg.n, cfg.d))
    else:
        points = rng.uniform(-1.0, 1.0, size=(cfg.n, cfg.d))
    if cfg.weight_mode == "uniform":
        weights = np.full(cfg.n, 1.0 / cfg.n)
    else:
        weights = rng.dirichlet(np.ones(cfg.n))
    return new_discrete_measure(points, weights)


def _summarize(kind, trials, ok_flags, sizes, residuals, t0) -> TrialSummary:
    histogram: dict[int, int] = {}
    for s in sizes:
        histogram[int(s)] = histogram.get(int(s), 0) + 1
    failures = tuple(i for i, ok in enumerate(ok_flags) if not ok)
    extrema = {"min": float(np.min(residuals)), "max": float(np.max(residuals))}
    return TrialSummary(
        kind=kind,
        trials_run=trials,
        uniqueness_rate=sum(ok_flags) / trials,
        support_cardinality_histogram=dict(sorted(histogram.items())),
        residual_extrema=extrema,
        failures=failures,
        wall_time=time.perf_counter() - t0,
    )


def run_uniqueness_trials(cfg: TrialConfig, progress=None) -> TrialSummary:
    """Supercritical regime: certify a unique reconstruction on every trial.

    ``progress``, when given, is called as ``progress(done, total)`` after
    each trial (all runners accept it; summaries never depend on it).
    """
    cfg = _validate(cfg)
    if classify_regime(cfg.d, cfg.block_dims) is not Regime.SUPERCRITICAL:
        raise ConfigError(
            f"uniqueness trials need sum(block_dims) > d, got {cfg.block_dims} vs d={cfg.d}"
        )
    t0 = time.perf_counter()
    ok_flags, sizes, residuals = [], [], []
    for trial in range(cfg.trials):
        Z = _sample_measure(cfg, trial)
        stack = sample_stack(cfg.d, cfg.block_dims, cfg.law, _int_seed(cfg.seed, trial, 1))
        report = certify_uniqueness(Z, stack, cfg.tolerances)
        ok_flags.append(report.verdict is Verdict.UNIQUE_SOLUTION)
        sizes.append(len(report.support.points))
        residuals.append(report.diagnostics["max_diagonal_residual"])
        if progress is not None:
            progress(trial + 1, cfg.trials)
    return _summarize("uniqueness", cfg.trials, ok_flags, sizes, residuals, t0)


def run_critical_cardinality(cfg: TrialConfig, progress=None) -> TrialSummary:
    """Critical regime: the support has exactly n^p points, one tuple each."""
    cfg = _validate(cfg)
    if classify_regime(cfg.d, cfg.block_dims) is not Regime.CRITICAL:
        raise ConfigError(
            f"critical trials need sum(block_dims) == d, got {cfg.block_dims} vs d={cfg.d}"
        )
    expected = cfg.n ** len(cfg.block_dims)
    t0 = time.perf_counter()
    ok_flags, sizes, residuals = [], [], []
    for trial in range(cfg.trials):
        Z = _sample_measure(cfg, trial)
        stack = sample_stack(cfg.d, cfg.block_dims, cfg.law, _int_seed(cfg.seed, trial, 1))
        support = candidate_support(
            Z, stack,
            accept_tol=cfg.tolerances.accept_tol,
            dedup_tol=cfg.tolerances.dedup_tol,
        )
        size = len(support.points)
        single = all(len(cp.generators) == 1 for cp in support.points)
        ok_flags.append(size == expected and single)
        sizes.append(size)
        residuals.append(max(cp.residual for cp in support.points))
        if progress is not None:
            progress(trial + 1, cfg.trials)
    return _summarize("critical", cfg.trials, ok_flags, sizes, residuals, t0)


def run_sw_separability(cfg: TrialConfig, progress=None) -> TrialSummary:
    """Zero-set behavior of the empirical sliced distance, by p vs d.

    p > d: no null witness exists (the constructor must refuse), the self
    distance vanishes, and a random perturbation is detected.  p < d: the
    kernel-translation witness is at distance zero with positive ambient
    distance.  p = d: the coupling witness is at distance zero and differs
    from the original measure.
    """
    cfg = _validate(cfg)
    if any(k != 1 for k in cfg.block_dims):
        raise ConfigError("separability trials use rank-1 directions: block_dims must be all 1")
    p = len(cfg.block_dims)
    if p == cfg.d and cfg.n < 2:
        raise ConfigError("p = d witnesses need at least two atoms")
    zero_tol = cfg.tolerances.zero_tol
    t0 = time.perf_counter()
    ok_flags, sizes, residuals = [], [], []
    for trial in range(cfg.trials):
        Z = _sample_measure(cfg, trial)
        dirs = sample_directions(cfg.d, p, _int_seed(cfg.seed, trial, 1))
        if p > cfg.d:
            try:
                null_sw_witness(Z, dirs)
                refused = False
            except SupercriticalRegimeError:
                refused = True
            self_sq = empirical_sw(Z, Z, dirs) ** 2
            noise = cfg.perturbation_scale * _rng(cfg.seed, trial, 2).standard_normal(Z.points.shape)
            alpha = new_discrete_measure(Z.points + noise, Z.weights)
            detected = empirical_sw(alpha, Z, dirs) > SEPARATION_MIN
            ok_flags.append(refused and self_sq <= zero_tol and detected)
            sizes.append(alpha.n_atoms)
            residuals.append(self_sq)
        elif p < cfg.d:
            witness = null_sw_witness(Z, dirs, t=cfg.witness_t)
            sw_sq = empirical_sw(witness, Z, dirs) ** 2
            ambient = wasserstein2_exact(witness, Z)
            ok_flags.append(sw_sq <= zero_tol and ambient > SEPARATION_MIN)
            sizes.append(witness.n_atoms)
            residuals.append(sw_sq)
        else:
            witness = null_sw_witness(Z, dirs, seed=_int_seed(cfg.seed, trial, 2),
                                      steps=cfg.coupling_steps)
            sw_sq = empirical_sw(witness, Z, dirs) ** 2
            distinct = not measures_equal(witness, Z, tol=1e-9)
            ok_flags.append(sw_sq <= zero_tol and distinct)
            sizes.append(witness.n_atoms)
            residuals.append(sw_sq)
        if progress is not None:
            progress(trial + 1, cfg.trials)
    return _summarize("sw_separability", cfg.trials, ok_flags, sizes, residuals, t0)


def config_to_dict(cfg: TrialConfig) -> dict:
    return {
        "d": cfg.d,
        "n": cfg.n,
        "block_dims": list(cfg.block_dims),
        "law": ProjectionLaw(cfg.law).value,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "tolerances": {
            "accept_tol": cfg.tolerances.accept_tol,
            "dedup_tol": cfg.tolerances.dedup_tol,
            "zero_tol": cfg.tolerances.zero_tol,
        },
        "atom_law": cfg.atom_law,
        "weight_mode": cfg.weight_mode,
        "witness_t": cfg.witness_t,
        "perturbation_scale": cfg.perturbation_scale,
        "coupling_steps": cfg.coupling_steps,
    }


def config_from_dict(d: dict) -> TrialConfig:
    tols = d.get("tolerances", {})
    cfg = TrialConfig(
        d=int(d["d"]),
        n=int(d["n"]),
        block_dims=tuple(int(k) for k in d["block_dims"]),
        law=ProjectionLaw(d.get("law", "gaussian")),
        trials=int(d.get("trials", 100)),
        seed=int(d.get("seed", 0)),
        tolerances=ToleranceConfig(
            accept_tol=tols.get("accept_tol"),
            dedup_tol=float(tols.get("dedup_tol", ToleranceConfig.dedup_tol)),
            zero_tol=float(tols.get("zero_tol", ToleranceConfig.zero_tol)),
        ),
        atom_law=d.get("atom_law", "normal"),
        weight_mode=d.get("weight_mode", "uniform"),
        witness_t=float(d.get("witness_t", 1.0)),
        perturbation_scale=float(d.get("perturbation_scale", 1e-2)),
        coupling_steps=int(d.get("coupling_steps", 100)),
    )
    return _validate(cfg)


def summary_to_dict(summary: TrialSummary, include_wall_time: bool = False) -> dict:
    # wall_time is excluded from canonical output so reruns are byte-identical
    out = {
        "kind": summary.kind,
        "trials_run": summary.trials_run,
        "uniqueness_rate": summary.uniqueness_rate,
        "support_cardinality_histogram": {
            str(k): v for k, v in sorted(summary.support_cardinality_histogram.items())
        },
        "residual_extrema": summary.residual_extrema,
        "failures": list(summary.failures),
    }
    if include_wall_time:
        out["wall_time"] = summary.wall_time
    return out


def write_histogram_csv(summary: TrialSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["support_cardinality", "count"])
        for k, v in sorted(summary.support_cardinality_histogram.items()):
            writer.writerow([k, v])
