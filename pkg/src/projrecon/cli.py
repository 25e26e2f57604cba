"""Command-line front end.

Machine-readable JSON goes to stdout (and optionally to ``--out``); progress
and aggregates go to stderr.  Exit codes: 0 when all property checks pass,
1 when a trial check fails (details stay in the JSON), 2 on configuration
errors.
"""

from __future__ import annotations

import json
import sys

import click

from .counterexample import instance_to_dict, polygon_counterexample
from .errors import ProjReconError
from .experiments import (
    config_from_dict,
    run_critical_cardinality,
    run_sw_separability,
    run_uniqueness_trials,
    summary_to_dict,
    write_histogram_csv,
)
from .measure import measure_from_dict
from .projection import stack_from_dict
from .reconstruction import (
    DEFAULT_CANDIDATE_DEDUP_TOL,
    ToleranceConfig,
    candidate_support,
    certify_uniqueness,
    report_to_dict,
    support_to_dict,
)
from .coupling import DEFAULT_TUPLE_BUDGET
from .sliced import directions_from_dict, empirical_sw


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2)
    click.echo(text)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _fail_config(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _load_problem(measure_path, stack_path, instance_path):
    """A (measure, stack) pair, either from two files or from an instance JSON.

    With no flags the instance is read from stdin, so the counterexample
    command pipes straight into support/reconstruct.
    """
    try:
        if measure_path and stack_path:
            return measure_from_dict(_read_json(measure_path)), stack_from_dict(_read_json(stack_path))
        if measure_path or stack_path:
            _fail_config("--measure and --stack must be given together")
        data = _read_json(instance_path or "-")
        return measure_from_dict(data["Z"]), stack_from_dict(data["stack"])
    except (ProjReconError, KeyError, ValueError, OSError) as exc:
        _fail_config(str(exc))


@click.group()
def main():
    """Discrete measure reconstruction from random linear pushforwards."""


@main.command("support")
@click.option("--measure", "measure_path", default=None, help="measure JSON file")
@click.option("--stack", "stack_path", default=None, help="stack JSON file")
@click.option("--instance", "instance_path", default=None,
              help="instance JSON file ('-' for stdin; default when no measure/stack)")
@click.option("--tol-accept", type=float, default=None)
@click.option("--tol-dedup", type=float, default=DEFAULT_CANDIDATE_DEDUP_TOL)
@click.option("--tuple-budget", type=int, default=DEFAULT_TUPLE_BUDGET)
@click.option("--out", default=None)
def support_cmd(measure_path, stack_path, instance_path, tol_accept, tol_dedup, tuple_budget, out):
    """Candidate support of the reconstruction problem."""
    Z, stack = _load_problem(measure_path, stack_path, instance_path)
    try:
        result = candidate_support(Z, stack, accept_tol=tol_accept,
                                   dedup_tol=tol_dedup, tuple_budget=tuple_budget)
    except ProjReconError as exc:
        _fail_config(str(exc))
    _emit(support_to_dict(result), out)


@main.command("reconstruct")
@click.option("--measure", "measure_path", default=None)
@click.option("--stack", "stack_path", default=None)
@click.option("--instance", "instance_path", default=None)
@click.option("--tol-accept", type=float, default=None)
@click.option("--tol-dedup", type=float, default=DEFAULT_CANDIDATE_DEDUP_TOL)
@click.option("--tol-zero", type=float, default=1e-12)
@click.option("--tuple-budget", type=int, default=DEFAULT_TUPLE_BUDGET)
@click.option("--out", default=None)
def reconstruct_cmd(measure_path, stack_path, instance_path, tol_accept, tol_dedup,
                    tol_zero, tuple_budget, out):
    """Uniqueness certificate for the reconstruction problem."""
    Z, stack = _load_problem(measure_path, stack_path, instance_path)
    tols = ToleranceConfig(accept_tol=tol_accept, dedup_tol=tol_dedup, zero_tol=tol_zero)
    try:
        report = certify_uniqueness(Z, stack, tols, tuple_budget=tuple_budget)
    except ProjReconError as exc:
        _fail_config(str(exc))
    _emit(report_to_dict(report), out)


@main.command("sw")
@click.option("--measure-a", "a_path", required=True)
@click.option("--measure-b", "b_path", required=True)
@click.option("--directions", "dirs_path", required=True)
@click.option("--out", default=None)
def sw_cmd(a_path, b_path, dirs_path, out):
    """Empirical sliced Wasserstein distance between two measures."""
    try:
        alpha = measure_from_dict(_read_json(a_path))
        beta = measure_from_dict(_read_json(b_path))
        dirs = directions_from_dict(_read_json(dirs_path))
        value = empirical_sw(alpha, beta, dirs)
    except (ProjReconError, KeyError, ValueError, OSError) as exc:
        _fail_config(str(exc))
    _emit({"sw": value, "dim": dirs.dim, "n_directions": dirs.n_directions}, out)


@main.command("counterexample")
@click.option("--n", "order", type=int, required=True, help="polygon order (>= 3)")
@click.option("--out", default=None)
def counterexample_cmd(order, out):
    """Regular 2n-gon instance with two measures sharing all pushforwards."""
    try:
        inst = polygon_counterexample(order)
    except ProjReconError as exc:
        _fail_config(str(exc))
    _emit(instance_to_dict(inst), out)


def _trial_options(f):
    for opt in reversed([
        click.option("--config", "config_path", default=None, help="TrialConfig JSON file"),
        click.option("--d", type=int, default=None),
        click.option("--n", type=int, default=None),
        click.option("--block-dims", "block_dims", default=None, help="comma-separated, e.g. 2,2"),
        click.option("--law", type=click.Choice(["gaussian", "sphere"]), default=None),
        click.option("--trials", type=int, default=None),
        click.option("--seed", type=int, default=None),
        click.option("--tol-accept", type=float, default=None),
        click.option("--tol-zero", type=float, default=None),
        click.option("--out", default=None),
        click.option("--csv", "csv_path", default=None),
    ]):
        f = opt(f)
    return f


def _build_config(config_path, d, n, block_dims, law, trials, seed, tol_accept, tol_zero):
    data = _read_json(config_path) if config_path else {}
    if d is not None:
        data["d"] = d
    if n is not None:
        data["n"] = n
    if block_dims is not None:
        data["block_dims"] = [int(k) for k in str(block_dims).split(",") if k != ""]
    if law is not None:
        data["law"] = law
    if trials is not None:
        data["trials"] = trials
    if seed is not None:
        data["seed"] = seed
    tols = dict(data.get("tolerances", {}))
    if tol_accept is not None:
        tols["accept_tol"] = tol_accept
    if tol_zero is not None:
        tols["zero_tol"] = tol_zero
    data["tolerances"] = tols
    for key in ("d", "n", "block_dims"):
        if key not in data:
            _fail_config(f"missing trial parameter {key!r} (flag or config file)")
    return config_from_dict(data)


def _progress(done: int, total: int) -> None:
    step = max(1, total // 10)
    if done % step == 0 or done == total:
        click.echo(f"  {done}/{total} trials", err=True)


def _run_trials(runner, config_path, d, n, block_dims, law, trials, seed,
                tol_accept, tol_zero, out, csv_path):
    try:
        cfg = _build_config(config_path, d, n, block_dims, law, trials, seed,
                            tol_accept, tol_zero)
    except (ProjReconError, ValueError, OSError) as exc:
        _fail_config(str(exc))
    try:
        summary = runner(cfg, progress=_progress)
    except ProjReconError as exc:
        _fail_config(str(exc))
    click.echo(
        f"[{summary.kind}] trials={summary.trials_run} "
        f"pass_rate={summary.uniqueness_rate:.4f} failures={len(summary.failures)} "
        f"wall_time={summary.wall_time:.2f}s",
        err=True,
    )
    _emit(summary_to_dict(summary), out)
    if csv_path:
        write_histogram_csv(summary, csv_path)
    sys.exit(0 if not summary.failures else 1)


@main.group("trials")
def trials_group():
    """Monte Carlo trial runners (JSON summary on stdout)."""


@trials_group.command("uniqueness")
@_trial_options
def trials_uniqueness(config_path, d, n, block_dims, law, trials, seed,
                      tol_accept, tol_zero, out, csv_path):
    """Supercritical uniqueness trials."""
    _run_trials(run_uniqueness_trials, config_path, d, n, block_dims, law, trials,
                seed, tol_accept, tol_zero, out, csv_path)


@trials_group.command("critical")
@_trial_options
def trials_critical(config_path, d, n, block_dims, law, trials, seed,
                    tol_accept, tol_zero, out, csv_path):
    """Critical-case support cardinality trials."""
    _run_trials(run_critical_cardinality, config_path, d, n, block_dims, law, trials,
                seed, tol_accept, tol_zero, out, csv_path)


@trials_group.command("sw-sep")
@_trial_options
def trials_sw_sep(config_path, d, n, block_dims, law, trials, seed,
                  tol_accept, tol_zero, out, csv_path):
    """Sliced Wasserstein separability trials."""
    _run_trials(run_sw_separability, config_path, d, n, block_dims, law, trials,
                seed, tol_accept, tol_zero, out, csv_path)


if __name__ == "__main__":  # pragma: no cover
    main()
