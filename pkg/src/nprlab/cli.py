"""Command line entry point: ``nprlab {run,grid,ntk,fetch,encode}``.

Exit codes: 0 success, 2 configuration/input error, 3 runtime error
(diverged training, linear algebra), 4 I/O error.
"""

from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from .errors import ConfigError, MissingLabelColumn, NprLabError, ParseError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("nprlab")


def _overrides(cfg, seed, runs, policy, out, warmstart, no_timing):
    from .harness.config import parse_config

    data = cfg.model_dump()
    if seed is not None:
        data["master_seed"] = seed
    if runs is not None:
        data["num_runs"] = runs
    if policy is not None:
        data["policy"]["kind"] = policy
    if out is not None:
        data["output"] = str(out)
    if warmstart:
        data["warmstart"] = True
    if no_timing:
        data["timing"] = False
    return parse_config(data)


def _check_offline(cfg, offline, cache_dir):
    from .harness.config import ClassificationSpec
    from .harness.experiment import resolve_dataset

    if isinstance(cfg.env, ClassificationSpec):
        path = resolve_dataset(cfg.env, cache_dir)
        if not path.is_file():
            raise FileNotFoundError(f"dataset file {path} not found" + (" (offline)" if offline else ""))


def _experiment_options(f):
    opts = [
        click.argument("config", type=click.Path(dir_okay=False, path_type=Path)),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Master seed (u64)."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Trace CSV path."),
        click.option("--runs", type=click.IntRange(min=1), default=None, help="Number of runs."),
        click.option("--policy", type=str, default=None, help="Override the policy kind."),
        click.option("--warmstart-net", is_flag=True, help="Retrain from the previous parameters, not theta_0."),
        click.option("--offline", is_flag=True, help="Never touch the network; datasets must be cached."),
        click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), default=None),
        click.option("--no-timing", is_flag=True, help="Write zero timings for byte-reproducible traces."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


@click.group()
@click.option("-v", "--verbose", count=True)
def cli(verbose):
    """Perturbed-reward neural bandits: experiments and diagnostics."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2), format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@_experiment_options
def run(config, seed, out, runs, policy, warmstart_net, offline, cache_dir, no_timing):
    """Run one experiment from a JSON config file."""
    from .harness.config import load_config
    from .harness.experiment import run_experiment
    from .harness.traces import summary_path, write_trace

    cfg = _overrides(load_config(config), seed, runs, policy, out, warmstart_net, no_timing)
    _check_offline(cfg, offline, cache_dir)
    traces = run_experiment(cfg, cache_dir=cache_dir)
    path = write_trace(traces, cfg.output or "trace.csv", extra={"config": cfg.model_dump()})
    click.echo(f"wrote {path} and {summary_path(path)}", err=True)


@cli.command()
@_experiment_options
@click.option("--grid", "grid_file", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="JSON object of hyperparameter lists; defaults to the standard grid for the policy.")
@click.option("--grid-rounds", type=click.IntRange(min=1), default=1000, show_default=True)
def grid(config, seed, out, runs, policy, warmstart_net, offline, cache_dir, no_timing, grid_file, grid_rounds):
    """Grid-search hyperparameters on a prefix, then run the winner for the full horizon."""
    from .harness.config import load_config
    from .harness.experiment import run_experiment
    from .harness.grid import grid_search
    from .harness.traces import write_trace

    cfg = _overrides(load_config(config), seed, runs, policy, out, warmstart_net, no_timing)
    _check_offline(cfg, offline, cache_dir)
    grids = None
    if grid_file is not None:
        try:
            grids = json.loads(grid_file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{grid_file}: not valid JSON ({exc})") from None
        if not isinstance(grids, dict) or not all(isinstance(v, list) and v for v in grids.values()):
            raise ConfigError("grid file must map hyperparameter names to non-empty lists")
        unknown = set(grids) - set(type(cfg.policy).model_fields) - {"kind"}
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
    best, table = grid_search(cfg, grids, rounds=grid_rounds, cache_dir=cache_dir)
    traces = run_experiment(best, cache_dir=cache_dir)
    path = write_trace(traces, best.output or "trace.csv",
                       extra={"config": best.model_dump(), "grid": table})
    click.echo(f"best {best.policy.model_dump()}; wrote {path}", err=True)


def _read_vectors(path: Path) -> np.ndarray:
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ParseError("non-numeric value", row=lineno) from None
    if not rows:
        raise ParseError("no context vectors found")
    if len({len(r) for r in rows}) != 1:
        raise ParseError("context rows have different lengths")
    return np.array(rows)


@cli.command()
@click.argument("contexts", type=click.Path(dir_okay=False, path_type=Path))
@click.option("-L", "--depth", type=click.IntRange(min=2), default=2, show_default=True)
@click.option("--T", "T", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--lam", type=float, default=1.0, show_default=True)
@click.option("--widths", default="16,64,256,1024", show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--R", "R", type=float, default=0.1, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--S", "S", type=float, default=1.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def ntk(contexts, depth, T, lam, widths, seeds, R, delta, S, out):
    """NTK matrix, effective dimension and Gram diagnostics for a context CSV."""
    from .ntk import ntk_report

    try:
        width_list = [int(w) for w in widths.split(",") if w.strip()]
    except ValueError:
        raise ConfigError(f"--widths must be comma-separated integers, got {widths!r}") from None
    X = _read_vectors(contexts)
    if np.any(np.linalg.norm(X, axis=1) == 0):
        raise ParseError("zero context vector")
    report = ntk_report(X, L=depth, T=T, lam=lam, widths=width_list, seeds=range(seeds), R=R, delta=delta, S=S)
    text = json.dumps(report.to_dict(), indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)


@cli.command()
@click.argument("manifest", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--offline", is_flag=True)
def fetch(manifest, cache_dir, offline):
    """Download (or verify) the datasets listed in a manifest."""
    from .datasets import fetch as do_fetch, load_manifest
    from .harness.experiment import DEFAULT_CACHE

    paths = do_fetch(load_manifest(manifest), cache_dir or DEFAULT_CACHE, offline=offline)
    for name, p in paths.items():
        click.echo(f"{name}\t{p}")


@cli.command()
@click.argument("dataset", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--label-column", default="label", show_default=True)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def encode(dataset, label_column, seed, out):
    """Dump disjoint-model contexts (one row per instance and class) for a CSV dataset."""
    from .environments import load_csv_dataset
    from .harness.traces import fmt

    env = load_csv_dataset(dataset, label_column, seed=seed)
    width = env.features.shape[1] * env.num_classes
    with Path(out).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["instance", "arm", "label", "reward"] + [f"x{j}" for j in range(width)])
        for t in range(env.n):
            inst = env.instance(t)
            for c, ctx in enumerate(env.candidates(t), start=1):
                w.writerow([inst, c, int(env.labels[inst]), int(env.labels[inst] == c)] + [fmt(v) for v in ctx])
    click.echo(f"wrote {env.n * env.num_classes} contexts to {out}", err=True)


def main(argv=None) -> int:
    from pydantic import ValidationError

    try:
        cli.main(args=argv, prog_name="nprlab", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_RUNTIME
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except (ConfigError, ValidationError, ParseError, MissingLabelColumn) as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except NprLabError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
