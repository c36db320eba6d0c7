"""Hyperparameter grid search on a short prefix of the horizon."""

from __future__ import annotations

import itertools
import logging
import math

from ..errors import DivergedLoss
from ..policies import LINEAR_KINDS, NEURAL_KINDS
from .config import ExperimentConfig
from .experiment import PolicyFactory, run_experiment
from .seeding import derive_seed

log = logging.getLogger(__name__)

GRID_ROUNDS = 1000
POWERS_5 = [10.0 ** -i for i in range(5)]
POWERS_4 = [10.0 ** -i for i in range(4)]


def default_grids(kind: str) -> dict[str, list[float]]:
    """lam and nu over {1, ..., 1e-4}; neural step scale eta over {1, ..., 1e-3}."""
    if kind in NEURAL_KINDS:
        return {"lam": list(POWERS_5), "eta": list(POWERS_4), "nu": list(POWERS_5)}
    if kind in LINEAR_KINDS and kind != "Random":
        return {"lam": list(POWERS_5), "nu": list(POWERS_5)}
    return {}


def combinations(grids: dict[str, list]) -> list[dict]:
    keys = list(grids)
    return [dict(zip(keys, values)) for values in itertools.product(*(grids[k] for k in keys))]


def grid_seed(cfg: ExperimentConfig) -> int:
    return derive_seed(cfg.master_seed, 0, "grid") % 2**63


def grid_search(cfg: ExperimentConfig, grids: dict[str, list] | None = None, rounds: int = GRID_ROUNDS,
                policy_factory: PolicyFactory | None = None, cache_dir=None):
    """Score every combination on one run of ``min(rounds, T)`` rounds; lowest regret wins.

    The search uses its own seed, derived from ``cfg.master_seed``, so the
    evaluation runs never see the selection data. Ties keep the first
    combination in product order; a combination whose training diverges
    scores ``inf``. Returns ``(best_config, table)``.
    """
    grids = default_grids(cfg.policy.kind) if grids is None else grids
    combos = combinations(grids) if grids else [{}]
    probe = cfg.replace(T=min(rounds, cfg.T), num_runs=1, master_seed=grid_seed(cfg))
    best, best_score, table = None, math.inf, []
    for combo in combos:
        trial = probe.with_policy(**combo) if combo else probe
        try:
            score = run_experiment(trial, policy_factory=policy_factory, cache_dir=cache_dir)[0].final_regret
        except DivergedLoss as exc:
            log.warning("combination %s diverged: %s", combo, exc)
            score = math.inf
        table.append({**combo, "cum_regret": score})
        log.info("grid %s -> %.4f", combo, score)
        if best is None or score < best_score:
            best, best_score = combo, score
    winner = cfg.with_policy(**best) if best else cfg
    return winner, table
