"""Seeded bandit runs: disclose, select, observe, update, with regret and timing."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from ..environments import (ClassificationEnv, SyntheticEnv, classification_reward, disclose, gen_synthetic,
                            load_csv_dataset, observe, symmetrize_rows)
from ..errors import ConfigError
from ..policies import NEURAL_KINDS, Policy, make_policy
from .config import ClassificationSpec, ExperimentConfig, SyntheticSpec
from .seeding import run_streams

log = logging.getLogger(__name__)

DEFAULT_CACHE = Path.home() / ".cache" / "nprlab"


@dataclass
class RegretTrace:
    run: int
    policy: str
    arm_id: np.ndarray
    reward: np.ndarray
    instant_regret: np.ndarray
    cum_regret: np.ndarray
    select_ms: np.ndarray
    update_ms: np.ndarray

    @property
    def T(self) -> int:
        return int(self.arm_id.size)

    @property
    def rounds(self) -> np.ndarray:
        return np.arange(1, self.T + 1)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if self.T else 0.0

    def summary(self) -> dict:
        return {
            "run": self.run,
            "policy": self.policy,
            "final_cum_regret": self.final_regret,
            "total_select_ms": float(np.sum(self.select_ms)),
            "total_update_ms": float(np.sum(self.update_ms)),
        }


def bundled_dataset(name: str) -> Path | None:
    ref = resources.files("nprlab") / "data" / f"{name}.csv"
    return Path(str(ref)) if ref.is_file() else None


def resolve_dataset(spec: ClassificationSpec, cache_dir=None) -> Path:
    if spec.path:
        return Path(spec.path)
    found = bundled_dataset(spec.name)
    if found is not None:
        return found
    cached = Path(cache_dir or DEFAULT_CACHE) / f"{spec.name}.csv"
    if cached.is_file():
        return cached
    raise ConfigError(f"dataset {spec.name!r} is neither bundled nor in the cache {cached.parent}; run `fetch` first")


def build_env(cfg: ExperimentConfig, rng: np.random.Generator, cache_dir=None):
    spec = cfg.env
    if isinstance(spec, SyntheticSpec):
        return gen_synthetic(spec.d, spec.K, spec.kind, rng, k=spec.k, xi=spec.xi)
    return load_csv_dataset(resolve_dataset(spec, cache_dir), spec.label_column, seed=rng)


def input_dim(env) -> int:
    if isinstance(env, SyntheticEnv):
        return env.d
    return env.features.shape[1] * env.num_classes


def default_policy(cfg: ExperimentConfig, env, streams) -> Policy:
    kind = cfg.policy.kind
    dim = input_dim(env) * (2 if kind in NEURAL_KINDS else 1)
    return make_policy(kind, dim, cfg.policy.hyper(cfg.warmstart), warmup=env.num_arms,
                       init=streams["init"], perturb=streams["perturb"], sample=streams["sample"])


PolicyFactory = Callable[[ExperimentConfig, object, dict], Policy]


def round_candidates(env, t: int, rng: np.random.Generator):
    """``(arm_ids, contexts, mean_rewards, instance)`` for 0-based round ``t``."""
    if isinstance(env, SyntheticEnv):
        ids, contexts = disclose(env, t, rng)
        return ids, contexts, env.rewards()[ids], None
    inst = env.instance(t)
    ids = np.arange(env.num_classes)
    means = np.array([classification_reward(env, inst, c + 1) for c in ids])
    return ids, env.candidates(t), means, inst


def _run_one(cfg: ExperimentConfig, run: int, factory: PolicyFactory, cache_dir=None) -> RegretTrace:
    streams = run_streams(cfg.master_seed, run)
    env = build_env(cfg, streams["env"], cache_dir)
    policy = factory(cfg, env, streams)
    T = cfg.T
    arm_id = np.zeros(T, dtype=np.int64)
    reward = np.zeros(T)
    regret = np.zeros(T)
    sel = np.zeros(T)
    upd = np.zeros(T)
    clock = time.perf_counter
    sym = getattr(policy, "symmetric_inputs", False)
    for t in range(T):
        try:
            ids, contexts, means, inst = round_candidates(env, t, streams["disclose"])
            shown = symmetrize_rows(contexts) if sym else contexts
            t0 = clock()
            idx = int(policy.select(shown))
            t1 = clock()
            if isinstance(env, SyntheticEnv):
                r = observe(env, contexts[idx], streams["observe"])
            else:
                r = classification_reward(env, inst, ids[idx] + 1)
            t2 = clock()
            policy.update(shown[idx], r)
            t3 = clock()
        except Exception as exc:
            exc.round = t + 1
            if exc.args and isinstance(exc.args[0], str):
                exc.args = (f"round {t + 1}: {exc.args[0]}",) + exc.args[1:]
            raise
        arm_id[t] = ids[idx]
        reward[t] = r
        regret[t] = max(float(np.max(means) - means[idx]), 0.0)
        if cfg.timing:
            sel[t] = (t1 - t0) * 1e3
            upd[t] = (t3 - t2) * 1e3
    name = getattr(policy, "name", cfg.policy.kind)
    return RegretTrace(run, name, arm_id, reward, regret, np.cumsum(regret), sel, upd)


def run_experiment(cfg: ExperimentConfig, policy_factory: PolicyFactory | None = None, cache_dir=None,
                   runs=None) -> list[RegretTrace]:
    """Execute ``cfg.num_runs`` independent runs of ``cfg.T`` rounds.

    ``policy_factory(cfg, env, streams)`` overrides policy construction; the
    default builds ``cfg.policy``. ``runs`` restricts which run indices execute.
    """
    factory = policy_factory or default_policy
    traces = []
    for run in (range(cfg.num_runs) if runs is None else runs):
        trace = _run_one(cfg, run, factory, cache_dir)
        log.info("run %d %s: cum_regret=%.4f", run, trace.policy, trace.final_regret)
        traces.append(trace)
    return traces
