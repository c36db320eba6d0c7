"""Ridge-regression baselines (LinUCB, LinTS, LinFPL) and uniform random."""

from __future__ import annotations

import numpy as np

from ..linalg import chol_logdet
from .state import (LINEAR_KINDS, LINFPL, LINTS, LINUCB, RANDOM, Observation, PolicyState, argmax_lowest,
                    check_candidates, warmup_index)


def ridge_estimate(state: PolicyState) -> np.ndarray:
    return state.cov.Ainv @ state.b


def linear_scores(state: PolicyState, C: np.ndarray, noise: np.random.Generator | None) -> np.ndarray:
    nu = state.hyper.nu
    if state.kind == LINUCB:
        theta = ridge_estimate(state)
        bonus = np.sqrt(np.clip(np.einsum("ij,jk,ik->i", C, state.cov.Ainv, C), 0.0, None))
        return C @ theta + nu * bonus
    if state.kind == LINTS:
        # theta ~ N(A^{-1} b, nu^2 A^{-1}) via A = L L^T
        Lf, _ = chol_logdet(state.cov.A)
        eps = noise.standard_normal(state.input_dim)
        theta = ridge_estimate(state) + nu * np.linalg.solve(Lf.T, eps)
        return C @ theta
    if state.kind == LINFPL:
        gamma = nu * noise.standard_normal(state.t)
        state.noise_draws += state.t
        b = state.b + state.history_X.T @ gamma if state.t else state.b
        return C @ (state.cov.Ainv @ b)
    raise ValueError(f"{state.kind} has no linear score")


def linear_select(state: PolicyState, candidates, noise: np.random.Generator | None = None) -> int:
    assert state.kind in LINEAR_KINDS
    C = check_candidates(candidates)
    if state.in_warmup:
        return warmup_index(state, C.shape[0])
    if state.kind == RANDOM:
        return int(noise.integers(C.shape[0]))
    return argmax_lowest(linear_scores(state, C, noise))


def linear_update(state: PolicyState, obs: Observation) -> PolicyState:
    assert state.kind in LINEAR_KINDS
    state.record(obs)
    if state.kind == RANDOM:
        return state
    x = state.history_X[-1]
    state.cov.update(x)
    state.b += obs.reward * x
    if state.features is not None:
        state.features.append(x)
    return state


def linear_policy_step(state: PolicyState, candidates, obs: Observation | None = None,
                       noise: np.random.Generator | None = None) -> tuple[int, PolicyState]:
    """Fold in the previous round's observation (if any), then choose among ``candidates``."""
    if obs is not None:
        linear_update(state, obs)
    return linear_select(state, candidates, noise), state
