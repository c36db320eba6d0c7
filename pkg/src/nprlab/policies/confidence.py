"""NeuralUCB / NeuralTS with full or diagonal gradient covariance."""

from __future__ import annotations

import numpy as np

from ..neural import forward_batch, gradient, gradient_batch, train_perturbed
from .state import (CONFIDENCE_KINDS, DIAG_KINDS, NEURALTS, NEURALTS_DIAG, Observation, PolicyState,
                    argmax_lowest, check_candidates, warmup_index)


def features(state: PolicyState, C: np.ndarray) -> np.ndarray:
    """Gradient features ``g(x; theta_{t-1}) / sqrt(m)``, one row per context."""
    return gradient_batch(state.net, C) / np.sqrt(state.hyper.m)


def confidence_widths(state: PolicyState, Z: np.ndarray) -> np.ndarray:
    """``||z||_{A^{-1}}`` per row, from the full inverse or the diagonal approximation."""
    if state.kind in DIAG_KINDS:
        q = np.sum(Z * Z / state.diag, axis=1)
    else:
        q = np.einsum("ij,ij->i", Z @ state.cov.Ainv, Z)
    return np.sqrt(np.clip(q, 0.0, None))


def neural_confidence_select(state: PolicyState, candidates, noise: np.random.Generator | None = None) -> int:
    assert state.kind in CONFIDENCE_KINDS
    C = check_candidates(candidates)
    if state.in_warmup:
        return warmup_index(state, C.shape[0])
    mean = forward_batch(state.net, C)
    width = confidence_widths(state, features(state, C))
    nu = state.hyper.nu
    if state.kind in (NEURALTS, NEURALTS_DIAG):
        scores = mean + nu * width * noise.standard_normal(C.shape[0])
    else:
        scores = mean + nu * width
    return argmax_lowest(scores)


def neural_confidence_update(state: PolicyState, obs: Observation) -> PolicyState:
    """Accumulate the chosen arm's gradient feature, then retrain on the raw history."""
    assert state.kind in CONFIDENCE_KINDS
    state.record(obs)
    x = state.history_X[-1]
    z = gradient(state.net, x) / np.sqrt(state.hyper.m)
    if state.kind in DIAG_KINDS:
        state.diag += z * z
    else:
        state.cov.update(z)
    if state.features is not None:
        state.features.append(z)
    hyper = state.hyper
    start = state.net if hyper.warm_start else state.anchor
    result = train_perturbed(start, state.anchor, state.history_X, state.history_r, hyper.trainer(state.t))
    state.net = result.params
    state.last_train_steps = result.steps
    return state


def neural_confidence_step(state: PolicyState, candidates, obs: Observation | None = None,
                           noise: np.random.Generator | None = None) -> tuple[int, PolicyState]:
    if obs is not None:
        neural_confidence_update(state, obs)
    return neural_confidence_select(state, candidates, noise), state
