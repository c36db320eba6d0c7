"""Neural bandit with perturbed rewards: greedy selection over a network
retrained each round on the whole history with freshly perturbed rewards."""

from __future__ import annotations

import numpy as np

from ..neural import forward_batch, train_perturbed
from .state import NPR, Observation, PolicyState, argmax_lowest, check_candidates, warmup_index


def npr_select(state: PolicyState, candidates) -> int:
    """Round-robin during warm-up, then ``argmax f(x; theta_{t-1})`` (lowest index on ties)."""
    assert state.kind == NPR
    C = check_candidates(candidates)
    if state.in_warmup:
        return warmup_index(state, C.shape[0])
    return argmax_lowest(forward_batch(state.net, C))


def npr_update(state: PolicyState, obs: Observation, noise: np.random.Generator) -> PolicyState:
    """Record ``obs`` and retrain on ``{(x_s, r_s + gamma_s)}`` with a fresh ``gamma ~ N(0, nu^2)`` of length ``t``.

    Training starts from the anchor ``theta_0`` unless warm start is enabled.
    Exactly ``t`` standard normals are consumed from ``noise`` per call.
    """
    assert state.kind == NPR
    state.record(obs)
    hyper = state.hyper
    gamma = hyper.nu * noise.standard_normal(state.t)
    state.noise_draws += state.t
    targets = state.history_r + gamma
    state.last_targets = targets
    start = state.net if hyper.warm_start else state.anchor
    result = train_perturbed(start, state.anchor, state.history_X, targets, hyper.trainer(state.t))
    state.net = result.params
    state.last_train_steps = result.steps
    return state
