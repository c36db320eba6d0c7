"""Bandit decision rules behind a common ``select`` / ``update`` interface."""

from __future__ import annotations

import numpy as np

from .confidence import neural_confidence_select, neural_confidence_step, neural_confidence_update
from .linear import linear_policy_step, linear_select, linear_update
from .npr import npr_select, npr_update
from .state import (CONFIDENCE_KINDS, DIAG_KINDS, KINDS, LINEAR_KINDS, NEURAL_KINDS, Hyper, Observation,
                    PolicyState, canonical_kind, make_state)


class Policy:
    """Owns a :class:`PolicyState` plus the random streams it consumes.

    ``perturb`` feeds NPR's reward perturbations and LinFPL's ridge
    perturbations; ``sample`` feeds Thompson draws and uniform picks.
    """

    def __init__(self, state: PolicyState, perturb: np.random.Generator | None = None,
                 sample: np.random.Generator | None = None):
        self.state = state
        self.perturb = perturb
        self.sample = sample

    @property
    def name(self) -> str:
        return self.state.kind

    @property
    def symmetric_inputs(self) -> bool:
        return self.state.kind in NEURAL_KINDS

    def select(self, candidates) -> int:
        kind = self.state.kind
        if kind == "NPR":
            return npr_select(self.state, candidates)
        if kind in CONFIDENCE_KINDS:
            return neural_confidence_select(self.state, candidates, self.sample)
        if kind == "LinFPL":
            return linear_select(self.state, candidates, self.perturb)
        return linear_select(self.state, candidates, self.sample)

    def update(self, context, reward: float) -> None:
        obs = Observation(np.asarray(context, dtype=np.float64), float(reward))
        kind = self.state.kind
        if kind == "NPR":
            npr_update(self.state, obs, self.perturb)
        elif kind in CONFIDENCE_KINDS:
            neural_confidence_update(self.state, obs)
        else:
            linear_update(self.state, obs)


def make_policy(kind: str, input_dim: int, hyper: Hyper, warmup: int, init=None, perturb=None, sample=None,
                record_features: bool = False) -> Policy:
    state = make_state(kind, input_dim, hyper, warmup, init_rng=init, record_features=record_features)
    return Policy(state, perturb=perturb, sample=sample)


__all__ = [
    "CONFIDENCE_KINDS", "DIAG_KINDS", "KINDS", "LINEAR_KINDS", "NEURAL_KINDS", "Hyper", "Observation",
    "Policy", "PolicyState", "canonical_kind", "linear_policy_step", "linear_select", "linear_update",
    "make_policy", "make_state", "neural_confidence_select", "neural_confidence_step",
    "neural_confidence_update", "npr_select", "npr_update",
]
