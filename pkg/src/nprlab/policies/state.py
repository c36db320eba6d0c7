from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, EmptyCandidates
from ..linalg import InverseTracker
from ..neural import NetworkParams, NetworkShape, TrainerConfig, init_symmetric

NPR = "NPR"
LINUCB = "LinUCB"
LINTS = "LinTS"
LINFPL = "LinFPL"
NEURALUCB = "NeuralUCB"
NEURALUCB_DIAG = "NeuralUCBDiag"
NEURALTS = "NeuralTS"
NEURALTS_DIAG = "NeuralTSDiag"
RANDOM = "Random"

LINEAR_KINDS = (LINUCB, LINTS, LINFPL, RANDOM)
CONFIDENCE_KINDS = (NEURALUCB, NEURALUCB_DIAG, NEURALTS, NEURALTS_DIAG)
NEURAL_KINDS = (NPR,) + CONFIDENCE_KINDS
DIAG_KINDS = (NEURALUCB_DIAG, NEURALTS_DIAG)
KINDS = NEURAL_KINDS + LINEAR_KINDS

DEFAULT_COV_CAP = 20_000


def canonical_kind(kind: str) -> str:
    for k in KINDS:
        if k.lower() == str(kind).lower():
            return k
    raise ConfigError(f"unknown policy kind {kind!r}; choose from {', '.join(KINDS)}")


@dataclass(frozen=True)
class Hyper:
    """Policy hyperparameters.

    ``eta`` is a dimensionless step scale: the trainer's step size on a
    history of ``n`` samples is ``eta / (m * (lam + L * n))``, which keeps
    full-batch gradient descent stable as the history grows.
    """

    lam: float = 1.0
    nu: float = 0.1
    eta: float = 1.0
    J: int = 100
    m: int = 32
    L: int = 3
    tol: float = 1e-8
    warm_start: bool = False
    cov_cap: int = DEFAULT_COV_CAP

    def step_size(self, n: int) -> float:
        return self.eta / (self.m * (self.lam + self.L * n))

    def trainer(self, n: int) -> TrainerConfig:
        return TrainerConfig(lam=self.lam, eta=self.step_size(n), J=self.J, tol=self.tol)


@dataclass(frozen=True)
class Observation:
    context: np.ndarray
    reward: float

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise ValueError(f"reward must be finite, got {self.reward}")


class _Buffer:
    # amortized O(1) append of fixed-width rows
    def __init__(self, width: int):
        self._data = np.zeros((16, width))
        self.n = 0

    def append(self, row) -> None:
        if self.n == self._data.shape[0]:
            self._data = np.concatenate([self._data, np.zeros_like(self._data)])
        self._data[self.n] = row
        self.n += 1

    @property
    def rows(self) -> np.ndarray:
        return self._data[: self.n]

    def __len__(self):
        return self.n


@dataclass
class PolicyState:
    kind: str
    input_dim: int
    hyper: Hyper
    warmup: int
    t: int = 0
    contexts: _Buffer = field(init=False, repr=False)
    rewards: list = field(default_factory=list, repr=False)
    net: NetworkParams | None = None
    anchor: NetworkParams | None = None
    cov: InverseTracker | None = None
    diag: np.ndarray | None = None
    b: np.ndarray | None = None
    features: _Buffer | None = field(default=None, repr=False)
    noise_draws: int = 0
    last_targets: np.ndarray | None = field(default=None, repr=False)
    last_train_steps: int = 0

    def __post_init__(self):
        self.contexts = _Buffer(self.input_dim)

    @property
    def history_X(self) -> np.ndarray:
        return self.contexts.rows

    @property
    def history_r(self) -> np.ndarray:
        return np.asarray(self.rewards, dtype=np.float64)

    @property
    def in_warmup(self) -> bool:
        return self.t < self.warmup

    def record(self, obs: Observation) -> None:
        x = np.asarray(obs.context, dtype=np.float64).ravel()
        if x.size != self.input_dim:
            raise ValueError(f"context has dimension {x.size}, policy expects {self.input_dim}")
        self.contexts.append(x)
        self.rewards.append(float(obs.reward))
        self.t += 1


def make_state(kind: str, input_dim: int, hyper: Hyper, warmup: int,
               init_rng: np.random.Generator | None = None, record_features: bool = False) -> PolicyState:
    """Fresh state for ``kind``; neural kinds draw their initial weights from ``init_rng``."""
    kind = canonical_kind(kind)
    state = PolicyState(kind, input_dim, hyper, warmup)
    if kind in NEURAL_KINDS:
        if init_rng is None:
            raise ConfigError(f"{kind} needs an init stream")
        shape = NetworkShape(input_dim, hyper.m, hyper.L)
        state.anchor = init_symmetric(shape, init_rng)
        state.net = state.anchor.copy()
        if kind in CONFIDENCE_KINDS:
            p = shape.p
            if kind in DIAG_KINDS:
                state.diag = np.full(p, float(hyper.lam))
            else:
                if p > hyper.cov_cap:
                    raise ConfigError(
                        f"{kind} needs a {p}x{p} covariance (cap {hyper.cov_cap}); use {kind}Diag instead"
                    )
                state.cov = InverseTracker(p, hyper.lam)
            if record_features:
                state.features = _Buffer(p)
    elif kind != RANDOM:
        state.cov = InverseTracker(input_dim, hyper.lam)
        state.b = np.zeros(input_dim)
        if record_features:
            state.features = _Buffer(input_dim)
    return state


def check_candidates(candidates) -> np.ndarray:
    C = np.asarray(candidates, dtype=np.float64)
    if C.ndim == 1:
        C = C[None, :] if C.size else C.reshape(0, 0)
    if C.shape[0] == 0:
        raise EmptyCandidates("no candidate contexts to choose from")
    return C


TIE_RTOL = 1e-12


def argmax_lowest(scores) -> int:
    """Index of the best score; scores within ``TIE_RTOL`` of the best count as ties, lowest index wins.

    The tolerance absorbs summation-order round-off (e.g. a symmetric
    network evaluates to ~1e-17 instead of 0), which would otherwise decide
    ties arbitrarily.
    """
    scores = np.asarray(scores, dtype=np.float64)
    best = float(np.max(scores))
    return int(np.flatnonzero(scores >= best - TIE_RTOL * max(1.0, abs(best)))[0])


def warmup_index(state: PolicyState, n_candidates: int) -> int:
    return state.t % n_candidates
