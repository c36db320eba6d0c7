"""Reward oracles: synthetic pools and classification-as-bandit datasets."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadClassIndex, MissingLabelColumn, ParseError, ZeroVector

H1 = "H1"
H2 = "H2"


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_unit_ball(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    radius = rng.random(n) ** (1.0 / d)
    return g * radius[:, None]


def to_sphere(X: np.ndarray) -> np.ndarray:
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


@dataclass(frozen=True)
class SyntheticEnv:
    d: int
    K: int
    k: int
    contexts: np.ndarray
    kind: str
    Sigma: np.ndarray | None = None
    theta: np.ndarray | None = None
    xi: float = 0.1

    @property
    def num_arms(self) -> int:
        return self.K

    def rewards(self) -> np.ndarray:
        """True mean reward of every arm in the pool."""
        return true_reward(self, self.contexts)


def gen_synthetic(d: int, K: int, kind: str, seed, k: int | None = None, xi: float = 0.1) -> SyntheticEnv:
    """Pool of ``K`` unit contexts with an ``h1`` (quadratic) or ``h2`` (Gaussian bump) reward.

    Ball samples are projected to the unit sphere; for ``H2`` the direction
    ``theta`` is projected too.
    """
    if d < 1 or K < 1:
        raise ValueError("need d >= 1 and K >= 1")
    k = K if k is None else k
    if not 1 <= k <= K:
        raise ValueError(f"need 1 <= k <= K, got k={k}, K={K}")
    if xi < 0:
        raise ValueError("xi must be >= 0")
    kind = kind.upper()
    rng = _rng(seed)
    contexts = to_sphere(sample_unit_ball(rng, K, d))
    if kind == H1:
        return SyntheticEnv(d, K, k, contexts, kind, Sigma=rng.standard_normal((d, d)), xi=xi)
    if kind == H2:
        theta = to_sphere(sample_unit_ball(rng, 1, d))[0]
        return SyntheticEnv(d, K, k, contexts, kind, theta=theta, xi=xi)
    raise ValueError(f"unknown synthetic kind {kind!r}; expected H1 or H2")


def true_reward(env: SyntheticEnv, context):
    """``h1(x) = 0.01 x^T S S^T x`` or ``h2(x) = exp(-10 (x^T theta)^2)``; vectorized over rows."""
    x = np.asarray(context, dtype=np.float64)
    if x.shape[-1] != env.d:
        raise ValueError(f"context dimension {x.shape[-1]} != {env.d}")
    if env.kind == H1:
        proj = x @ env.Sigma
        val = 1e-2 * np.sum(proj * proj, axis=-1)
    else:
        val = np.exp(-10.0 * (x @ env.theta) ** 2)
    return float(val) if np.ndim(val) == 0 else val


def disclose(env: SyntheticEnv, round: int, rng: np.random.Generator):
    """Arm ids (ascending) and contexts of the ``k`` arms shown this round.

    ``round`` is informational; the draw depends only on ``rng``'s position.
    """
    if env.k == env.K:
        ids = np.arange(env.K)
    else:
        ids = np.sort(rng.choice(env.K, size=env.k, replace=False))
    return ids, env.contexts[ids]


def observe(env: SyntheticEnv, context, rng: np.random.Generator) -> float:
    mean = true_reward(env, context)
    if env.xi == 0:
        return float(mean)
    return float(mean + env.xi * rng.standard_normal())


def symmetrize(x) -> np.ndarray:
    """``[u; u] / sqrt(2)`` with ``u = x / ||x||``; unit norm, equal halves."""
    x = np.asarray(x, dtype=np.float64)
    n = np.linalg.norm(x)
    if n == 0:
        raise ZeroVector("cannot symmetrize the zero vector")
    u = x / n
    return np.concatenate([u, u]) / np.sqrt(2.0)


def symmetrize_rows(X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(n == 0):
        raise ZeroVector("cannot symmetrize the zero vector")
    U = X / n
    return np.concatenate([U, U], axis=1) / np.sqrt(2.0)


def disjoint_encode(x, c: int, num_classes: int) -> np.ndarray:
    """Place ``x`` in block ``c`` (1-based) of a ``num_classes``-block zero vector."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if not 1 <= c <= num_classes:
        raise BadClassIndex(f"class {c} outside [1, {num_classes}]")
    out = np.zeros(x.size * num_classes)
    out[(c - 1) * x.size: c * x.size] = x
    return out


def disjoint_encode_all(x, num_classes: int) -> np.ndarray:
    """All ``num_classes`` encodings of one instance, one per row."""
    x = np.asarray(x, dtype=np.float64).ravel()
    out = np.zeros((num_classes, x.size * num_classes))
    for c in range(num_classes):
        out[c, c * x.size:(c + 1) * x.size] = x
    return out


@dataclass(frozen=True)
class ClassificationEnv:
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    order: np.ndarray
    class_names: tuple = ()
    feature_names: tuple = ()

    @property
    def num_arms(self) -> int:
        return self.num_classes

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def instance(self, round: int) -> int:
        """Instance shown at 0-based ``round``; passes wrap around the permutation."""
        return int(self.order[round % self.n])

    def candidates(self, round: int) -> np.ndarray:
        return disjoint_encode_all(self.features[self.instance(round)], self.num_classes)


def classification_reward(env: ClassificationEnv, instance: int, chosen_class: int) -> float:
    """1.0 for the correct (1-based) class, else 0.0."""
    return 1.0 if int(env.labels[instance]) == int(chosen_class) else 0.0


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_csv_dataset(path, label_column: str, seed=0, standardize: bool = True) -> ClassificationEnv:
    """Read a headered CSV into a :class:`ClassificationEnv`.

    Columns containing any non-numeric value are one-hot encoded (categories
    sorted); numeric features are standardized per column, then every
    instance is scaled to unit norm. Rows are shuffled with ``seed``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file; a header row is required", row=1) from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise MissingLabelColumn(f"label column {label_column!r} not in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            for name, val in zip(header, row):
                if val.strip() == "":
                    raise ParseError("empty field", row=lineno, column=name)
            rows.append([v.strip() for v in row])
    if not rows:
        raise ParseError("no data rows", row=2)

    li = header.index(label_column)
    raw_labels = [r[li] for r in rows]
    class_names = sorted(set(raw_labels), key=lambda s: (not _is_number(s), float(s) if _is_number(s) else 0.0, s))
    label_of = {name: i + 1 for i, name in enumerate(class_names)}
    labels = np.array([label_of[v] for v in raw_labels], dtype=np.int64)

    cols, names = [], []
    for j, name in enumerate(header):
        if j == li:
            continue
        values = [r[j] for r in rows]
        if all(_is_number(v) for v in values):
            col = np.array([float(v) for v in values])
            if standardize:
                sd = col.std()
                col = (col - col.mean()) / sd if sd > 0 else np.zeros_like(col)
            cols.append(col[:, None])
            names.append(name)
        else:
            cats = sorted(set(values))
            onehot = np.zeros((len(values), len(cats)))
            index = {c: i for i, c in enumerate(cats)}
            for r, v in enumerate(values):
                onehot[r, index[v]] = 1.0
            cols.append(onehot)
            names.extend(f"{name}={c}" for c in cats)
    if not cols:
        raise ParseError("no feature columns besides the label")
    X = np.hstack(cols)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = np.where(norms > 0, X / np.where(norms > 0, norms, 1.0), X)
    order = _rng(seed).permutation(X.shape[0])
    return ClassificationEnv(X, labels, max(len(class_names), 2), order, tuple(class_names), tuple(names))
