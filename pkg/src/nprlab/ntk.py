"""Neural tangent kernel diagnostics for the symmetric ReLU network.

Covers the layer recursion for the NTK matrix, effective dimension, the
Gram-to-NTK discrepancy at finite width, the elliptical-potential bound and
the anti-concentration noise scale used by the regret analysis.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateWarmup, NonUnitContext, PotentialBoundViolation
from .linalg import chol_logdet, extreme_eigenvalues
from .neural import NetworkShape, gradient_batch, init_symmetric

DEFAULT_WIDTHS = (16, 64, 256, 1024)


def relu_expectations(rho):
    """``(E[relu(u) relu(v)], E[relu'(u) relu'(v)])`` for unit-variance ``(u, v)`` with correlation ``rho``.

    Arc-cosine closed forms; ``rho`` is clamped to ``[-1, 1]``.
    """
    rho = np.clip(np.asarray(rho, dtype=np.float64), -1.0, 1.0)
    alpha = np.arccos(rho)
    e_phi = (np.sin(alpha) + (np.pi - alpha) * np.cos(alpha)) / (2.0 * np.pi)
    e_dphi = (np.pi - alpha) / (2.0 * np.pi)
    return e_phi, e_dphi


def _recursion(X: np.ndarray, L: int):
    sigma = X @ X.T
    sigma = 0.5 * (sigma + sigma.T)
    h_tilde = sigma.copy()
    for _ in range(L - 1):
        diag = np.sqrt(np.clip(np.diag(sigma), 0.0, None))
        scale = np.outer(diag, diag)
        with np.errstate(invalid="ignore", divide="ignore"):
            rho = np.where(scale > 0, sigma / scale, 0.0)
        e_phi, e_dphi = relu_expectations(rho)
        sigma = 2.0 * scale * e_phi
        h_tilde = 2.0 * h_tilde * e_dphi + sigma
    return h_tilde, sigma


def _check_unit(X: np.ndarray) -> None:
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-8)
    if bad.size:
        raise NonUnitContext(f"context {bad[0]} has norm {norms[bad[0]]:.12g}; expected 1")


def ntk_matrix(contexts, L: int) -> np.ndarray:
    """NTK matrix ``H = (H_tilde^(L) + Sigma^(L)) / 2`` on a set of unit contexts."""
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    if L < 2:
        raise ValueError("L must be >= 2")
    _check_unit(X)
    h_tilde, sigma = _recursion(X, L)
    H = 0.5 * (h_tilde + sigma)
    return 0.5 * (H + H.T)


def gradient_kernel(contexts, L: int) -> np.ndarray:
    """``H_tilde^(L)``: the infinite-width limit of the initial-gradient Gram ``G^T G``.

    Differs from :func:`ntk_matrix` by ``(H_tilde - Sigma) / 2``.
    """
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    _check_unit(X)
    h_tilde, _ = _recursion(X, L)
    return 0.5 * (h_tilde + h_tilde.T)


def effective_dimension(H, T: int, lam: float, K: int | None = None) -> float:
    """``logdet(I + T H / lam) / log(1 + T K / lam)``."""
    H = np.asarray(H, dtype=np.float64)
    K = H.shape[0] if K is None else K
    if T < 1 or lam <= 0:
        raise ValueError("need T >= 1 and lam > 0")
    _, logdet = chol_logdet(np.eye(H.shape[0]) + (T / lam) * H)
    return logdet / np.log1p(T * K / lam)


def gram_matrix(contexts, params) -> np.ndarray:
    """``G^T G`` with columns ``g(x_i; theta) / sqrt(m)``."""
    G = gradient_batch(params, contexts) / np.sqrt(params.shape.m)
    return G @ G.T


def gram_discrepancy(contexts, L: int, seeds, widths=DEFAULT_WIDTHS, H=None) -> list[dict]:
    """Frobenius distance between the initial-gradient Gram and ``H`` per width.

    Each seed is an int or a ``numpy.random.Generator``; ints are turned into
    fresh generators so the report is reproducible.
    """
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    if H is None:
        H = ntk_matrix(X, L)
    limit = gradient_kernel(X, L)
    report = []
    for m in widths:
        shape = NetworkShape(X.shape[1], m, L)
        vals, to_limit = [], []
        for s in seeds:
            rng = s if isinstance(s, np.random.Generator) else np.random.default_rng(s)
            gram = gram_matrix(X, init_symmetric(shape, rng))
            vals.append(float(np.linalg.norm(gram - H)))
            to_limit.append(float(np.linalg.norm(gram - limit)))
        report.append({
            "m": m,
            "mean": float(np.mean(vals)),
            "std": float(np.std(vals)),
            "values": vals,
            "mean_vs_gradient_kernel": float(np.mean(to_limit)),
        })
    return report


def elliptical_potential_check(Z, lam: float, H=None, K: int | None = None, tol: float = 1e-9):
    """Elliptical potential ``sum_t min(||z_t||^2_{A_{t-1}^{-1}}, 1)`` against its bounds.

    Returns ``(lhs, rhs_logdet, rhs_effdim)``. ``rhs_logdet = 2 log(det A_T / det(lam I))``
    always dominates ``lhs``; a violation raises :class:`PotentialBoundViolation`.
    ``rhs_effdim`` needs the NTK matrix ``H`` and is ``None`` without it; it is
    reported, never asserted.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    T, p = Z.shape
    Ainv = np.eye(p) / lam
    A = lam * np.eye(p)
    lhs = 0.0
    for z in Z:
        u = Ainv @ z
        q = max(float(z @ u), 0.0)
        lhs += min(q, 1.0)
        Ainv -= np.outer(u, u) / (1.0 + q)
        A += np.outer(z, z)
    _, logdet = chol_logdet(A)
    rhs_logdet = 2.0 * (logdet - p * np.log(lam))
    if lhs > rhs_logdet + tol:
        raise PotentialBoundViolation(f"potential {lhs!r} exceeds 2*logdet ratio {rhs_logdet!r}")
    rhs_effdim = None
    if H is not None:
        K = np.asarray(H).shape[0] if K is None else K
        d_eff = effective_dimension(H, T, lam, K)
        rhs_effdim = 2.0 * (d_eff * np.log1p(T * K / lam) + 1.0)
    return lhs, rhs_logdet, rhs_effdim


def confidence_radius(logdet_ratio: float, R: float, delta: float, lam: float, S: float) -> float:
    """``alpha_t = sqrt(R^2 log(det A_t / (delta^2 det(lam I)))) + sqrt(lam) S``."""
    arg = logdet_ratio - 2.0 * np.log(delta)
    return float(np.sqrt(R * R * max(arg, 0.0)) + np.sqrt(lam) * S)


def theory_sigma(alpha_t: float, lam: float, gram_eigmin: float) -> float:
    """Anti-concentration scale ``alpha_t (1 - lam / lambda_K(A_K))^{-1/2}``.

    ``lambda_K(A_K)`` is taken as ``lam + gram_eigmin``: the K-th largest
    eigenvalue of ``lam I + Z Z^T`` when Z has K columns and at least K rows.
    """
    if not gram_eigmin > 1e-10:
        raise DegenerateWarmup(
            f"warm-up Gram min eigenvalue {gram_eigmin:.3e} <= 1e-10; warm-up contexts do not span K directions"
        )
    if np.isinf(gram_eigmin):
        return float(alpha_t)
    lam_k = lam + gram_eigmin
    return float(alpha_t / np.sqrt(1.0 - lam / lam_k))


@dataclass
class NtkReport:
    H: np.ndarray
    lambda0: float
    eff_dim: float
    gram_discrepancy: list = field(default_factory=list)
    theory_sigma: float | None = None
    lambda_max: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["H"] = np.asarray(self.H).tolist()
        return out


def ntk_report(contexts, L: int = 2, T: int = 1000, lam: float = 1.0, widths=DEFAULT_WIDTHS,
               seeds=range(10), R: float = 0.1, delta: float = 0.05, S: float = 1.0,
               sigma_width: int | None = None, sigma_seed: int = 0) -> NtkReport:
    """All diagnostics for one context set.

    The contexts are normalized to unit length; the Gram and noise-scale
    diagnostics run on their symmetrized copies, which leaves ``H`` unchanged
    because inner products are preserved.
    """
    from .environments import symmetrize

    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    X = X / np.linalg.norm(X, axis=1, keepdims=True)
    H = ntk_matrix(X, L)
    lo, hi = extreme_eigenvalues(H)
    K = H.shape[0]
    report = NtkReport(H=H, lambda0=lo, eff_dim=effective_dimension(H, T, lam, K), lambda_max=hi)
    Xs = np.stack([symmetrize(x) for x in X])
    report.gram_discrepancy = gram_discrepancy(Xs, L, list(seeds), widths, H=H)
    m = sigma_width or max(widths)
    gram = gram_matrix(Xs, init_symmetric(NetworkShape(Xs.shape[1], m, L), np.random.default_rng(sigma_seed)))
    _, logdet_ratio = chol_logdet(np.eye(K) + gram / lam)
    alpha = confidence_radius(logdet_ratio, R, delta, lam, S)
    try:
        report.theory_sigma = theory_sigma(alpha, lam, extreme_eigenvalues(gram)[0])
    except DegenerateWarmup as exc:
        report.notes.append(str(exc))
    return report
