"""Dense symmetric linear algebra for covariance maintenance and diagnostics.

Everything here works in float64. Matrices are plain ``numpy.ndarray`` objects;
symmetry is a caller contract checked only where it is cheap.
"""

from __future__ import annotations

import numpy as np

from .errors import NegativeQuadraticForm, NoConvergence, NotPositiveDefinite

EIG_TOL = 1e-10
EIG_MAX_ITER = 10_000
REFACTOR_EVERY = 500


def as_sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    return M


def chol_logdet(M) -> tuple[np.ndarray, float]:
    """Cholesky factor and log-determinant of an SPD matrix.

    Returns
    -------
    factor : ndarray
        Lower-triangular ``L`` with ``L @ L.T == M``.
    logdet : float
        ``2 * sum(log(diag(L)))``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    M = as_sym(M)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"matrix of dim {M.shape[0]} is not positive definite") from exc
    diag = np.diag(L)
    if not np.all(diag > 0):
        raise NotPositiveDefinite("non-positive pivot in Cholesky factor")
    return L, float(2.0 * np.sum(np.log(diag)))


def chol_inverse(M) -> np.ndarray:
    """Inverse of an SPD matrix through its Cholesky factor, symmetrized."""
    L, _ = chol_logdet(M)
    Linv = np.linalg.solve(L, np.eye(L.shape[0]))
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T)


def sm_rank1_inverse_update(Ainv, v, scale: float = 1.0) -> np.ndarray:
    """Return ``(A + scale * v v^T)^{-1}`` given ``Ainv = A^{-1}`` (Sherman-Morrison).

    The input is not modified.
    """
    Ainv = np.asarray(Ainv, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64).ravel()
    u = Ainv @ v
    denom = 1.0 + scale * float(v @ u)
    out = Ainv - (scale / denom) * np.outer(u, u)
    return 0.5 * (out + out.T)


def mahalanobis(v, Ainv) -> float:
    """``sqrt(v^T Ainv v)``; tiny negative round-off is clamped to zero."""
    v = np.asarray(v, dtype=np.float64).ravel()
    Ainv = np.asarray(Ainv, dtype=np.float64)
    if Ainv.ndim == 1:
        q = float(v @ (Ainv * v))
    else:
        if Ainv.shape != (v.size, v.size):
            raise ValueError(f"dimension mismatch: v has {v.size}, Ainv is {Ainv.shape}")
        q = float(v @ Ainv @ v)
    if q < -1e-9:
        raise NegativeQuadraticForm(f"v^T Ainv v = {q:.3e} < 0; inverse is corrupted")
    return float(np.sqrt(max(q, 0.0)))


def _start_vector(n: int) -> np.ndarray:
    v = np.ones(n) + np.linspace(0.0, 1e-3, n)
    return v / np.linalg.norm(v)


def _rayleigh(M: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    w = M @ v
    mu = float(v @ w)
    return mu, float(np.linalg.norm(w - mu * v))


def _rough_extreme(M: np.ndarray, sign: float, bound: float, iters: int = 30) -> float:
    # a few power steps on the PSD matrix sign*(M - bound*I); the Rayleigh quotient is a one-sided estimate
    B = sign * (M - bound * np.eye(M.shape[0]))
    v = _start_vector(M.shape[0])
    for _ in range(iters):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return float(v @ M @ v)


def _inverse_iteration(M: np.ndarray, guess: float, sign: float, scale: float, tol: float, max_iter: int) -> float:
    """Eigenvalue of ``M`` at the lower (sign=+1) or upper (sign=-1) end of the spectrum.

    The shift is pushed past ``guess`` until ``sign*(M - s*I)`` is positive
    definite, then inverse iteration runs against that Cholesky factor.
    """
    n = M.shape[0]
    eye = np.eye(n)
    delta = 1e-8 * scale
    for _ in range(200):
        s = guess - sign * delta
        try:
            L = np.linalg.cholesky(sign * (M - s * eye))
            break
        except np.linalg.LinAlgError:
            delta *= 4.0
    else:  # pragma: no cover - Gershgorin guarantees success long before this
        raise NoConvergence("could not find a definite shift")
    Linv = np.linalg.solve(L, eye)
    v = _start_vector(n)
    prev = np.inf
    stalled = 0
    for _ in range(max_iter):
        w = Linv.T @ (Linv @ v)
        v = w / np.linalg.norm(w)
        mu, res = _rayleigh(M, v)
        if res <= tol * scale:
            return mu
        # clustered eigenvalues: the quotient settles long before the vector does
        stalled = stalled + 1 if abs(mu - prev) <= 4 * np.finfo(float).eps * scale else 0
        if stalled >= 20:
            return mu
        prev = mu
    raise NoConvergence(f"inverse iteration did not converge in {max_iter} iterations")


def extreme_eigenvalues(M, tol: float = EIG_TOL, max_iter: int = EIG_MAX_ITER) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix.

    A short power iteration on the Gershgorin-shifted matrix gives a rough
    estimate of each end; shifted inverse iteration then refines it. The
    stopping rule is the eigen-residual ``||Mv - mu v|| <= tol * max|M|``.
    """
    M = as_sym(M)
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0]), float(M[0, 0])
    radius = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    lo = float(np.min(np.diag(M) - radius))
    hi = float(np.max(np.diag(M) + radius))
    if hi - lo == 0.0:
        return lo, hi
    scale = float(np.max(np.abs(M)))
    bottom = _inverse_iteration(M, _rough_extreme(M, -1.0, hi), 1.0, scale, tol, max_iter)
    top = _inverse_iteration(M, _rough_extreme(M, 1.0, lo), -1.0, scale, tol, max_iter)
    return bottom, top


class InverseTracker:
    """Maintains ``A = lam*I + sum scale * v v^T`` together with its inverse.

    Inverse updates are rank-one (Sherman-Morrison); every ``refactor_every``
    updates the inverse is recomputed from ``A`` to bound drift.
    """

    def __init__(self, dim: int, lam: float, refactor_every: int = REFACTOR_EVERY):
        if lam <= 0:
            raise NotPositiveDefinite(f"lam must be > 0, got {lam}")
        self.dim = dim
        self.lam = float(lam)
        self.A = lam * np.eye(dim)
        self.Ainv = np.eye(dim) / lam
        self.refactor_every = refactor_every
        self.updates = 0

    def update(self, v, scale: float = 1.0) -> None:
        v = np.asarray(v, dtype=np.float64).ravel()
        self.A += scale * np.outer(v, v)
        self.updates += 1
        if self.refactor_every and self.updates % self.refactor_every == 0:
            self.Ainv = chol_inverse(self.A)
        else:
            # in-place variant of sm_rank1_inverse_update; avoids a p x p copy per round
            u = self.Ainv @ v
            self.Ainv -= (scale / (1.0 + scale * float(v @ u))) * np.outer(u, u)

    def norm(self, v) -> float:
        return mahalanobis(v, self.Ainv)
