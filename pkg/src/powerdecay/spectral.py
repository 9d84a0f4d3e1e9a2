"""Eigenstructure of a diagonalizable matrix with positive spectrum.

Convention: ``A = S^{-1} diag(Lambda) S``, so the rows of ``S`` are left
eigenvectors and the columns of ``S_inv`` are right eigenvectors.  The
projection onto the eigenspace of a distinct eigenvalue ``lam_j`` is
``R_j = S_inv[:, I_j] @ S[I_j, :]`` where ``I_j`` indexes the copies of
``lam_j`` in ``Lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DecompositionMismatchError,
    InvalidArgumentError,
    NotPositiveDefiniteError,
)

__all__ = [
    "SpectralMatrix",
    "jacobi_eigh",
    "decompose_symmetric",
    "from_given_transform",
    "projection",
    "complement_apply",
]

MAX_DIM = 64
MAX_SWEEPS = 50


def jacobi_eigh(A, tol: float = 1e-14, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(w, V)`` with ascending ``w`` and orthonormal columns ``V`` such
    that ``A V = V diag(w)``.  Sweeps stop once the off-diagonal Frobenius
    mass drops below ``tol * ||A||_F``.
    """
    a = np.array(A, dtype=float)
    n = a.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    t = apq / diff     # theta^2 would overflow
                else:
                    theta = diff / (2.0 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    # sign convention: largest-magnitude entry of each eigenvector is positive
    for k in range(n):
        i = int(np.argmax(np.abs(V[:, k])))
        if V[i, k] < 0:
            V[:, k] = -V[:, k]
    return w, V


@dataclass(frozen=True, eq=False)
class SpectralMatrix:
    A: np.ndarray
    eigenvalues: np.ndarray          # Lambda_1 <= ... <= Lambda_n
    distinct: np.ndarray             # lam_1 < ... < lam_d
    multiplicities: tuple
    S: np.ndarray
    S_inv: np.ndarray
    projections: tuple               # R_j aligned with ``distinct``
    symmetric: bool
    cluster_tol: float
    source: str = "transform"        # "symmetric" when built by decompose_symmetric

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return len(self.distinct)

    @property
    def A0(self) -> np.ndarray:
        return np.diag(self.eigenvalues)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.A, 2))

    @property
    def mu(self) -> float:
        """Smallest gap between distinct eigenvalues (inf when d = 1)."""
        return float(np.min(np.diff(self.distinct))) if self.d > 1 else np.inf

    def index_of(self, lam: float) -> int:
        k = int(np.argmin(np.abs(self.distinct - lam)))
        if abs(self.distinct[k] - lam) > max(self.cluster_tol, 1e-12 * self.norm):
            raise InvalidArgumentError(f"{lam!r} is not a distinct eigenvalue of A "
                                       f"(eigenvalues {self.distinct.tolist()})")
        return k

    def projection(self, lam: float) -> np.ndarray:
        return self.projections[self.index_of(lam)]

    def complement_apply(self, Lambda: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x - self.projection(Lambda) @ x

    def descriptor(self) -> dict:
        if self.source == "symmetric":
            return {"symmetric": [[repr(float(v)) for v in row] for row in self.A]}
        return {"matrix": [[repr(float(v)) for v in row] for row in self.A],
                "transform_S": [[repr(float(v)) for v in row] for row in self.S],
                "eigenvalues": [repr(float(v)) for v in self.eigenvalues]}


def _cluster(w: np.ndarray, cluster_tol: float):
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] < cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    distinct = np.array([float(np.mean(w[g])) for g in groups])
    return groups, distinct


def _build(A, w, S, S_inv, symmetric, cluster_tol, source="transform") -> SpectralMatrix:
    groups, distinct = _cluster(w, cluster_tol)
    projs = []
    for g in groups:
        R = S_inv[:, g] @ S[g, :]
        if symmetric:
            R = 0.5 * (R + R.T)
        R.setflags(write=False)
        projs.append(R)
    for arr in (A, w, S, S_inv, distinct):
        arr.setflags(write=False)
    return SpectralMatrix(A, w, distinct, tuple(len(g) for g in groups), S, S_inv,
                          tuple(projs), symmetric, cluster_tol, source)


def _square(A, name="A") -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] > MAX_DIM:
        raise InvalidArgumentError(f"n = {A.shape[0]} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return A


def decompose_symmetric(A, tol: float = 1e-12, cluster_tol: float | None = None) -> SpectralMatrix:
    """Jacobi decomposition of a symmetric positive definite ``A``."""
    A = _square(A)
    scale = max(float(np.linalg.norm(A, 2)), np.finfo(float).tiny)
    if np.linalg.norm(A - A.T) > tol * max(1.0, scale):
        raise InvalidArgumentError("A is not symmetric within tolerance")
    A = 0.5 * (A + A.T)
    w, V = jacobi_eigh(A)
    if w[0] <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue {w[0]!r} is not positive")
    if cluster_tol is None:
        cluster_tol = 1e-8 * scale
    return _build(A, w, V.T.copy(), V.copy(), True, cluster_tol, source="symmetric")


def from_given_transform(A, S, eigenvalues, tol: float = 1e-10,
                         cluster_tol: float | None = None) -> SpectralMatrix:
    """Validate a user-supplied diagonalization ``A = S^{-1} diag(eigenvalues) S``.

    Eigenvalues may be listed in any order as long as row ``i`` of ``S`` is a
    left eigenvector for ``eigenvalues[i]``; rows are re-sorted ascending.
    """
    A = _square(A)
    S = _square(S, "S")
    lam = np.array(eigenvalues, dtype=float).ravel()
    n = A.shape[0]
    if S.shape != A.shape or lam.shape != (n,):
        raise InvalidArgumentError("A, S and eigenvalues have inconsistent sizes")
    if np.linalg.cond(S) > 1e12:
        raise InvalidArgumentError("S is singular or numerically singular")
    if np.any(lam <= 0):
        raise NotPositiveDefiniteError(f"eigenvalues must be positive, got {lam.tolist()}")
    S_inv = np.linalg.inv(S)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    residual = float(np.linalg.norm(S @ A @ S_inv - np.diag(lam), 2))
    if residual > tol * scale:
        raise DecompositionMismatchError(
            f"||S A S^-1 - diag(eigenvalues)|| = {residual:.3e} exceeds {tol * scale:.3e}",
            residual=residual)
    order = np.argsort(lam, kind="stable")
    lam, S, S_inv = lam[order], S[order, :].copy(), S_inv[:, order].copy()
    if cluster_tol is None:
        cluster_tol = 1e-8 * float(np.linalg.norm(A, 2))
    symmetric = bool(np.linalg.norm(A - A.T) <= 1e-12 * scale
                     and np.linalg.norm(S_inv - S.T) <= 1e-10)
    return _build(A, lam, S, S_inv, symmetric, cluster_tol)


def projection(M: SpectralMatrix, lambda_j: float) -> np.ndarray:
    return M.projection(lambda_j)


def complement_apply(M: SpectralMatrix, Lambda: float, x) -> np.ndarray:
    """``(I - R_Lambda) x``."""
    return M.complement_apply(Lambda, x)
