"""Minimal dense linear-algebra kernels.

Matrices and vectors are plain ``numpy.ndarray`` objects (row-major, all
entries finite). Two kernels back the statistical modules: a symmetric
linear solve used by the least-squares estimator, and dominant-eigenvector
extraction used by the sequential variance-maximization in the PCA module.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    AsymmetricMatrix,
    DimensionMismatch,
    NoConvergence,
    NonFiniteValue,
    SingularMatrix,
    ValidationError,
)

SYMMETRY_TOL = 1e-10
PIVOT_REL_TOL = 1e-12
RESIDUAL_REL_TOL = 1e-8


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    """Coerce to a float array and reject NaN/Inf entries."""
    out = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue(f"{name} contains NaN or Inf entries")
    return out


def _check_square_symmetric(A: np.ndarray, name: str = "A") -> np.ndarray:
    A = check_finite(A, name)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    scale = max(1.0, float(np.abs(A).max())) if A.size else 1.0
    if float(np.abs(A - A.T).max(initial=0.0)) > SYMMETRY_TOL * scale:
        raise AsymmetricMatrix(f"{name} is not symmetric within tolerance {SYMMETRY_TOL}")
    return A


def _gauss_solve(A: np.ndarray, b: np.ndarray, pivot_floor: float) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a copy of [A | b]."""
    n = A.shape[0]
    aug = np.hstack([A.astype(float), b.reshape(n, 1).astype(float)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[piv, col]) < pivot_floor:
            raise SingularMatrix(
                f"pivot magnitude {abs(aug[piv, col]):.3e} below threshold {pivot_floor:.3e}"
            )
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        factors = aug[col + 1:, col] / aug[col, col]
        aug[col + 1:, col:] -= np.outer(factors, aug[col, col:])
    x = np.empty(n)
    for row in range(n - 1, -1, -1):
        x[row] = (aug[row, -1] - aug[row, row + 1:n] @ x[row + 1:]) / aug[row, row]
    return x


def solve_symmetric(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for symmetric A.

    Uses Gaussian elimination with partial pivoting plus one round of
    iterative refinement. Raises :class:`SingularMatrix` when a pivot falls
    below ``1e-12 * max|A|`` or the refined residual still violates
    ``max|Ax - b| <= 1e-8 * (1 + max|b|)``.
    """
    A = _check_square_symmetric(A)
    b = check_finite(b, "b").reshape(-1)
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch(
            f"dimension mismatch: A is {A.shape[0]}x{A.shape[1]}, b has {b.shape[0]} entries"
        )
    if A.size == 0:
        return np.empty(0)
    scale = float(np.abs(A).max())
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    pivot_floor = PIVOT_REL_TOL * scale
    x = _gauss_solve(A, b, pivot_floor)
    # One refinement pass tightens the residual for mildly ill-conditioned systems.
    residual = b - A @ x
    x = x + _gauss_solve(A, residual, pivot_floor)
    bound = RESIDUAL_REL_TOL * (1.0 + float(np.abs(b).max(initial=0.0)))
    if float(np.abs(A @ x - b).max()) > bound:
        raise SingularMatrix("solution residual exceeds tolerance; matrix numerically singular")
    return x


def _sign_convention(v: np.ndarray) -> np.ndarray:
    """Flip sign so the entry of largest magnitude is positive."""
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v


def dominant_eigenpair(
    S: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and unit eigenvector of a symmetric PSD matrix.

    Power iteration from a seeded random start vector. When plain iteration
    stalls (near-degenerate leading eigenvalues) the working matrix is
    repeatedly squared, which amplifies the dominant direction without
    changing the eigenvectors; the returned eigenvalue is always the
    Rayleigh quotient with respect to the original ``S`` and the residual
    ``max|S v - lambda v| <= tol`` is checked against ``S`` itself.
    """
    S = _check_square_symmetric(S, "S")
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1")
    n = S.shape[0]
    if n == 0:
        raise DimensionMismatch("empty matrix has no eigenpairs")

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)

    work = S.copy()
    squarings = 0
    best_res = np.inf
    best: tuple[float, np.ndarray] | None = None
    check_every = 50

    for it in range(1, max_iter + 1):
        y = work @ v
        norm_y = np.linalg.norm(y)
        if norm_y == 0.0:
            # v lies in the null space of the working matrix; for PSD S this
            # means eigenvalue 0 with v itself as an eigenvector.
            lam = float(v @ (S @ v))
            v = _sign_convention(v)
            return 0.0 if abs(lam) <= tol else lam, v
        v = y / norm_y
        lam = float(v @ (S @ v))
        res = float(np.abs(S @ v - lam * v).max())
        if res <= tol:
            return lam, _sign_convention(v)
        if res < best_res:
            best_res, best = res, (lam, v.copy())
        if it % check_every == 0 and squarings < 60:
            # Slow contraction: square the (rescaled) working matrix so the
            # next matvecs act like 2^k plain power steps.
            m = float(np.abs(work).max())
            if m > 0:
                work = (work / m) @ (work / m)
                squarings += 1

    lam, v = best if best is not None else (float(v @ (S @ v)), v)
    raise NoConvergence(
        "power iteration did not reach tolerance",
        eigenvalue=lam,
        residual=best_res,
        iterations=max_iter,
        last_vector=_sign_convention(v),
    )
