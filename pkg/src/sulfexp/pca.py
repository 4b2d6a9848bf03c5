"""Principal component analysis by sequential variance maximization.

Each loading vector maximizes the variance of the data projected onto it;
after a component is extracted its contribution is subtracted (deflation)
and the next loading is the dominant eigenvector of the deflated Gram
matrix. Also provides the dominant-variable selection rule used for
regression screening: from each retained component, take the variable with
the largest absolute loading entry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import TooFewRows, ValidationError

DEFAULT_COMPONENTS = 3


@dataclass(frozen=True)
class PCAResult:
    loadings: np.ndarray            # (m, p), unit rows, pairwise orthogonal
    explained_variance: np.ndarray  # (m,), non-increasing
    explained_ratio: np.ndarray     # (m,), sums to <= 1
    means: np.ndarray               # per-column means removed during centering
    scales: np.ndarray              # per-column std devs, 1.0 when not standardized

    @property
    def n_components(self) -> int:
        return self.loadings.shape[0]


@dataclass(frozen=True)
class SelectedVariable:
    """One screening pick: the dominant column of one component."""

    component: int
    column: int
    duplicate: bool = False   # column already picked by an earlier component
    tie: bool = False         # another column had exactly the same |loading|


def center_and_scale(X: np.ndarray, standardize: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remove column means; optionally scale columns to unit sample std.

    Constant columns cannot be standardized: their scale is forced to 1 and
    the centered column is left at zero.
    """
    X = linalg.check_finite(X, "X")
    if X.ndim != 2:
        raise ValidationError(f"X must be 2-D, got ndim={X.ndim}")
    if X.shape[0] < 2:
        raise TooFewRows(f"need >= 2 rows, got {X.shape[0]}")
    means = X.mean(axis=0)
    centered = X - means
    if standardize:
        scales = centered.std(axis=0, ddof=1)
        scales = np.where(scales > 0, scales, 1.0)
        centered = centered / scales
    else:
        scales = np.ones(X.shape[1])
    return centered, means, scales


def _orthonormal_complement(v: np.ndarray, basis: list[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    """Project v off the spanned basis; fall back to random directions if it vanishes."""
    for _ in range(50):
        w = v.copy()
        for u in basis:
            w -= (u @ w) * u
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            return w / norm
        v = rng.standard_normal(v.shape[0])
    raise ValidationError("no orthonormal complement found; too many components requested")


def principal_components(
    X: np.ndarray,
    m: int,
    means: np.ndarray | None = None,
    scales: np.ndarray | None = None,
    tol_scale: float = 1e-11,
    max_iter: int = 10_000,
    seed: int = 0,
) -> PCAResult:
    """First ``m`` principal components of a centered matrix ``X``.

    Component k is the dominant eigenvector of the deflated Gram matrix;
    deflation subtracts X w w^T after each extraction. ``means``/``scales``
    are carried through for bookkeeping when the caller centered the data
    with :func:`center_and_scale`.
    """
    X = linalg.check_finite(X, "X")
    n, p = X.shape
    if not 1 <= m <= min(n - 1, p):
        raise ValidationError(f"m must be in [1, min(rows-1, cols)] = [1, {min(n - 1, p)}], got {m}")
    col_means = X.mean(axis=0)
    if float(np.abs(col_means).max(initial=0.0)) > 1e-8 * (1.0 + float(np.abs(X).max(initial=0.0))):
        raise ValidationError("X must be centered (column means zero); use center_and_scale first")

    total_variance = float((X * X).sum()) / (n - 1)
    deflated = X.copy()
    rng = np.random.default_rng(seed)
    loadings: list[np.ndarray] = []
    variances: list[float] = []
    for k in range(m):
        gram = deflated.T @ deflated
        tol = tol_scale * max(1.0, float(np.abs(gram).max(initial=0.0)))
        lam, w = linalg.dominant_eigenpair(gram, tol=tol, max_iter=max_iter, seed=seed + k)
        if lam <= tol:
            # Deflated matrix is numerically zero in every remaining direction;
            # any unit vector orthogonal to earlier loadings is a valid loading.
            w = _orthonormal_complement(w, loadings, rng)
            idx = int(np.argmax(np.abs(w)))
            if w[idx] < 0:
                w = -w
        loadings.append(w)
        variances.append(float(np.linalg.norm(X @ w) ** 2) / (n - 1))
        deflated = deflated - np.outer(X @ w, w)

    explained_variance = np.array(variances)
    ratio = explained_variance / total_variance if total_variance > 0 else np.zeros(m)
    return PCAResult(
        loadings=np.array(loadings),
        explained_variance=explained_variance,
        explained_ratio=ratio,
        means=np.zeros(p) if means is None else np.asarray(means, dtype=float),
        scales=np.ones(p) if scales is None else np.asarray(scales, dtype=float),
    )


def select_dominant_variables(result: PCAResult, m: int = DEFAULT_COMPONENTS) -> list[SelectedVariable]:
    """Pick the largest-|loading| column from each of the first m components.

    Exact ties resolve to the smaller column index and are flagged; a
    column picked by more than one component is kept in order with its
    duplicate flag set.
    """
    if m > result.n_components:
        raise ValidationError(f"asked for {m} components but only {result.n_components} computed")
    picks: list[SelectedVariable] = []
    seen: set[int] = set()
    for comp in range(m):
        magnitudes = np.abs(result.loadings[comp])
        column = int(np.argmax(magnitudes))
        tie = bool(np.count_nonzero(magnitudes == magnitudes[column]) > 1)
        picks.append(SelectedVariable(
            component=comp,
            column=column,
            duplicate=column in seen,
            tie=tie,
        ))
        seen.add(column)
    return picks
