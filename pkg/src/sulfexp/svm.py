"""Soft-margin linear classifier in the primal, for 2-D boundaries.

Minimizes 0.5*|beta|^2 + C * sum_i max(0, 1 - y_i*(x_i.beta + b)) over a
two-feature plane. Training runs a deterministic projected subgradient
warmup (keeping the objective-best iterate) and then refines it to machine
precision with exact line searches: the objective restricted to any ray is
piecewise quadratic, so each step minimizes it exactly, and the preferred
direction aims at the KKT solution of the margin set the iterate sits on.
Clean multipliers certify global optimality of this convex problem. The
dual formulation is never used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    NoConvergence,
    SingleClass,
    SingularMatrix,
    ValidationError,
)

DEFAULT_BOX_CONSTRAINT = 100.0


@dataclass(frozen=True)
class LinearBoundary:
    """An oriented line  weights . x + bias = 0  in a named 2-D plane.

    Points with positive decision value fall on the +1 side. ``slacks``
    and ``objective`` are carried along as training diagnostics and do not
    participate in equality.
    """

    feature_names: tuple[str, str]
    weights: np.ndarray
    bias: float
    box_constraint: float | None = None
    objective: float | None = field(default=None, compare=False)
    slacks: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.shape[0] != 2:
            raise DimensionMismatch(f"boundary weights must have 2 entries, got {w.shape[0]}")
        if w[0] == 0.0 and w[1] == 0.0:
            raise ValidationError("boundary weights must not both be zero")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "bias", float(self.bias))

    def __eq__(self, other):
        if not isinstance(other, LinearBoundary):
            return NotImplemented
        return (
            self.feature_names == other.feature_names
            and np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.box_constraint == other.box_constraint
        )

    @property
    def normalized(self) -> tuple[np.ndarray, float]:
        """(weights, bias) rescaled to a unit normal; the sign is unchanged."""
        norm = float(np.linalg.norm(self.weights))
        return self.weights / norm, self.bias / norm

    def decision_value(self, point) -> float:
        point = np.asarray(point, dtype=float).reshape(-1)
        if point.shape[0] != 2:
            raise DimensionMismatch("boundary expects 2-D points")
        return float(point @ self.weights + self.bias)

    def equation(self) -> str:
        a, b = self.feature_names
        return f"{self.weights[0]:+.6g}*{a} {self.weights[1]:+.6g}*{b} {self.bias:+.6g} = 0"


def classify(boundary: LinearBoundary, point) -> int:
    """Side of the boundary: +1 or -1. A decision value of exactly 0 maps to +1."""
    return 1 if boundary.decision_value(point) >= 0 else -1


def _primal_objective(X, y, C, beta, b):
    margins = y * (X @ beta + b)
    return 0.5 * float(beta @ beta) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def _subgradient(X, y, C, z):
    margins = y * (X @ z[:2] + z[2])
    viol = margins < 1.0
    g = np.empty(3)
    g[:2] = z[:2] - C * (y[viol, None] * X[viol]).sum(axis=0)
    g[2] = -C * float(y[viol].sum())
    return g


def _line_minimize(X, y, C, z, d):
    """Exactly minimize the objective along z + tau*d.

    The restriction is convex piecewise quadratic in tau with breakpoints
    where a point's margin crosses 1; scanning interval minimizers and
    breakpoints gives the exact step.
    """
    d_beta = d[:2]
    d_b = d[2]
    a = y * (X @ z[:2] + z[2])          # margins at tau = 0
    c = y * (X @ d_beta + d_b)          # margin slopes
    taus = [0.0]
    nz = np.abs(c) > 0
    taus.extend(((1.0 - a[nz]) / c[nz]).tolist())
    taus = sorted(set(taus))
    beta_dot_d = float(z[:2] @ d_beta)
    dd = float(d_beta @ d_beta)

    def objective_at(tau):
        zz = z + tau * d
        return _primal_objective(X, y, C, zz[:2], zz[2])

    # breakpoints cover every kink; interior quadratic vertices cover the rest
    candidates = list(taus)
    if dd > 0:
        bounds = [-np.inf] + taus + [np.inf]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            probe = (lo + hi) / 2.0 if np.isfinite(lo) and np.isfinite(hi) else (
                hi - 1.0 if np.isfinite(hi) else lo + 1.0
            )
            active = (a + probe * c) < 1.0
            q1 = beta_dot_d - C * float(c[active].sum())
            tau_star = -q1 / dd
            if lo - 1e-12 <= tau_star <= hi + 1e-12:
                candidates.append(tau_star)
    best_tau = min(candidates, key=objective_at)
    return best_tau, objective_at(best_tau)


_COORDINATE_DIRECTIONS = (
    np.array([1.0, 0.0, 0.0]),
    np.array([0.0, 1.0, 0.0]),
    np.array([0.0, 0.0, 1.0]),
)


def _kkt_solve(X, y, C, on_margin, violating):
    """Solve the equality-constrained problem for a margin-set guess.

    Points in ``violating`` contribute full weight C; points in
    ``on_margin`` sit exactly at unit margin with multipliers to be
    determined. Returns (beta, b, multipliers).
    """
    v_c = C * (y[violating, None] * X[violating]).sum(axis=0)
    rhs_balance = -C * float(y[violating].sum())
    idx = np.nonzero(on_margin)[0]
    e = idx.size
    if e == 0:
        raise SingularMatrix("empty margin set")
    Xe = X[idx]
    ye = y[idx]
    G = (ye[:, None] * Xe) @ (ye[:, None] * Xe).T
    M = np.zeros((e + 1, e + 1))
    M[:e, :e] = G
    M[:e, e] = ye
    M[e, :e] = ye
    rhs = np.empty(e + 1)
    rhs[:e] = 1.0 - ye * (Xe @ v_c)
    rhs[e] = rhs_balance
    sol = linalg.solve_symmetric(M, rhs)
    mu = sol[:e]
    b = float(sol[e])
    beta = v_c + ((mu * ye)[:, None] * Xe).sum(axis=0)
    return beta, b, mu, idx


def _kkt_point(X, y, C, on_margin, violating):
    """KKT solution of one partition as a (point, multipliers) pair."""
    beta_c, b_c, mu, idx = _kkt_solve(X, y, C, on_margin, violating)
    return np.array([beta_c[0], beta_c[1], b_c]), mu, idx


def _independent_margin_subset(X, y, on_margin, max_rank=3):
    """Greedy linearly independent subset of the margin constraints.

    Constraint rows are y_i * (x_i0, x_i1, 1); at most three can be
    independent, and feeding only those to the KKT solve gives a usable
    candidate when the full margin set is rank deficient.
    """
    chosen_rows: list[np.ndarray] = []
    subset = np.zeros_like(on_margin)
    for i in np.nonzero(on_margin)[0]:
        row = y[i] * np.array([X[i, 0], X[i, 1], 1.0])
        residual = row.copy()
        for q in chosen_rows:
            residual -= (q @ residual) * q
        norm = float(np.linalg.norm(residual))
        if norm > 1e-10 * (1.0 + float(np.linalg.norm(row))):
            chosen_rows.append(residual / norm)
            subset[i] = True
            if len(chosen_rows) == max_rank:
                break
    if not subset.any() or subset.sum() == on_margin.sum():
        return None
    return subset


def _polish(X, y, C, z, max_rounds=300):
    """Descending active-set refinement to the exact optimum.

    Each round identifies the margin set at the current point, targets the
    KKT solution of that partition and takes an exact line search toward
    it, so the objective strictly decreases. When the current point
    already solves its partition's system, a negative (or above-C)
    multiplier names the constraint to release, which is the classical
    escape from a non-optimal vertex; clean multipliers certify global
    optimality of this convex problem. Subgradient and coordinate
    directions back the KKT direction up, each under the same exact line
    search, so a failed round can never move uphill.
    """
    obj = _primal_objective(X, y, C, z[:2], z[2])
    kkt_tol = 1e-9 * (1.0 + C)

    def try_direction(d):
        nonlocal z, obj
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            return False
        tau, new_obj = _line_minimize(X, y, C, z, d / norm)
        if new_obj < obj - 1e-15 * (1.0 + abs(obj)):
            z = z + tau * (d / norm)
            obj = new_obj
            return True
        return False

    grad_scale = 1.0 + C * float(np.abs(X).sum() + len(y))
    for _ in range(max_rounds):
        margins = y * (X @ z[:2] + z[2])
        tol_id = 1e-7 * (1.0 + float(np.abs(margins).max(initial=0.0)))
        on_margin = np.abs(1.0 - margins) <= tol_id
        violating = margins < 1.0 - tol_id

        if not on_margin.any():
            # away from every kink the objective is smooth there; a vanishing
            # gradient certifies the optimum directly
            if float(np.linalg.norm(_subgradient(X, y, C, z))) <= 1e-10 * grad_scale:
                return z, True

        moved = False
        if on_margin.any():
            try:
                z_c, mu, idx = _kkt_point(X, y, C, on_margin, violating)
                moved = try_direction(z_c - z)
                if not moved:
                    # the current point is (numerically) this partition's own
                    # solution; the multipliers decide what happens next
                    low, high = float(mu.min()), float(mu.max())
                    if low >= -kkt_tol and high <= C + kkt_tol:
                        return z, True
                    # release the worst-priced margin constraint
                    released = on_margin.copy()
                    viol = violating.copy()
                    if -low >= high - C:
                        released[idx[int(np.argmin(mu))]] = False
                    else:
                        j = idx[int(np.argmax(mu))]
                        released[j] = False
                        viol[j] = True
                    if released.any():
                        try:
                            z_c2, _, _ = _kkt_point(X, y, C, released, viol)
                            moved = try_direction(z_c2 - z)
                        except SingularMatrix:
                            pass
            except SingularMatrix:
                # inconsistent margin set: a linearly independent subset
                # first (degenerate fences put many points on the margin at
                # once), then leaving single members out
                subset = _independent_margin_subset(X, y, on_margin)
                if subset is not None and subset.any():
                    try:
                        z_c, _, _ = _kkt_point(X, y, C, subset, violating)
                        moved = try_direction(z_c - z)
                    except SingularMatrix:
                        pass
                if not moved:
                    for i in np.nonzero(on_margin)[0]:
                        reduced = on_margin.copy()
                        reduced[i] = False
                        if not reduced.any():
                            continue
                        try:
                            z_c, _, _ = _kkt_point(X, y, C, reduced, violating)
                        except SingularMatrix:
                            continue
                        moved = try_direction(z_c - z)
                        if moved:
                            break
        if not moved:
            moved = try_direction(-_subgradient(X, y, C, z))
        if not moved:
            for d in _COORDINATE_DIRECTIONS:
                moved = try_direction(d)
                if moved:
                    break
        if not moved:
            return z, False
    return z, False


def _subgradient_phase(X, y, C, max_iter, stall_window=100, stall_rtol=1e-8):
    """Normalized projected subgradient descent; returns the best iterate.

    Steps are scaled by the subgradient norm (raw hinge subgradients grow
    with C and would overshoot any schedule). This phase only coarsely
    locates the optimum; the line-search refinement does the rest.
    """
    n = X.shape[0]
    z = np.zeros(3)
    radius = np.sqrt(2.0 * C * n)          # any optimum satisfies 0.5|beta|^2 <= P(0) = C*n
    b_cap = 1.0 + radius * float(np.abs(X).max(initial=0.0)) + 1.0
    scale = 1.0 + float(np.abs(X).max(initial=0.0))

    best = (_primal_objective(X, y, C, z[:2], z[2]), z.copy())
    window_best = np.inf
    since_improve = 0
    converged = False
    for t in range(1, max_iter + 1):
        g = _subgradient(X, y, C, z)
        norm_g = float(np.linalg.norm(g))
        if norm_g == 0.0:
            converged = True
            break
        z = z - (scale / np.sqrt(t)) * g / norm_g
        norm = np.linalg.norm(z[:2])
        if norm > radius:
            z[:2] *= radius / norm
        z[2] = float(np.clip(z[2], -b_cap, b_cap))
        obj = _primal_objective(X, y, C, z[:2], z[2])
        if obj < best[0]:
            best = (obj, z.copy())
        # stop once the best objective stops moving for a full window
        if obj < window_best * (1.0 - stall_rtol):
            window_best = obj
            since_improve = 0
        else:
            since_improve += 1
            if since_improve >= stall_window:
                converged = True
                break
    return best[1], converged


def svm_train(
    points,
    labels,
    C: float = DEFAULT_BOX_CONSTRAINT,
    seed: int = 0,
    feature_names: tuple[str, str] = ("x0", "x1"),
    max_iter: int = 100_000,
    subgradient_iter: int = 5_000,
) -> LinearBoundary:
    """Train the soft-margin boundary on labeled 2-D points.

    ``labels`` must contain both +1 and -1. The result carries the primal
    objective and per-point slack values. Raises :class:`NoConvergence`
    when neither the subgradient stall rule nor an exact polish certified
    the solution within the iteration budget.
    """
    X = linalg.check_finite(points, "points")
    if X.ndim != 2 or X.shape[1] != 2:
        raise DimensionMismatch("points must be an (n, 2) array")
    y = np.asarray(labels, dtype=float).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch("one label per point required")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise SingleClass("training data contains a single class")
    if not C > 0:
        raise ValidationError(f"box constraint must be positive, got {C}")
    del seed  # training is deterministic from a zero start; kept for interface stability

    z, stalled = _subgradient_phase(X, y, C, min(subgradient_iter, max_iter))
    z, clean = _polish(X, y, C, z)
    beta, b = z[:2], float(z[2])
    if not (clean or stalled):
        raise NoConvergence(
            "svm training certified no optimum",
            objective=_primal_objective(X, y, C, beta, b),
        )

    margins = y * (X @ beta + b)
    slacks = np.maximum(0.0, 1.0 - margins)
    return LinearBoundary(
        feature_names=feature_names,
        weights=beta,
        bias=b,
        box_constraint=C,
        objective=_primal_objective(X, y, C, beta, b),
        slacks=slacks,
    )


def simplify_axis_parallel(boundary: LinearBoundary, points, labels) -> LinearBoundary:
    """Replace a near-vertical boundary by a threshold on its dominant axis.

    The threshold minimizes training misclassifications under the rule
    "predict +1 beyond the threshold" (oriented by the sign of the dominant
    weight). Ties prefer the midpoint of the narrowest gap between
    opposing-class points, then the smallest threshold. A boundary that is
    already axis-parallel is returned unchanged.
    """
    X = linalg.check_finite(points, "points")
    if X.ndim != 2 or X.shape[1] != 2:
        raise DimensionMismatch("points must be an (n, 2) array")
    y = np.asarray(labels, dtype=float).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise DimensionMismatch("one label per point required")

    if boundary.weights[0] == 0.0 or boundary.weights[1] == 0.0:
        return boundary
    # dominant axis by decision influence: weight times the feature's spread
    spreads = X.std(axis=0)
    spreads = np.where(spreads > 0, spreads, 1.0)
    axis = int(np.argmax(np.abs(boundary.weights) * spreads))
    orient = 1.0 if boundary.weights[axis] > 0 else -1.0

    v = X[:, axis]
    u = np.unique(v)
    candidates = [float(u[0]) - 1.0]
    candidates += [float(u[i] + u[i + 1]) / 2.0 for i in range(u.size - 1)]
    candidates.append(float(u[-1]) + 1.0)

    def errors(theta: float) -> int:
        pred = np.where(orient * (v - theta) >= 0, 1.0, -1.0)
        return int((pred != y).sum())

    scored = []
    for j, theta in enumerate(candidates):
        err = errors(theta)
        interior = 0 < j < len(candidates) - 1
        if interior:
            left, right = u[j - 1], u[j]
            # a pair of opposite-class points faces each other across this gap
            opposing = len(set(y[v == left]) | set(y[v == right])) == 2
            gap = float(right - left)
        else:
            opposing = False
            gap = np.inf
        scored.append((err, 0 if opposing else 1, gap, theta))
    _, _, _, theta = min(scored)

    weights = np.zeros(2)
    weights[axis] = orient
    return LinearBoundary(
        feature_names=boundary.feature_names,
        weights=weights,
        bias=-orient * theta,
        box_constraint=boundary.box_constraint,
    )
