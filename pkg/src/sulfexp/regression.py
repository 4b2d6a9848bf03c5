"""Ordinary least squares and the per-group expansion models.

The three groups use fixed model forms over pooled (mixture, time) rows:

* ML: EXP       = a1*(WC*T) + a2*(C3A*T) + a3
* LL: EXP       = a1*(WC*T) + a3
* HN: ln(EXP)   = a1*(CC*T) + a2*T + a3

Coefficients are always stored with the constant term last. Regressor
columns are named by role strings ("WC*T", "T", "const", ...) so a fitted
model can be evaluated for any mixture without reference to how it was
trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .curves import ExpansionSeries
from .errors import (
    ConstantResponse,
    DimensionMismatch,
    RankDeficient,
    SingularMatrix,
    TooFewRows,
    ValidationError,
)
from .mixtures import GroupLabel, Mixture

# role -> (mixture field scaling T, or None when the term is T itself / constant)
_T_ROLES = {
    "WC*T": "wc",
    "C3A*T": "c3a",
    "C3S*T": "c3s",
    "C2S*T": "c2s",
    "C4AF*T": "c4af",
    "CC*T": "cement_content",
    "AIR*T": "air",
    "T": None,
}
CONST_ROLE = "const"

#: time-scaled role for each mixture field, for data-driven variable selection
FIELD_TO_ROLE = {f: role for role, f in _T_ROLES.items() if f is not None}

# canonical regressor roles per group, constant last
GROUP_ROLES: dict[GroupLabel, tuple[str, ...]] = {
    GroupLabel.ML: ("WC*T", "C3A*T", CONST_ROLE),
    GroupLabel.LL: ("WC*T", CONST_ROLE),
    GroupLabel.HN: ("CC*T", "T", CONST_ROLE),
}
LOG_RESPONSE_GROUPS = frozenset({GroupLabel.HN})


def role_fields(roles: tuple[str, ...]) -> list[str]:
    """Mixture fields a set of regressor roles needs."""
    out = []
    for role in roles:
        if role == CONST_ROLE:
            continue
        if role not in _T_ROLES:
            raise ValidationError(f"unknown regressor role {role!r}")
        f = _T_ROLES[role]
        if f is not None:
            out.append(f)
    return out


def role_value(role: str, mixture: Mixture, t: float) -> float:
    if role == CONST_ROLE:
        return 1.0
    if role not in _T_ROLES:
        raise ValidationError(f"unknown regressor role {role!r}")
    f = _T_ROLES[role]
    if f is None:
        return t
    return mixture.require(f)[0] * t


@dataclass(frozen=True)
class OLSFit:
    """Least-squares estimate with the usual fit statistics.

    ``t_statistics`` are coefficient estimates divided by their standard
    errors; on an exact fit the residual variance is zero and they come
    out infinite.
    """

    coefficients: np.ndarray
    r_squared: float
    residual_std: float
    t_statistics: np.ndarray
    n_observations: int


def ols_fit(X: np.ndarray, y: np.ndarray) -> OLSFit:
    """Fit y = X b by least squares via the normal equations.

    R-squared is the explained-to-total variance ratio of the fitted
    values. A constant response is only fit when the residual is exactly
    zero (trivial perfect fit, R-squared 1); otherwise it raises
    :class:`ConstantResponse` because the ratio is undefined.
    """
    X = linalg.check_finite(X, "X")
    y = linalg.check_finite(y, "y").reshape(-1)
    if X.ndim != 2:
        raise ValidationError(f"X must be 2-D, got ndim={X.ndim}")
    n, p = X.shape
    if y.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows but y has {y.shape[0]} entries")
    if n <= p:
        raise TooFewRows(f"need more observations than coefficients ({n} rows, {p} columns)")

    gram = X.T @ X
    xty = X.T @ y
    try:
        beta = linalg.solve_symmetric(gram, xty)
    except SingularMatrix as exc:
        raise RankDeficient(f"regressor matrix is numerically rank deficient: {exc}") from exc

    fitted = X @ beta
    residuals = y - fitted
    rss = float(residuals @ residuals)
    y_bar = float(y.mean())
    tss = float(((y - y_bar) ** 2).sum())
    scale = max(1.0, float(y @ y))
    if tss <= 1e-14 * scale:
        if rss <= 1e-14 * scale:
            r_squared = 1.0
        else:
            raise ConstantResponse("response has zero variance but the fit is not exact")
    else:
        r_squared = float(((fitted - y_bar) ** 2).sum()) / tss

    sigma2 = rss / (n - p)
    # diagonal of (X^T X)^-1, one symmetric solve per column
    inv_diag = np.empty(p)
    for j in range(p):
        e = np.zeros(p)
        e[j] = 1.0
        inv_diag[j] = linalg.solve_symmetric(gram, e)[j]
    with np.errstate(divide="ignore", invalid="ignore"):
        se = np.sqrt(sigma2 * np.abs(inv_diag))
        t_stats = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.sign(beta) * np.inf)
        t_stats = np.where((se == 0) & (beta == 0), 0.0, t_stats)

    return OLSFit(
        coefficients=beta,
        r_squared=r_squared,
        residual_std=math.sqrt(sigma2),
        t_statistics=t_stats,
        n_observations=n,
    )


def predict(fit: OLSFit, X_new: np.ndarray) -> np.ndarray:
    """Evaluate a fit on new regressor rows."""
    X_new = linalg.check_finite(X_new, "X_new")
    if X_new.ndim != 2:
        raise ValidationError(f"X_new must be 2-D, got ndim={X_new.ndim}")
    if X_new.shape[1] != fit.coefficients.shape[0]:
        raise DimensionMismatch(
            f"fit has {fit.coefficients.shape[0]} coefficients but X_new has {X_new.shape[1]} columns"
        )
    return X_new @ fit.coefficients


@dataclass(frozen=True)
class GroupModel:
    """A fitted (or preset) expansion model for one group.

    ``form`` is "linear" (predicts expansion directly) or "log-linear"
    (the linear predictor models ln of expansion). ``variable_roles`` and
    ``coefficients`` are aligned, constant term last. ``dropped_rows``
    counts non-positive-expansion rows excluded before a log fit.
    """

    group: GroupLabel
    form: str
    variable_roles: tuple[str, ...]
    coefficients: np.ndarray
    fit: OLSFit | None = field(default=None, compare=False)
    dropped_rows: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.form not in ("linear", "log-linear"):
            raise ValidationError(f"unknown model form {self.form!r}")
        coeffs = np.asarray(self.coefficients, dtype=float)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "variable_roles", tuple(self.variable_roles))
        if coeffs.shape[0] != len(self.variable_roles):
            raise DimensionMismatch(
                f"{len(self.variable_roles)} roles but {coeffs.shape[0]} coefficients"
            )

    def __eq__(self, other):
        if not isinstance(other, GroupModel):
            return NotImplemented
        return (
            self.group is other.group
            and self.form == other.form
            and self.variable_roles == other.variable_roles
            and np.array_equal(self.coefficients, other.coefficients)
        )

    def required_fields(self) -> list[str]:
        return role_fields(self.variable_roles)

    def linear_predictor(self, mixture: Mixture, t: float) -> float:
        terms = [role_value(role, mixture, t) for role in self.variable_roles]
        return float(np.dot(self.coefficients, terms))

    def time_line(self, mixture: Mixture) -> tuple[float, float]:
        """Decompose the linear predictor as slope*t + intercept for one mixture.

        Every supported role is either proportional to t or constant, so
        the predictor is exactly affine in time.
        """
        slope = 0.0
        intercept = 0.0
        for role, c in zip(self.variable_roles, self.coefficients):
            if role == CONST_ROLE:
                intercept += c
            else:
                f = _T_ROLES[role]
                slope += c * (1.0 if f is None else mixture.require(f)[0])
        return slope, intercept


def design_rows(
    pairs: list[tuple[Mixture, ExpansionSeries]],
    roles: tuple[str, ...],
    log_response: bool,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Pool every (mixture, sample) into regressor rows and responses.

    For a log response, rows whose expansion is not strictly positive are
    dropped and counted; the logarithm is undefined there.
    """
    rows: list[list[float]] = []
    ys: list[float] = []
    dropped = 0
    for mixture, series in pairs:
        for t, exp_value in series.samples:
            if log_response:
                if exp_value <= 0:
                    dropped += 1
                    continue
                ys.append(math.log(exp_value))
            else:
                ys.append(exp_value)
            rows.append([role_value(role, mixture, t) for role in roles])
    if not rows:
        raise TooFewRows("no usable observations after filtering")
    return np.array(rows), np.array(ys), dropped


def fit_group_model(
    pairs: list[tuple[Mixture, ExpansionSeries]],
    group: GroupLabel,
    roles: tuple[str, ...] | None = None,
) -> GroupModel:
    """Fit one group's model on pooled rows from its member series.

    ``roles`` defaults to the group's canonical form; passing an explicit
    tuple (for data-driven variable selection) keeps the group's response
    transform but swaps the regressors.
    """
    if len(pairs) < 2:
        raise TooFewRows(f"group {group} needs >= 2 mixtures, got {len(pairs)}")
    roles = GROUP_ROLES[group] if roles is None else tuple(roles)
    log_response = group in LOG_RESPONSE_GROUPS
    X, y, dropped = design_rows(pairs, roles, log_response)
    fit = ols_fit(X, y)
    return GroupModel(
        group=group,
        form="log-linear" if log_response else "linear",
        variable_roles=roles,
        coefficients=fit.coefficients,
        fit=fit,
        dropped_rows=dropped,
    )
