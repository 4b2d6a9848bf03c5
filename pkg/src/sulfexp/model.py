"""The deployable expansion model: classify, predict, refit, validate.

A :class:`ModelBundle` packages one regression model per expansion-pattern
group with the two mixture-space boundaries that route a mixture to its
group: the first separates HN from the rest in the (C3A, W/C) plane, the
second separates ML from LL in the (C3S, W/C) plane. The package ships a
default bundle carrying the reference coefficients, and
:func:`fit_pipeline` rebuilds everything from raw expansion records.
"""

from __future__ import annotations

import contextlib
import hashlib
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import clustering, curves, pca, regression, svm
from .curves import DEFAULT_ALPHA, DEFAULT_THRESHOLD, ExpansionSeries
from .errors import (
    AlreadyFailed,
    EmptyGroup,
    MissingField,
    NegativeTime,
    NonIncreasing,
    SulfexpError,
    ValidationError,
)
from .mixtures import MIXTURE_FIELDS, GroupLabel, Mixture
from .regression import GroupModel
from .svm import LinearBoundary

DEFAULT_SEED = 42
PROVENANCE_DEFAULT = "default"
PROVENANCE_FITTED = "fitted"

#: order in which ascending mean failure time maps onto group labels
LABELS_BY_FAILURE_TIME = (GroupLabel.HN, GroupLabel.ML, GroupLabel.LL)


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs for :func:`fit_pipeline`; defaults match the shipped model."""

    alpha: float = DEFAULT_ALPHA
    k: int = 3
    box_constraint: float = 100.0
    seed: int = DEFAULT_SEED
    threshold: float = DEFAULT_THRESHOLD
    restarts: int = clustering.DEFAULT_RESTARTS
    max_iter: int = clustering.DEFAULT_MAX_ITER
    standardize_features: bool = True
    smooth_for_clustering: bool = True
    pca_components: int = pca.DEFAULT_COMPONENTS
    pca_standardize: bool = True
    data_driven_variables: bool = False
    first_axes: tuple[str, str] = ("c3a", "wc")
    second_axes: tuple[str, str] = ("c3s", "wc")


@dataclass(frozen=True)
class PipelineDiagnostics:
    """Fit-time byproducts that are useful for reports but not for prediction."""

    assignments: dict[str, GroupLabel]
    cluster_sizes: dict[GroupLabel, int]
    feature_means: np.ndarray | None
    feature_scales: np.ndarray | None
    mean_failure_times: dict[GroupLabel, float]
    pca_selected: dict[GroupLabel, list[pca.SelectedVariable]]
    kmeans_objective: float


@dataclass(frozen=True)
class ModelBundle:
    """Three group models plus the classification boundaries.

    ``boundary_first``/``boundary_second`` may be None for partial bundles
    (degenerate single-group fits). Diagnostics never participate in
    equality or serialization.
    """

    models: dict[GroupLabel, GroupModel]
    boundary_first: LinearBoundary | None
    boundary_first_simplified: LinearBoundary | None
    boundary_second: LinearBoundary | None
    provenance: str
    failure_threshold: float = DEFAULT_THRESHOLD
    partial: bool = False
    schema_version: str = "1"
    diagnostics: PipelineDiagnostics | None = field(default=None, compare=False, repr=False)

    def model_for(self, group: GroupLabel) -> GroupModel:
        if group not in self.models:
            raise ValidationError(f"bundle has no model for group {group}")
        return self.models[group]

    def __eq__(self, other):
        if not isinstance(other, ModelBundle):
            return NotImplemented
        return (
            self.models == other.models
            and self.boundary_first == other.boundary_first
            and self.boundary_first_simplified == other.boundary_first_simplified
            and self.boundary_second == other.boundary_second
            and self.provenance == other.provenance
            and self.failure_threshold == other.failure_threshold
            and self.partial == other.partial
            and self.schema_version == other.schema_version
        )


def default_bundle() -> ModelBundle:
    """The shipped model with the reference coefficients.

    Group models: LL expansion 0.0157*(WC*T) + 0.0305, ML expansion
    0.0293*(WC*T) + 0.000975*(C3A*T) + 0.0216, HN ln(expansion)
    11.20*(CC*T) - 5.68*T - 3.66. First boundary C3A + 1.241*WC - 8.697
    (simplified: C3A = 8.00), second boundary C3S + 387.3*WC - 233.6.
    """
    models = {
        GroupLabel.LL: GroupModel(
            group=GroupLabel.LL,
            form="linear",
            variable_roles=("WC*T", "const"),
            coefficients=np.array([0.0157, 0.0305]),
        ),
        GroupLabel.ML: GroupModel(
            group=GroupLabel.ML,
            form="linear",
            variable_roles=("WC*T", "C3A*T", "const"),
            coefficients=np.array([0.0293, 0.000975, 0.0216]),
        ),
        GroupLabel.HN: GroupModel(
            group=GroupLabel.HN,
            form="log-linear",
            variable_roles=("CC*T", "T", "const"),
            coefficients=np.array([11.20, -5.68, -3.66]),
        ),
    }
    return ModelBundle(
        models=models,
        boundary_first=LinearBoundary(
            feature_names=("c3a", "wc"), weights=np.array([1.0, 1.241]), bias=-8.697,
            box_constraint=100.0,
        ),
        boundary_first_simplified=LinearBoundary(
            feature_names=("c3a", "wc"), weights=np.array([1.0, 0.0]), bias=-8.00,
            box_constraint=100.0,
        ),
        boundary_second=LinearBoundary(
            feature_names=("c3s", "wc"), weights=np.array([1.0, 387.3]), bias=-233.6,
            box_constraint=100.0,
        ),
        provenance=PROVENANCE_DEFAULT,
    )


def _boundary_point(mix: Mixture, boundary: LinearBoundary) -> np.ndarray:
    return np.array(mix.require(*boundary.feature_names))


def classify_mixture(
    mix: Mixture,
    bundle: ModelBundle | None = None,
    use_simplified_first: bool = True,
) -> GroupLabel:
    """Route a mixture to its expansion-pattern group from its proportions.

    With the simplified first boundary the HN rule is the strict threshold
    (c3a > 8 for the shipped bundle); with the raw boundary a decision
    value of exactly zero counts as HN. Non-HN mixtures go to ML when the
    second boundary's decision value is >= 0, else LL.
    """
    bundle = bundle or default_bundle()
    if bundle.boundary_second is None or (
        bundle.boundary_first is None and bundle.boundary_first_simplified is None
    ):
        raise ValidationError("bundle has no classification boundaries (partial bundle)")

    if use_simplified_first and bundle.boundary_first_simplified is not None:
        simplified = bundle.boundary_first_simplified
        axis = int(np.argmax(np.abs(simplified.weights)))
        value = mix.require(simplified.feature_names[axis])[0]
        threshold = -simplified.bias / simplified.weights[axis]
        is_hn = (value > threshold) if simplified.weights[axis] > 0 else (value < threshold)
    else:
        is_hn = svm.classify(bundle.boundary_first, _boundary_point(mix, bundle.boundary_first)) > 0
    if is_hn:
        return GroupLabel.HN
    second = svm.classify(bundle.boundary_second, _boundary_point(mix, bundle.boundary_second))
    return GroupLabel.ML if second > 0 else GroupLabel.LL


def predict_expansion(
    mix: Mixture,
    group: GroupLabel,
    bundle: ModelBundle | None = None,
    t: float = 0.0,
) -> float:
    """Expansion percent of a mixture at time t under its group's model."""
    if t < 0:
        raise NegativeTime(f"time must be >= 0, got {t}")
    bundle = bundle or default_bundle()
    model = bundle.model_for(group)
    value = model.linear_predictor(mix, t)
    return math.exp(value) if model.form == "log-linear" else value


def predict_curve(
    mix: Mixture,
    bundle: ModelBundle | None = None,
    horizon: float = 40.0,
    step: float = 1.0,
    use_simplified_first: bool = True,
) -> ExpansionSeries:
    """Classify, then sample the predicted curve on the grid 0, step, ... <= horizon."""
    if horizon <= 0 or step <= 0:
        raise ValidationError("horizon and step must both be positive")
    bundle = bundle or default_bundle()
    group = classify_mixture(mix, bundle, use_simplified_first)
    step = min(step, horizon)
    n_steps = int(math.floor(horizon / step + 1e-9))
    times = [i * step for i in range(n_steps + 1)]
    samples = tuple((t, predict_expansion(mix, group, bundle, t)) for t in times)
    return ExpansionSeries(mixture_id=mix.id, samples=samples, group=group.value)


def predicted_failure_time(
    mix: Mixture,
    bundle: ModelBundle | None = None,
    group: GroupLabel | None = None,
    use_simplified_first: bool = True,
) -> float:
    """Invert the group model at the failure threshold.

    The linear predictor of every supported model is affine in time, so
    the crossing solves in closed form (through a logarithm for HN).
    Raises :class:`NonIncreasing` when the mixture's time coefficient is
    not positive and :class:`AlreadyFailed` when the model starts at or
    above the threshold.
    """
    bundle = bundle or default_bundle()
    if group is None:
        group = classify_mixture(mix, bundle, use_simplified_first)
    model = bundle.model_for(group)
    slope, intercept = model.time_line(mix)
    target = bundle.failure_threshold
    if model.form == "log-linear":
        target = math.log(target)
    if intercept >= target:
        raise AlreadyFailed(
            f"mixture {mix.id!r} is predicted at or beyond the threshold already at t = 0"
        )
    if slope <= 0:
        raise NonIncreasing(
            f"mixture {mix.id!r}: group {group} model is not increasing in time (slope {slope:.4g})"
        )
    return (target - intercept) / slope


def _label_clusters(result: clustering.KMeansResult, features: np.ndarray) -> dict[int, GroupLabel]:
    """Name clusters by ascending mean failure time: earliest HN, latest LL."""
    k = result.centroids.shape[0]
    mean_tfail = []
    for c in range(k):
        members = features[result.assignments == c]
        mean_tfail.append(members[:, 0].mean() if members.size else np.inf)
    order = np.argsort(mean_tfail, kind="stable")
    labels = {}
    for rank, cluster in enumerate(order):
        labels[int(cluster)] = LABELS_BY_FAILURE_TIME[rank]
    return labels


@contextlib.contextmanager
def _stage(name: str):
    """Prefix any package error with the pipeline stage it came from."""
    try:
        yield
    except SulfexpError as exc:
        exc.args = (f"{name}: {exc.args[0]}",) + exc.args[1:]
        raise


def dataset_hash(dataset: list[tuple[Mixture, ExpansionSeries]]) -> str:
    """Stable fingerprint of a dataset, for bundle provenance."""
    h = hashlib.sha256()
    for mix, series in sorted(dataset, key=lambda p: p[0].id):
        h.update(mix.id.encode())
        for name in MIXTURE_FIELDS:
            h.update(repr(getattr(mix, name)).encode())
        for t, e in series.samples:
            h.update(repr(t).encode())
            h.update(repr(e).encode())
    return h.hexdigest()[:16]


def fit_pipeline(
    dataset: list[tuple[Mixture, ExpansionSeries]],
    config: PipelineConfig | None = None,
) -> ModelBundle:
    """Re-fit the whole model from expansion records.

    Smooth each series, extract (failure time, slope) features, k-means
    them into expansion-pattern clusters, name the clusters by ascending
    mean failure time, screen variables per group, fit each group's
    regression and train the two boundaries. Regressions use the smoothed
    curves for the linear groups and the raw curves for HN, whose
    exponential shape a three-point average would distort.
    """
    config = config or PipelineConfig()
    if not 1 <= config.k <= len(LABELS_BY_FAILURE_TIME):
        raise ValidationError(f"k must be between 1 and {len(LABELS_BY_FAILURE_TIME)}")

    with _stage("smoothing"):
        smoothed = [(mix, curves.smooth(series, config.alpha)) for mix, series in dataset]

    with _stage("features"):
        feature_source = smoothed if config.smooth_for_clustering else dataset
        features = np.array([
            curves.cluster_features(series, config.threshold) for _, series in feature_source
        ])

    with _stage("clustering"):
        if config.standardize_features:
            scaled, f_means, f_scales = clustering.standardize_features(features)
        else:
            scaled, f_means, f_scales = features, None, None
        km = clustering.kmeans(
            scaled, k=config.k, seed=config.seed,
            max_iter=config.max_iter, restarts=config.restarts,
        )
        cluster_labels = _label_clusters(km, features)
        assignments = {
            mix.id: cluster_labels[int(c)]
            for (mix, _), c in zip(dataset, km.assignments)
        }

    groups: dict[GroupLabel, list[int]] = {
        cluster_labels[c]: [] for c in range(config.k)
    }
    for i, (mix, _) in enumerate(dataset):
        groups[assignments[mix.id]].append(i)
    for label, members in groups.items():
        if len(members) < 2:
            raise EmptyGroup(f"cluster {label} received {len(members)} mixture(s); need >= 2")

    pca_selected: dict[GroupLabel, list[pca.SelectedVariable]] = {}
    roles_by_group: dict[GroupLabel, tuple[str, ...] | None] = {}
    with _stage("variable selection"):
        for label, members in groups.items():
            try:
                matrix = np.array([dataset[i][0].feature_row() for i in members])
            except MissingField:
                pca_selected[label] = []
                roles_by_group[label] = None
                continue
            m = min(config.pca_components, matrix.shape[0] - 1, matrix.shape[1])
            if m < 1:
                pca_selected[label] = []
                roles_by_group[label] = None
                continue
            centered, means, scales = pca.center_and_scale(matrix, standardize=config.pca_standardize)
            result = pca.principal_components(centered, m, means=means, scales=scales,
                                              seed=config.seed)
            picks = pca.select_dominant_variables(result, m)
            pca_selected[label] = picks
            if config.data_driven_variables:
                seen: list[str] = []
                for p in picks:
                    role = regression.FIELD_TO_ROLE[MIXTURE_FIELDS[p.column]]
                    if role not in seen:
                        seen.append(role)
                roles_by_group[label] = tuple(seen) + (regression.CONST_ROLE,)
            else:
                roles_by_group[label] = None

    models: dict[GroupLabel, GroupModel] = {}
    with _stage("regression"):
        for label, members in groups.items():
            source = dataset if label in regression.LOG_RESPONSE_GROUPS else smoothed
            pairs = [source[i] for i in members]
            models[label] = regression.fit_group_model(pairs, label, roles_by_group[label])

    boundary_first = boundary_first_simplified = boundary_second = None
    partial = len(groups) < 3
    if not partial:
        with _stage("boundaries"):
            pts_first = np.array([dataset[i][0].require(*config.first_axes)
                                  for i in range(len(dataset))])
            y_first = np.array([
                1.0 if assignments[dataset[i][0].id] is GroupLabel.HN else -1.0
                for i in range(len(dataset))
            ])
            boundary_first = svm.svm_train(
                pts_first, y_first, C=config.box_constraint, seed=config.seed,
                feature_names=config.first_axes,
            )
            boundary_first_simplified = svm.simplify_axis_parallel(boundary_first, pts_first, y_first)

            rest = [i for i in range(len(dataset))
                    if assignments[dataset[i][0].id] is not GroupLabel.HN]
            pts_second = np.array([dataset[i][0].require(*config.second_axes) for i in rest])
            y_second = np.array([
                1.0 if assignments[dataset[i][0].id] is GroupLabel.ML else -1.0 for i in rest
            ])
            boundary_second = svm.svm_train(
                pts_second, y_second, C=config.box_constraint, seed=config.seed,
                feature_names=config.second_axes,
            )

    mean_tfail = {
        label: float(np.mean([features[i][0] for i in members]))
        for label, members in groups.items()
    }
    diagnostics = PipelineDiagnostics(
        assignments=assignments,
        cluster_sizes={label: len(members) for label, members in groups.items()},
        feature_means=f_means,
        feature_scales=f_scales,
        mean_failure_times=mean_tfail,
        pca_selected=pca_selected,
        kmeans_objective=km.objective,
    )
    return ModelBundle(
        models=models,
        boundary_first=boundary_first,
        boundary_first_simplified=boundary_first_simplified,
        boundary_second=boundary_second,
        provenance=f"{PROVENANCE_FITTED} data={dataset_hash(dataset)} seed={config.seed}",
        failure_threshold=config.threshold,
        partial=partial,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class HoldoutRow:
    mixture_id: str
    reference: GroupLabel
    predicted: GroupLabel

    @property
    def agree(self) -> bool:
        return self.reference is self.predicted


@dataclass(frozen=True)
class HoldoutReport:
    rows: tuple[HoldoutRow, ...]
    agreement: float
    confusion: dict[tuple[GroupLabel, GroupLabel], int]


def validate_holdout(
    bundle: ModelBundle,
    holdout: list[tuple[Mixture, ExpansionSeries]],
    reference_assignments: dict[str, GroupLabel],
    use_simplified_first: bool = True,
) -> HoldoutReport:
    """Compare boundary-based groups against expansion-based reference groups.

    ``reference_assignments`` maps mixture id to the group obtained from
    the specimen's measured expansion (clustering or ground truth).
    """
    if not holdout:
        raise ValidationError("holdout set is empty")
    rows = []
    confusion: dict[tuple[GroupLabel, GroupLabel], int] = {}
    for mix, _series in holdout:
        if mix.id not in reference_assignments:
            raise ValidationError(f"no reference assignment for mixture {mix.id!r}")
        reference = reference_assignments[mix.id]
        predicted = classify_mixture(mix, bundle, use_simplified_first)
        rows.append(HoldoutRow(mixture_id=mix.id, reference=reference, predicted=predicted))
        confusion[(reference, predicted)] = confusion.get((reference, predicted), 0) + 1
    agreement = sum(r.agree for r in rows) / len(rows)
    return HoldoutReport(rows=tuple(rows), agreement=agreement, confusion=confusion)


@dataclass(frozen=True)
class GroupRefit:
    group: GroupLabel
    r2_original: float
    r2_reassigned: float
    n_reassigned: int

    @property
    def delta(self) -> float:
        return self.r2_reassigned - self.r2_original


def refit_r2_report(
    bundle: ModelBundle,
    dataset: list[tuple[Mixture, ExpansionSeries]],
    config: PipelineConfig | None = None,
    use_simplified_first: bool = True,
) -> dict[GroupLabel, GroupRefit]:
    """Refit each group on boundary-assigned membership and report R2 deltas.

    Measures how much fit quality degrades when mixtures are routed by the
    boundaries instead of by their measured expansion patterns.
    """
    config = config or PipelineConfig()
    for label, model in bundle.models.items():
        if model.fit is None:
            raise ValidationError(
                f"bundle model for {label} has no fit statistics; refit needs a fitted bundle"
            )
    smoothed = [(mix, curves.smooth(series, config.alpha)) for mix, series in dataset]
    regrouped: dict[GroupLabel, list[int]] = {label: [] for label in bundle.models}
    for i, (mix, _) in enumerate(dataset):
        label = classify_mixture(mix, bundle, use_simplified_first)
        regrouped.setdefault(label, []).append(i)

    report = {}
    for label, members in regrouped.items():
        if len(members) < 2:
            raise EmptyGroup(f"boundary reassignment left group {label} with {len(members)} mixture(s)")
        source = dataset if label in regression.LOG_RESPONSE_GROUPS else smoothed
        pairs = [source[i] for i in members]
        refit = regression.fit_group_model(pairs, label, bundle.models[label].variable_roles)
        report[label] = GroupRefit(
            group=label,
            r2_original=bundle.models[label].fit.r_squared,
            r2_reassigned=refit.fit.r_squared,
            n_reassigned=len(members),
        )
    return report


def with_provenance(bundle: ModelBundle, provenance: str) -> ModelBundle:
    return replace(bundle, provenance=provenance)
