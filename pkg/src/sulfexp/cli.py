"""Command-line front end.

Subcommands: classify, predict, fit, smooth, cluster. Exit codes: 0 on
success, 2 on input validation problems, 3 on numerical failures. The
default random seed can be overridden with the SULFEXP_SEED environment
variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import clustering, curves, dataio, model
from .errors import NumericalError, SulfexpError, ValidationError
from .mixtures import GroupLabel

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _default_seed() -> int:
    env = os.environ.get("SULFEXP_SEED")
    return int(env) if env else model.DEFAULT_SEED


def _load_bundle_or_default(path: str | None) -> model.ModelBundle:
    if path is None:
        return model.default_bundle()
    return dataio.load_bundle(path)


def _print_table(header: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header))
    print(fmt.format(*("-" * w for w in widths)))
    for row in rows:
        print(fmt.format(*row))


def _emit(args, payload: dict, header: list[str], rows: list[list[str]]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        _print_table(header, rows)


def cmd_classify(args) -> int:
    bundle = _load_bundle_or_default(args.bundle)
    mixtures = dataio.load_mixtures(args.mixtures)
    if not mixtures:
        raise ValidationError(f"no rows in {args.mixtures}")
    rows = []
    payload = []
    for mix in mixtures:
        group = model.classify_mixture(mix, bundle, use_simplified_first=not args.raw_first_boundary)
        first = bundle.boundary_first.decision_value(
            mix.require(*bundle.boundary_first.feature_names)
        ) if bundle.boundary_first else float("nan")
        second = bundle.boundary_second.decision_value(
            mix.require(*bundle.boundary_second.feature_names)
        ) if bundle.boundary_second else float("nan")
        rows.append([mix.id, group.value, f"{first:.6g}", f"{second:.6g}"])
        payload.append({"id": mix.id, "group": group.value,
                        "first_boundary_value": first, "second_boundary_value": second})
    _emit(args, {"classifications": payload},
          ["id", "group", "first_boundary", "second_boundary"], rows)
    return 0


def cmd_predict(args) -> int:
    if args.step <= 0 or args.horizon <= 0:
        raise ValidationError("horizon and step must both be positive")
    bundle = _load_bundle_or_default(args.bundle)
    mixtures = dataio.load_mixtures(args.mixtures)
    if not mixtures:
        raise ValidationError(f"no rows in {args.mixtures}")
    series_out = []
    rows = []
    payload = []
    for mix in mixtures:
        series = model.predict_curve(mix, bundle, horizon=args.horizon, step=args.step,
                                     use_simplified_first=not args.raw_first_boundary)
        series_out.append(series)
        try:
            t_fail = model.predicted_failure_time(mix, bundle,
                                                  use_simplified_first=not args.raw_first_boundary)
            t_fail_text = f"{t_fail:.4g}"
        except NumericalError as exc:
            t_fail = None
            t_fail_text = f"n/a ({type(exc).__name__})"
        final = series.samples[-1][1]
        rows.append([mix.id, series.group or "", f"{final:.6g}", t_fail_text])
        payload.append({"id": mix.id, "group": series.group,
                        "final_expansion": final, "predicted_failure_time": t_fail})
    if args.out:
        dataio.emit_plot_data(series_out, args.out)
    _emit(args, {"predictions": payload},
          ["id", "group", f"expansion@{args.horizon:g}y", "failure_time_years"], rows)
    return 0


def cmd_fit(args) -> int:
    manifest = dataio.load_manifest(args.manifest)
    dataset = dataio.load_dataset(manifest)
    config = model.PipelineConfig(
        alpha=args.alpha,
        k=args.k,
        box_constraint=args.box_constraint,
        seed=args.seed,
        threshold=args.threshold,
        standardize_features=not args.no_standardize,
        smooth_for_clustering=not args.cluster_raw,
        data_driven_variables=args.data_driven_variables,
    )
    bundle = model.fit_pipeline(dataset, config)
    dataio.save_bundle(bundle, args.out)

    diag = bundle.diagnostics
    payload = {"bundle": args.out, "provenance": bundle.provenance,
               "cluster_sizes": {g.value: n for g, n in diag.cluster_sizes.items()},
               "groups": {}}
    print(f"bundle written to {args.out}")
    print(f"provenance: {bundle.provenance}")
    print("cluster sizes: " + ", ".join(
        f"{g.value}={diag.cluster_sizes[g]}" for g in sorted(diag.cluster_sizes, key=lambda g: g.value)
    ))
    for label in (GroupLabel.LL, GroupLabel.ML, GroupLabel.HN):
        if label not in bundle.models:
            continue
        gm = bundle.models[label]
        fit = gm.fit
        print(f"\ngroup {label.value} ({gm.form}; response "
              f"{'ln(expansion)' if gm.form == 'log-linear' else 'expansion'}): "
              f"R^2 = {fit.r_squared:.4f}, residual std = {fit.residual_std:.4g}, "
              f"n = {fit.n_observations}")
        _print_table(
            ["variable", "coefficient", "t_statistic"],
            [[role, f"{coef:.6g}", f"{t:.3f}"] for role, coef, t in
             zip(gm.variable_roles, gm.coefficients, fit.t_statistics)],
        )
        payload["groups"][label.value] = {
            "form": gm.form,
            "variable_roles": list(gm.variable_roles),
            "coefficients": [float(c) for c in gm.coefficients],
            "r_squared": fit.r_squared,
            "residual_std": fit.residual_std,
            "t_statistics": [float(t) for t in fit.t_statistics],
            "n_observations": fit.n_observations,
        }
    if bundle.boundary_first is not None:
        print(f"\nfirst boundary (HN vs rest):  {bundle.boundary_first.equation()}")
        print(f"  simplified:                 {bundle.boundary_first_simplified.equation()}")
        print(f"second boundary (ML vs LL):   {bundle.boundary_second.equation()}")
        payload["first_boundary"] = bundle.boundary_first.equation()
        payload["second_boundary"] = bundle.boundary_second.equation()
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_smooth(args) -> int:
    series_list = dataio.load_series(args.series)
    if not series_list:
        raise ValidationError(f"no rows in {args.series}")
    out_series = []
    labels = []
    for series in series_list:
        smoothed = curves.smooth(series, args.alpha)
        out_series.extend([series, smoothed])
        labels.extend([f"{series.mixture_id}/original", f"{series.mixture_id}/smoothed"])
    dataio.emit_plot_data(out_series, args.out, labels=labels)
    print(f"wrote {len(series_list)} smoothed curve pair(s) to {args.out}")
    return 0


def cmd_cluster(args) -> int:
    series_list = dataio.load_series(args.series)
    if not series_list:
        raise ValidationError(f"no rows in {args.series}")
    features = []
    for series in series_list:
        smoothed = curves.smooth(series, args.alpha) if not args.cluster_raw else series
        features.append(curves.cluster_features(smoothed, args.threshold))
    feats = np.array(features)
    points = feats
    if not args.no_standardize:
        points, _, _ = clustering.standardize_features(feats)
    result = clustering.kmeans(points, k=args.k, seed=args.seed)
    rows = [
        [series.mixture_id, f"{f[0]:.4g}", f"{f[1]:.6g}", str(int(c))]
        for series, f, c in zip(series_list, feats, result.assignments)
    ]
    payload = [{"id": r[0], "t_fail": float(r[1]), "slope": float(r[2]), "cluster": int(r[3])}
               for r in rows]
    _emit(args, {"clusters": payload, "objective": result.objective},
          ["id", "t_fail_years", "slope_pct_per_year", "cluster"], rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sulfexp",
        description="Classify concrete mixtures by sulfate-attack expansion pattern, "
                    "predict long-term expansion, and refit the model from data.",
    )
    parser.add_argument("--format", choices=("table", "json"), default="table",
                        help="output format (default: table)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help="random seed (default: %(default)s; env SULFEXP_SEED overrides)")

    p = sub.add_parser("classify", help="assign mixtures to expansion-pattern groups")
    p.add_argument("mixtures", help="mixture table (csv)")
    p.add_argument("--bundle", help="model bundle file (default: built-in model)")
    p.add_argument("--raw-first-boundary", action="store_true",
                   help="use the oblique first boundary instead of the simplified threshold")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("predict", help="predict expansion curves and failure times")
    p.add_argument("mixtures", help="mixture table (csv)")
    p.add_argument("--bundle", help="model bundle file (default: built-in model)")
    p.add_argument("--horizon", type=float, default=40.0,
                   help="prediction horizon in years (default: %(default)s)")
    p.add_argument("--step", type=float, default=1.0,
                   help="time grid step in years (default: %(default)s)")
    p.add_argument("--out", help="write the predicted curves as plot data to this path")
    p.add_argument("--raw-first-boundary", action="store_true",
                   help="use the oblique first boundary instead of the simplified threshold")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("fit", help="refit the whole model from a dataset manifest")
    p.add_argument("manifest", help="dataset manifest (json with mixtures_path, series_path)")
    p.add_argument("--out", required=True, help="where to write the fitted bundle")
    p.add_argument("--alpha", type=float, default=curves.DEFAULT_ALPHA,
                   help="smoothing weight on the point itself, 0..1 (default: %(default)s)")
    p.add_argument("--k", type=int, default=3,
                   help="number of expansion-pattern clusters (default: %(default)s)")
    p.add_argument("--box-constraint", type=float, default=100.0,
                   help="penalty weight on boundary margin violations (default: %(default)s)")
    p.add_argument("--threshold", type=float, default=curves.DEFAULT_THRESHOLD,
                   help="failure threshold in expansion percent (default: %(default)s)")
    p.add_argument("--no-standardize", action="store_true",
                   help="cluster on raw (t_fail, slope) features without z-scoring")
    p.add_argument("--cluster-raw", action="store_true",
                   help="cluster on raw curves instead of smoothed ones")
    p.add_argument("--data-driven-variables", action="store_true",
                   help="build regressors from the per-group variable screening "
                        "instead of the canonical model forms")
    add_seed(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("smooth", help="smooth expansion records (diagnostic)")
    p.add_argument("series", help="expansion record table (csv)")
    p.add_argument("--alpha", type=float, default=curves.DEFAULT_ALPHA,
                   help="smoothing weight on the point itself, 0..1 (default: %(default)s)")
    p.add_argument("--out", required=True, help="plot-data output path")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("cluster", help="cluster series by failure-point features (diagnostic)")
    p.add_argument("series", help="expansion record table (csv)")
    p.add_argument("--alpha", type=float, default=curves.DEFAULT_ALPHA,
                   help="smoothing weight applied before feature extraction (default: %(default)s)")
    p.add_argument("--threshold", type=float, default=curves.DEFAULT_THRESHOLD,
                   help="failure threshold in expansion percent (default: %(default)s)")
    p.add_argument("--k", type=int, default=3,
                   help="number of clusters (default: %(default)s)")
    p.add_argument("--no-standardize", action="store_true",
                   help="cluster on raw features without z-scoring")
    p.add_argument("--cluster-raw", action="store_true",
                   help="skip smoothing before feature extraction")
    add_seed(p)
    p.set_defaults(func=cmd_cluster)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SulfexpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
