#!/usr/bin/env python3
"""Fit the three group models on pooled synthetic panels.

LL regresses expansion on (WC*T, 1), ML on (WC*T, C3A*T, 1), and HN
regresses ln(expansion) on (CC*T, T, 1). With noise-free panels the
generating coefficients come back to machine precision; with 5 percent
multiplicative noise they come back to a few percent.
"""

import numpy as np

from sulfexp import GroupLabel, fit_group_model, generate_synthetic, smooth

REFERENCE = {
    GroupLabel.LL: np.array([0.0157, 0.0305]),
    GroupLabel.ML: np.array([0.0293, 0.000975, 0.0216]),
    GroupLabel.HN: np.array([11.20, -5.68, -3.66]),
}

for noise in (0.0, 0.05):
    print(f"--- noise level {noise:.0%} ---")
    dataset = generate_synthetic((12, 14, 12), noise=noise, seed=31)
    by_group = {}
    for mix, series in dataset.pairs:
        label = dataset.labels[mix.id]
        # linear groups are fit on smoothed curves; HN keeps the raw record
        prepared = series if label is GroupLabel.HN else smooth(series, 0.3)
        by_group.setdefault(label, []).append((mix, prepared))
    for group in (GroupLabel.LL, GroupLabel.ML, GroupLabel.HN):
        model = fit_group_model(by_group[group], group)
        ref = REFERENCE[group]
        err = np.abs((model.coefficients - ref) / ref).max()
        print(f"group {group.value} ({model.form}):")
        for role, coef, t_stat in zip(model.variable_roles, model.coefficients,
                                      model.fit.t_statistics):
            print(f"  {role:6s} {coef:+.6g}   (t = {t_stat:.1f})")
        print(f"  R^2 = {model.fit.r_squared:.4f}, n = {model.fit.n_observations}, "
              f"max coefficient error {err:.2e}")
    print()
