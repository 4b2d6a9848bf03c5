#!/usr/bin/env python3
"""Predict sulfate-attack service life for new mixtures, no test data needed.

Uses the built-in default model: classify each mixture from its
proportions, sample its predicted expansion curve, and invert the model at
the 0.5 percent threshold for a failure-time estimate.
"""

from sulfexp import Mixture, default_bundle, predict_curve, predicted_failure_time
from sulfexp.errors import NumericalError

bundle = default_bundle()

candidates = [
    Mixture(id="lean-low-c3a", wc=0.45, c3a=5.0, c3s=55.0),
    Mixture(id="typical", wc=0.49, c3a=5.0, c3s=40.0),
    Mixture(id="wet-mid", wc=0.55, c3a=6.5, c3s=48.0),
    Mixture(id="high-c3a", wc=0.50, c3a=9.5, c3s=45.0, cement_content=0.589),
]

print("mixture        group  predicted failure")
for mix in candidates:
    try:
        t_fail = predicted_failure_time(mix, bundle)
        label = f"{t_fail:6.1f} years"
    except NumericalError as exc:
        t_fail = None
        label = f"never ({type(exc).__name__})"
    # sample a fast mixture only slightly past its failure; 40 years otherwise
    horizon = 40.0 if t_fail is None or t_fail > 10.0 else round(1.5 * t_fail, 1)
    curve = predict_curve(mix, bundle, horizon=horizon, step=horizon / 4)
    print(f"{mix.id:13s}  {curve.group}     {label}")
    pairs = "  ".join(f"{t:g}y={v:.3f}" for t, v in curve.samples)
    print(f"   expansion: {pairs}")
