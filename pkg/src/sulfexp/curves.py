"""Expansion time-series preprocessing.

Measured expansion records are noisy and irregularly sampled. This module
smooths them with a three-point convolution, locates the failure point
(first crossing of the expansion threshold, 0.5 percent by default) and
derives the two clustering features: failure time and the slope there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    InvalidAlpha,
    NonFiniteValue,
    NonPositiveTrend,
    TooFewSamples,
    ValidationError,
)

DEFAULT_THRESHOLD = 0.5      # expansion percent at which a specimen is failed
DEFAULT_ALPHA = 0.3          # smoothing weight on the point itself
CENSORED_TIME_CAP = 200.0    # years; keeps extrapolated features finite


@dataclass(frozen=True)
class ExpansionSeries:
    """One specimen's expansion history.

    ``samples`` holds (time in years, expansion in percent) pairs with
    strictly increasing times. Negative expansion values are legal
    measurement noise; they are kept, not clamped.
    """

    mixture_id: str
    samples: tuple[tuple[float, float], ...]
    group: str | None = field(default=None, compare=False)

    def __post_init__(self):
        samples = tuple((float(t), float(e)) for t, e in self.samples)
        object.__setattr__(self, "samples", samples)
        times = [t for t, _ in samples]
        values = [e for _, e in samples]
        if any(not math.isfinite(t) or not math.isfinite(e) for t, e in samples):
            raise NonFiniteValue(f"series {self.mixture_id!r} has non-finite samples")
        if any(t < 0 for t in times):
            raise ValidationError(f"series {self.mixture_id!r} has negative times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError(f"series {self.mixture_id!r} times not strictly increasing")
        del values

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    @property
    def values(self) -> np.ndarray:
        return np.array([e for _, e in self.samples])

    @property
    def has_negative_values(self) -> bool:
        """Flags measurement-noise dips below zero."""
        return any(e < 0 for _, e in self.samples)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class FailurePoint:
    """Where a series first reaches the failure threshold.

    ``censored`` marks records that never reach the threshold; their
    ``t_fail`` comes from extrapolating the terminal secant, capped at
    ``CENSORED_TIME_CAP`` years.
    """

    t_fail: float
    slope: float
    censored: bool = False


def smoothing_weights(alpha: float, dt_prev: float, dt_next: float) -> tuple[float, float, float]:
    """Convolution weights (previous, self, next) for one interior point.

    The neighbor weights are cross-scaled by the opposite interval, which
    makes every affine series a fixed point regardless of sample spacing:
    the weight on the previous sample carries the following interval and
    vice versa. The three weights sum to 1.
    """
    total = dt_prev + dt_next
    w_prev = (1.0 - alpha) * dt_next / total
    w_next = (1.0 - alpha) * dt_prev / total
    return w_prev, alpha, w_next


def smooth(series: ExpansionSeries, alpha: float = DEFAULT_ALPHA) -> ExpansionSeries:
    """Smooth interior samples with the three-point convolution.

    First and last samples pass through unchanged (no neighbor exists on
    one side) and time stamps are preserved exactly. ``alpha`` balances the
    point's own value against its neighbors; ``alpha = 1`` is the identity.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"alpha must be in [0, 1], got {alpha}")
    if len(series) < 3:
        raise TooFewSamples(
            f"series {series.mixture_id!r} has {len(series)} samples; smoothing needs >= 3"
        )
    t = series.times
    s = series.values
    out = s.copy()
    for n in range(1, len(s) - 1):
        w_prev, _, w_next = smoothing_weights(alpha, t[n] - t[n - 1], t[n + 1] - t[n])
        # delta form of the convolution: exact when both neighbors equal the
        # point (the weights sum to 1, so only differences matter)
        out[n] = s[n] + w_prev * (s[n - 1] - s[n]) + w_next * (s[n + 1] - s[n])
    return replace(series, samples=tuple(zip(t.tolist(), out.tolist())))


def failure_point(series: ExpansionSeries, threshold: float = DEFAULT_THRESHOLD) -> FailurePoint:
    """Locate the first crossing of ``threshold``.

    The crossing time is linearly interpolated between the bracketing
    samples and the slope is the secant over that interval. If the record
    never reaches the threshold the terminal secant is extrapolated
    forward; a non-positive terminal secant has no finite crossing and
    raises :class:`NonPositiveTrend`.
    """
    if len(series) < 2:
        raise TooFewSamples(
            f"series {series.mixture_id!r} needs >= 2 samples to define a slope"
        )
    t = series.times
    e = series.values

    if e[0] >= threshold:
        slope = (e[1] - e[0]) / (t[1] - t[0])
        return FailurePoint(t_fail=float(t[0]), slope=float(slope), censored=False)

    crossing = np.nonzero(e >= threshold)[0]
    if crossing.size:
        i = int(crossing[0])
        slope = (e[i] - e[i - 1]) / (t[i] - t[i - 1])
        t_fail = t[i - 1] + (threshold - e[i - 1]) / slope
        return FailurePoint(t_fail=float(t_fail), slope=float(slope), censored=False)

    slope = (e[-1] - e[-2]) / (t[-1] - t[-2])
    if slope <= 0:
        raise NonPositiveTrend(
            f"series {series.mixture_id!r} never reaches {threshold} and its "
            f"terminal secant slope {slope:.4g} admits no finite crossing"
        )
    t_fail = min(t[-1] + (threshold - e[-1]) / slope, CENSORED_TIME_CAP)
    return FailurePoint(t_fail=float(t_fail), slope=float(slope), censored=True)


def cluster_features(series: ExpansionSeries, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Two clustering features: (failure time, slope at failure).

    The expansion coordinate of the failure point is omitted: it equals the
    threshold for every uncensored series.
    """
    fp = failure_point(series, threshold)
    return np.array([fp.t_fail, fp.slope])
