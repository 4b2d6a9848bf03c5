#!/usr/bin/env python3
"""Cluster expansion records into the three expansion-pattern groups.

Each record is reduced to two features: when it first crosses the 0.5
percent failure threshold (extrapolated when the record ends early) and
how fast it is expanding there. K-means on the standardized features
separates fast nonlinear (HN), moderate linear (ML) and slow linear (LL)
behavior; clusters are then named by ascending mean failure time.
"""

import numpy as np

from sulfexp import cluster_features, generate_synthetic, kmeans, smooth, standardize_features

dataset = generate_synthetic((6, 8, 7), noise=0.03, seed=11)

features = []
for mix, series in dataset.pairs:
    features.append(cluster_features(smooth(series, 0.3), threshold=0.5))
features = np.array(features)

scaled, means, scales = standardize_features(features)
result = kmeans(scaled, k=3, seed=42)

print(f"converged: {result.converged} after {result.iterations} iteration(s), "
      f"objective {result.objective:.4f}")
print("\nid        true  cluster  t_fail   slope")
for (mix, _), f, c in zip(dataset.pairs, features, result.assignments):
    print(f"{mix.id}   {dataset.labels[mix.id].value}    {c}       "
          f"{f[0]:7.2f}  {f[1]:.5f}")

print("\ncluster centroids (back in raw units):")
for c, centroid in enumerate(result.centroids):
    raw = centroid * scales + means
    print(f"  cluster {c}: t_fail {raw[0]:7.2f} years, slope {raw[1]:.5f} %/yr")
