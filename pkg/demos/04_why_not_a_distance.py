"""Why a new index instead of a statistical distance?

Three SINR distributions over the bins (bad, fair, good). Z agrees with X
point-wise more often than Y does, yet the usual distances rank Y closer.
"""
from __future__ import annotations

import numpy as np

from imsindex import similarity as sim

X = np.array([0.05, 0.25, 0.7])
Y = np.array([0.1, 0.45, 0.45])
Z = np.array([0.25, 0.2, 0.55])

print(f"{'':24}{'Y vs X':>8}{'Z vs X':>8}")
print(f"{'Euclidean distance':24}{sim.euclidean_distance(X, Y):8.3f}{sim.euclidean_distance(X, Z):8.3f}")
print(f"{'Bhattacharyya distance':24}{sim.bhattacharyya(X, Y)[1]:8.3f}{sim.bhattacharyya(X, Z)[1]:8.3f}")
print(f"{'KL divergence':24}{sim.kl_divergence(X, Y):8.3f}{sim.kl_divergence(X, Z):8.3f}")

# the index instead asks whether two models reach the same outage decision
rng = np.random.default_rng(0)
gamma_y = rng.exponential(3.0, 100_000)
gamma_x = gamma_y * rng.lognormal(0.0, 0.3, gamma_y.size)
stats = sim.error_probs((gamma_x, gamma_y), beta=1.0)
print(f"\nnoisy copy of a reference SINR: p_fa={stats.p_fa:.4f} p_md={stats.p_md:.4f} "
      f"S={sim.similarity_index(stats).value:.4f}")
