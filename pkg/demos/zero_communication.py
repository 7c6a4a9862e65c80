"""Two disconnected communities: how much tighter is the normalized embedding?

With no edges between the classes, both embeddings place each class around
its own center.  The spread of class 1 around its center is about four
times smaller after degree normalization, while the distance to the other
class center barely moves.  Run:

    python demos/zero_communication.py [n] [replicates]
"""

import sys

import numpy as np

from sbmspec.clustering import spectral_embedding
from sbmspec.metrics import quality_metrics
from sbmspec.sbm import BlockModelParams, analytic_distances, sample

n = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
reps = int(sys.argv[2]) if len(sys.argv) > 2 else 10
params = BlockModelParams(n, 0.5, 0.02, 0.02, 0.0)

d11, d12 = [], []
for seed in range(reps):
    g, truth = sample(params, seed)
    un = quality_metrics(spectral_embedding(g, 2, False, seed=seed), truth)
    no = quality_metrics(spectral_embedding(g, 2, True, seed=seed), truth)
    d11.append(un.d11_sq / no.d11_sq)
    d12.append(un.d12_sq / no.d12_sq)

ana = analytic_distances(params)
print(f"n={n}, alpha=beta=0.02, {reps} graphs")
print(f"  within-class spread, unnormalized / normalized: median {np.median(d11):.3f}"
      f" (closed form {ana.d11_sq_unnorm / ana.d11_sq_norm:.3f})")
print(f"  cross-class distance, unnormalized / normalized: median {np.median(d12):.3f}")
