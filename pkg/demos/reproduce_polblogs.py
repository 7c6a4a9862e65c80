"""Two-way split of a labelled network such as the political blogs graph.

The data are not bundled.  Give an edge list and a ``node<TAB>label`` file:

    python demos/reproduce_polblogs.py edges.txt labels.tsv

Directed links are treated as undirected, degree-one nodes are peeled and
the largest component is kept before clustering with k=2.
"""

import os
import sys

import numpy as np

from sbmspec.clustering import spectral_cluster
from sbmspec.graph import largest_connected_component, load_edge_list, load_labels, prune_min_degree
from sbmspec.metrics import misclassification_rate

if len(sys.argv) < 3 or not all(os.path.exists(p) for p in sys.argv[1:3]):
    print(__doc__)
    sys.exit(0)

vocab = {}
g, _ = load_edge_list(sys.argv[1], vocab)
truth = load_labels(sys.argv[2], vocab)
pruned, keep = prune_min_degree(g)
h, m = largest_connected_component(pruned)
order = np.array(sorted(keep, key=keep.get))
nodes = order[sorted(m, key=m.get)]
lab = truth.restrict(nodes)
print(f"{h.node_count} nodes, {h.edge_count} edges after preprocessing")
for normalized in (False, True):
    res, _ = spectral_cluster(h, 2, normalized, seed=0)
    name = "normalized" if normalized else "unnormalized"
    print(f"  {name:<13} misclassification {misclassification_rate(res.labels, lab):.3f}")
