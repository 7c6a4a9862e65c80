"""Link prediction on real snapshot corpora (HepTH, NIPS, Citeseer, ...).

The corpora are not bundled.  Supply a manifest listing one edge-list file
per line in temporal order:

    python demos/reproduce_link_table.py path/to/manifest.txt [seed]

Without a manifest the script explains what it needs and exits.
"""

import os
import sys

from sbmspec.graph import load_manifest, load_snapshots
from sbmspec.linkpred import evaluate_all

if len(sys.argv) < 2 or not os.path.exists(sys.argv[1]):
    print(__doc__)
    sys.exit(0)

snaps = load_snapshots(load_manifest(sys.argv[1]))
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
rows = evaluate_all(snaps, seed=seed)
print(f"{len(snaps)} snapshots; nodes after pruning: {rows[0]['nodes']}")
for mode in ("links-included", "links-excluded"):
    cells = {r["method"]: r["auc"] for r in rows if r["mode"] == mode}
    print(f"{mode:<16} unnorm {cells['unnorm']:.3f}  norm {cells['norm']:.3f}  katz {cells['katz']:.3f}")
