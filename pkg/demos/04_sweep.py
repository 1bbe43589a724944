"""Effective dimensionality over the (N1, N2) grid.

Every cell gets its own seed stream derived from the master seed, so the
grid is the same whatever the worker count. The full 14 x 14 grid takes a
few minutes on one core.

    python demos/04_sweep.py [lo hi] [workers]
"""

import sys

import numpy as np

from boolres.experiments import ExperimentConfig, run_sweep

lo, hi = (int(a) for a in sys.argv[1:3]) if len(sys.argv) > 2 else (7, 20)
workers = int(sys.argv[3]) if len(sys.argv) > 3 else 1
cfg = ExperimentConfig(
    experiment="sweep", sweep_n1_min=lo, sweep_n1_max=hi, sweep_n2_min=lo, sweep_n2_max=hi,
    workers=workers,
)
res = run_sweep(cfg)
D = res.D_grid()

print("D (ns); rows N1, columns N2")
print("     " + "".join(f"{n:6d}" for n in res.n2_values))
for a, n1 in enumerate(res.n1_values):
    print(f"{n1:4d} " + "".join(f"{v:6.1f}" for v in D[a]))
best = res.argmax
r = res.cells[best]
print(f"\nargmax {best}: L={r.L} ns, K={r.K:.3f}, Gamma={r.Gamma:.3f}, D={r.D:.1f} ns")
off = np.abs(D - D.T)[np.triu_indices_from(D, 1)] if D.shape[0] == D.shape[1] else []
print(f"cells differing from their mirror image: {int(np.count_nonzero(off))}")
