"""Kernel quality, generalization and effective dimensionality.

K counts how many independent directions the responses to m distinct words
span; Gamma does the same for words that share a long constant segment right
before sampling. D = L (K - Gamma) scores a reservoir by how much of its
consistency window carries input-specific structure.

Each matrix row averages a few noisy repeats, and singular values that
jitter alone could produce are not counted. With one repeat the plain 0/1
rank is used instead, which counts every jitter flip as a new direction.

    python demos/03_rank_measures.py
"""

from boolres.metrics import effective_dimensionality
from boolres.simulator import ReservoirConfig

print(" N1 N2     L      m     K      Gamma    D  (repeats)")
for n1, n2 in [(8, 11), (19, 10), (9, 14), (13, 7)]:
    cfg = ReservoirConfig.from_counts(n1, n2)
    for repeats in (1, 4):
        r = effective_dimensionality(cfg, trials=10, repeats=repeats)
        print(f"{n1:3d}{n2:3d} {r.L:6.1f} {r.m:5d} {r.K:7.3f} {r.Gamma:7.3f} {r.D:7.1f}  ({repeats})")
