"""Transient responses of the XOR node to the four 2-bit words.

The node rests at the all-zero fixed point. Each word (with its trailing
header bit) kicks it into a long irregular transient; the four transients
look alike at a glance but differ in their timing details.

    python demos/01_transients.py [N1 N2]
"""

import sys

import numpy as np

from boolres.encoding import all_words, encode
from boolres.signal import boolean_distance, values_at
from boolres.simulator import ReservoirConfig, simulate

n1, n2 = (int(a) for a in sys.argv[1:3]) if len(sys.argv) > 2 else (17, 18)
cfg = ReservoirConfig.from_counts(n1, n2, rng_seed=1)
print(f"N1={n1} (T1={cfg.T1} ns), N2={n2} (T2={cfg.T2} ns)")

H = 300.0
waves = {}
for word in all_words(2):
    out = simulate(cfg, encode(word, H), H)
    waves[word.label] = out
    strip = "".join("#" if v else "." for v in values_at(out, np.arange(0, 100, 1.0)))
    print(f"{word.label} -> {word.label}1  {len(out):4d} transitions  first 100 ns: {strip}")

print("\npairwise distance over the first 100 ns:")
labels = list(waves)
for i, a in enumerate(labels):
    row = [boolean_distance(waves[a], waves[b], 0, 100) for b in labels]
    print(a, " ".join(f"{d:.2f}" for d in row))
