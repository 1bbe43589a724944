"""Consistency window and divergence rate for the 8/11-element reservoir.

Fifty noisy repeats of every 2-bit word are compared with each other
(d_ii) and with the repeats of the other words (d_ij). Repeats start close
together and drift apart; the window ends when they are as far apart as
different words are.

    python demos/02_consistency.py [trials]
"""

import sys

from boolres.encoding import all_words
from boolres.metrics import estimate_consistency
from boolres.simulator import ReservoirConfig

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 50
cfg = ReservoirConfig.from_counts(8, 11)
rep = estimate_consistency(cfg, all_words(2), trials=trials)

print("  t_ns  " + "  ".join(f"d_{l}{l}" for l in rep.labels) + "   mean d_ij")
cross = rep.mean_cross()
for k in range(0, rep.times.size, 20):
    vals = "  ".join(f"{rep.d_ii[i, k]:.3f}" for i in range(len(rep.labels)))
    print(f"{rep.times[k]:6.1f}  {vals}   {cross[k]:.3f}")

print(f"\nwindow per word: {rep.per_input_window} ns")
print(f"consistency window L = {rep.window_L} ns")
print(f"separation d_ii(0)/d_ij(0): {[round(r, 2) for r in rep.separation_ratios()]}")
print(f"mean log-divergence slope: {rep.lyapunov_slope:.4f} per ns")
