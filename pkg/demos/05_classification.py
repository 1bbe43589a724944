"""Recognising 2-bit words from the transient.

One ridge readout per word and start time is trained on 100 runs per word
and tested on 100 fresh runs. The error stays low while the classifier
window lies inside the consistency window (region A), rises while the window
straddles its end (B) and sits near chance once the window starts after it
(C).

    python demos/05_classification.py [N1 N2 [n]]
"""

import sys

from boolres.encoding import all_words
from boolres.metrics import estimate_consistency
from boolres.reservoir import error_curve, train
from boolres.simulator import ReservoirConfig

args = [int(a) for a in sys.argv[1:]]
n1, n2 = args[:2] if len(args) >= 2 else (8, 11)
n = args[2] if len(args) >= 3 else 2
cfg = ReservoirConfig.from_counts(n1, n2)

L = estimate_consistency(cfg, all_words(2), trials=50).window_L
classifiers = train(cfg, n, trials_per_word=100)
curve = error_curve(cfg, classifiers, n, test_trials=100, L=L)

print(f"N1={n1} N2={n2}, n={n}: L={L} ns, region A ends at {curve.A_end} ns")
for t, e, reg in list(curve.rows())[::6]:
    print(f"{t:6.1f} ns  {reg}  {e:.2f}  " + "*" * int(round(40 * e)))
for reg in "ABC":
    print(f"mean error in region {reg}: {curve.region_mean(reg):.3f}")
print(f"chance level: {curve.chance:.3f}")
