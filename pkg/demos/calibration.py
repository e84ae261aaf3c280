"""
Calibrating the artifact strengths
==================================

The fake families are only useful if the detector finds them easy but not
trivial. This script re-runs the scan that set DEFAULT_STRENGTHS: for a few
grid strengths, run the 5-seed sweep of no mask, frequency 15%, frequency 70%
and pixel 15%, and print mean mAP with per-seed values.

    python demos/calibration.py            # full scan, about 4 minutes
    python demos/calibration.py --quick    # default strengths only

Measurement log. Sweep pipeline, master seed 0, 100 images per class and
family, 64x64, 10 epochs, highcut 3.0, notch 2.0. Mean mAP over 5 seeds:

    grid  none    freq15  freq70  pixel15
    1.0   0.665   0.700   0.693   0.712    pixel ahead of freq15
    2.0   0.796   0.865   0.770   0.856    chosen
    3.0   0.776   0.871   0.765   0.859
    5.0   0.783   0.860   0.800   0.854

A second check that builds corpora from seeds 0..4 directly (train seed =
corpus seed) gave freq15 / freq70 / pixel15 of 0.895 / 0.875 / 0.842 at
2.0, 0.888 / 0.884 / 0.853 at 3.0, and 0.871 / 0.899 / 0.858 at 5.0. So at
5.0 the 15% vs 70% ordering flips with the seeds. 2.0 keeps every ordering
on both seed sets with the widest worst-case margin (0.009, over pixel).
The comb contrast behind that choice, about 1 + s^2 times the noise power
at each harmonic, is measured in tests/test_synth_data.py.
"""
import sys
import time

from freqmask import MaskSpec
from freqmask.experiment import SweepConfig, run_sweep

grid_strengths = [2.0] if "--quick" in sys.argv else [1.0, 2.0, 3.0, 5.0]
specs = (MaskSpec("frequency", 0.15), MaskSpec("frequency", 0.7), MaskSpec("pixel", 0.15))

for g in grid_strengths:
    t = time.time()
    rep = run_sweep(SweepConfig(specs=specs, strengths={"fake_grid": g}))
    f15 = rep.per_seed_map("frequency-all-r0.15")
    print(f"grid strength {g}  ({time.time() - t:.0f}s)")
    for label in rep.labels:
        ps = rep.per_seed_map(label)
        behind = sum(f15[k] < ps[k] for k in ps)
        print(f"  {label:>20}  mAP {rep.map_mean(label):.4f}  seeds "
              + " ".join(f"{v:.3f}" for v in ps.values()) + f"  (f15 behind on {behind})")
