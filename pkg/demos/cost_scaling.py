"""Expected gate count versus precision for all three bases.

Benchmarks a handful of seeded angles per precision level and prints the
mean expected non-Clifford count next to the asymptotic scaling in the
natural log base of each gate set.
"""
import math
import statistics

import numpy as np

from pqfsynth import SynthConfig
from pqfsynth.cli import bench_target

CFG = SynthConfig()
EPS = [1e-8, 1e-12, 1e-16, 1e-20]
ANGLES = np.random.Generator(np.random.Philox(2)).uniform(0, math.pi / 2, 10)

print(f"{'eps':>8s}  {'T (log2)':>14s}  {'K (log2)':>14s}  {'V (log5)':>14s}")
for eps in EPS:
    cells = []
    for basis, base in (("t", 2), ("pi12", 2), ("v", 5)):
        mean = statistics.fmean(
            bench_target(float(t), eps, basis, CFG)["expected_cost"]
            for t in ANGLES)
        x = math.log(1 / eps, base)
        cells.append(f"{mean:6.1f} ({mean / x:4.2f}x)")
    print(f"{eps:8.0e}  " + "  ".join(f"{c:>14s}" for c in cells))
