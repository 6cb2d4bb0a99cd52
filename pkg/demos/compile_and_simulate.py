"""Compile one rotation in each basis, print the protocol shape, and
Monte-Carlo check expected cost and precision."""
import math

from pqfsynth import SynthConfig, build_pqf, simulate
from pqfsynth.protocol import _protocol_distances

THETA = 0.61
EPS = 1e-12
CFG = SynthConfig()

for basis, counted in (("t", "T"), ("pi12", "K"), ("v", "V")):
    proto = build_pqf(THETA, EPS, 2, basis, CFG)
    dists = _protocol_distances(proto)
    rep = simulate(proto, 50_000, seed=1)
    print(f"basis={basis:5s} expected {counted}-count={proto.expected_cost:7.2f} "
          f"simulated={rep.mean_cost:7.2f} "
          f"p_success={proto.rounds[0].p_success:.4f} "
          f"worst trajectory distance={max(dists):.2e}")
