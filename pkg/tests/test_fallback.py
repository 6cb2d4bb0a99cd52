import math
import random

import pytest

from pqfsynth.config import SynthConfig
from pqfsynth.errors import PreconditionViolated
from pqfsynth.fallback import fallback_approx, phase_distance, round_exponent
from pqfsynth.exactsynth import eval_circuit

CFG = SynthConfig()
M_OF = {"t": 8, "pi12": 12, "v": 4}


def allowance(eps, m):
    if m == 8:
        return 4 * math.log2(1 / eps) + 16
    if m == 12:
        return 2 * math.log2(1 / eps) + 7
    return 3 * math.log(1 / eps, 5) + 16


@pytest.mark.parametrize("m", [4, 8, 12])
@pytest.mark.parametrize("eps", [1e-6, 1e-10, 1e-15])
def test_fallback_within_eps_and_budget(m, eps):
    rng = random.Random(13 * m)
    for _ in range(4):
        theta = rng.uniform(-math.pi / 2, math.pi / 2)
        c = fallback_approx(theta, eps, m, CFG)
        assert phase_distance(c, theta) <= eps
        assert c.cost <= allowance(eps, m)


@pytest.mark.parametrize("m", [4, 8, 12])
def test_fallback_tiny_angle_returns_identity(m):
    c = fallback_approx(1e-30, 1e-10, m, CFG)
    assert len(c.gates) == 0
    assert c.cost == 0


@pytest.mark.parametrize("m", [4, 8, 12])
def test_fallback_rejects_wide_angle(m):
    with pytest.raises(PreconditionViolated):
        fallback_approx(2.0, 1e-10, m, CFG)


def test_round_exponent_grows_with_precision():
    for m in (4, 8, 12):
        ks = [round_exponent(10.0 ** -p, m) for p in (6, 10, 15, 20)]
        assert ks == sorted(ks)
        assert all(k >= 1 for k in ks)


@pytest.mark.parametrize("m", [4, 8, 12])
def test_fallback_determinism(m):
    a = fallback_approx(0.377, 1e-12, m, CFG)
    b = fallback_approx(0.377, 1e-12, m, CFG)
    assert a.to_text() == b.to_text()


def test_phase_distance_of_exact_match():
    # an exactly representable rotation: Lambda(w) in the T basis
    from pqfsynth.exactsynth import Circuit
    c = Circuit.parse("T", "t")
    assert phase_distance(c, math.pi / 4) < 1e-15


def test_phase_distance_is_an_upper_bound():
    # distance to a far-off angle is large
    from pqfsynth.exactsynth import Circuit
    c = Circuit.parse("T", "t")
    d_id = 2 * abs(math.sin((math.pi / 4) / 4))
    assert abs(phase_distance(c, 0.0) - d_id) < 1e-10


@pytest.mark.parametrize("m", [4, 8, 12])
def test_fallback_circuit_is_well_formed(m):
    basis = {8: "t", 12: "pi12", 4: "v"}[m]
    c = fallback_approx(0.61, 1e-8, m, CFG)
    assert c.basis == basis
    u = eval_circuit(c)
    assert u.m == m
