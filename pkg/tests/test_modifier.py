import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from pqfsynth.config import SynthConfig
from pqfsynth.modifier import find_modifier, grid_point
from pqfsynth.relation import PhaseTarget, approx_phase, cf_phase, rescale_floor
from pqfsynth.rings import CycInt, RealCycInt, rho

CFG = SynthConfig()
NU_SQ = {4: 5, 8: 2, 12: 2}
UNIT = {2: 1 + math.sqrt(2), 3: 2 + math.sqrt(3)}


def scaled_phase(theta, eps, m):
    if m == 4:
        z = cf_phase(PhaseTarget(theta, eps), CFG).z
    else:
        z = approx_phase(PhaseTarget(theta, eps), m, CFG).z
    return rescale_floor(z, eps, m)


@settings(max_examples=60)
@given(st.sampled_from([2, 3]), st.data())
def test_grid_point_lands_in_both_windows(d, data):
    u = UNIT[d]
    x0 = data.draw(st.floats(-50, 50))
    w = data.draw(st.floats(1.01 * u, 30))
    y0 = data.draw(st.floats(-50, 50))
    h = data.draw(st.floats(u * u / w * 1.02, 30).filter(lambda t: t * w >= u * u * 1.01))
    g = grid_point(x0, x0 + w, y0, y0 + h, d)
    gv, _ = g.eval_real(128)
    bv, _ = g.bullet().eval_real(128)
    assert x0 <= float(gv) <= x0 + w
    assert y0 <= float(bv) <= y0 + h


def test_grid_point_rejects_small_area():
    with pytest.raises(Exception):
        grid_point(0.0, 1.0, 0.0, 1.0, 2)


@pytest.mark.parametrize("m", [4, 8, 12])
@pytest.mark.parametrize("eps", [1e-8, 1e-12])
def test_modifier_defect_and_probability(m, eps):
    theta = 0.618
    z = scaled_phase(theta, eps, m)
    res = find_modifier(z, m, CFG)

    rz = res.r.to_cyc() * z if m != 4 else z * CycInt(4, (res.r.a, 0))
    # defect equation: |y|^2 = nu^{2 L_r} - |r z|^2 exactly
    lhs = res.y.norm_sq() + rz.norm_sq()
    nu_pow = NU_SQ[m] ** res.L_r
    assert lhs == RealCycInt.from_int(m, nu_pow)

    # stated probability matches |r z|^2 / nu^{2 L_r}
    with mpmath.workprec(192):
        num, _ = rz.norm_sq().eval_real(192)
        p = float(num / nu_pow)
    assert abs(p - res.p_r) < 1e-9
    assert p > 1 - 1 / res.L1
    assert res.candidates_tried >= 1


@pytest.mark.parametrize("m", [8, 12])
def test_modifier_keeps_probability_high_for_random_angles(m):
    rng = random.Random(7)
    for _ in range(5):
        theta = rng.uniform(0.05, math.pi / 2)
        z = scaled_phase(theta, 1e-10, m)
        res = find_modifier(z, m, CFG)
        assert res.p_r > 0.9


def test_modifier_determinism():
    z = scaled_phase(0.91, 1e-10, 8)
    a = find_modifier(z, 8, CFG)
    b = find_modifier(z, 8, CFG)
    assert a.r == b.r and a.y == b.y and a.L_r == b.L_r
