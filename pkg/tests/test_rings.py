import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from pqfsynth.errors import NotAdjustable
from pqfsynth.rings import (CycInt, RealCycInt, euclid_gcd, fundamental_unit,
                            parity_mu, rho, unit_adjust)

COEFF = st.integers(min_value=-30, max_value=30)


def cyc(m):
    deg = 2 if m == 4 else 4
    return st.tuples(*([COEFF] * deg)).map(lambda c: CycInt(m, c))


@pytest.mark.parametrize("m", [4, 8, 12])
def test_zeta_has_order_m(m):
    w = CycInt.zeta(m)
    assert w ** m == CycInt.one(m)
    for k in range(1, m):
        assert w ** k != CycInt.one(m)


@pytest.mark.parametrize("m", [4, 8, 12])
def test_eval_matches_root_of_unity(m):
    w = CycInt.zeta(m)
    val, rad = w.eval_complex(128)
    with mpmath.workprec(160):
        ref = mpmath.exp(2j * mpmath.pi / m)
        assert abs(val - ref) < 1e-30
    assert rad < 1e-30


@settings(max_examples=150)
@given(st.sampled_from([4, 8, 12]), st.data())
def test_norm_sq_is_multiplicative(m, data):
    a = data.draw(cyc(m))
    b = data.draw(cyc(m))
    assert (a * b).norm_sq() == a.norm_sq() * b.norm_sq()


@settings(max_examples=150)
@given(st.sampled_from([4, 8, 12]), st.data())
def test_norm_sq_matches_modulus(m, data):
    a = data.draw(cyc(m))
    with mpmath.workprec(160):
        av, _ = a.eval_complex(160)
        nv, _ = a.norm_sq().eval_real(160)
        assert abs(abs(av) ** 2 - nv) < 1e-25


@settings(max_examples=100)
@given(st.sampled_from([8, 12]), st.data())
def test_bullet_is_ring_automorphism(m, data):
    a = data.draw(cyc(m))
    b = data.draw(cyc(m))
    assert (a * b).bullet() == a.bullet() * b.bullet()
    assert (a + b).bullet() == a.bullet() + b.bullet()
    assert a.bullet().bullet() == a


@pytest.mark.parametrize("m", [8, 12])
def test_bullet_negates_zeta(m):
    w = CycInt.zeta(m)
    assert w.bullet() == -w


@settings(max_examples=100)
@given(st.sampled_from([4, 8, 12]), st.data())
def test_conj_matches_complex_conjugate(m, data):
    a = data.draw(cyc(m))
    with mpmath.workprec(160):
        av, _ = a.eval_complex(160)
        cv, _ = a.conj().eval_complex(160)
        assert abs(mpmath.conj(av) - cv) < 1e-30


def test_fundamental_units():
    v8 = fundamental_unit(8)
    assert (v8.a, v8.b) == (1, 1)  # 1 + sqrt2, norm -1
    assert v8.a * v8.a - 2 * v8.b * v8.b == -1
    v12 = fundamental_unit(12)
    assert (v12.a, v12.b) == (2, 1)  # 2 + sqrt3, norm +1
    assert v12.a * v12.a - 3 * v12.b * v12.b == 1


@pytest.mark.parametrize("m,sq", [(8, 2), (12, 3)])
def test_rho_squares_to_radicand(m, sq):
    r = rho(m)
    assert r * r == RealCycInt.from_int(m, sq)
    # rho embeds into the cyclotomic ring consistently
    with mpmath.workprec(128):
        rv, _ = r.to_cyc().eval_complex(128)
        assert abs(rv - mpmath.sqrt(sq)) < 1e-25


@settings(max_examples=80)
@given(st.sampled_from([8, 12]), st.data())
def test_real_sign_matches_embedding(m, data):
    a = data.draw(st.integers(-40, 40))
    b = data.draw(st.integers(-40, 40))
    x = RealCycInt(m, a, b)
    v, _ = x.eval_real(128)
    if x.is_zero():
        assert x.sign() == 0
    else:
        assert x.sign() == (1 if v > 0 else -1)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([8, 12]), st.data())
def test_euclid_gcd_divides_both(m, data):
    small = st.tuples(*([st.integers(-6, 6)] * 4))
    g0 = CycInt(m, data.draw(small))
    a = g0 * CycInt(m, data.draw(small))
    b = g0 * CycInt(m, data.draw(small))
    if a.is_zero() and b.is_zero():
        return
    g = euclid_gcd(a, b)
    assert a.divide_exact(g) is not None
    assert b.divide_exact(g) is not None
    # g0 divides any common divisor's multiple structure: g is at least g0
    assert g.divide_exact(g0) is not None


def test_parity_orbits():
    reps = {"O0": (0, 0, 0, 0), "O1": (1, 0, 0, 0),
            "O2": (1, 1, 0, 0), "O3": (1, 0, 0, 1)}
    for name, r in reps.items():
        assert parity_mu(CycInt(12, r)).orbit == name
    # orbit sizes 1, 6, 6, 3
    counts = {}
    for c0 in range(2):
        for c1 in range(2):
            for c2 in range(2):
                for c3 in range(2):
                    o = parity_mu(CycInt(12, (c0, c1, c2, c3))).orbit
                    counts[o] = counts.get(o, 0) + 1
    assert counts == {"O0": 1, "O1": 6, "O2": 6, "O3": 3}


def test_parity_respects_multiplication_by_omega():
    z = CycInt(12, (1, 1, 0, 0))
    w = CycInt.zeta(12)
    assert parity_mu(z * w).orbit == parity_mu(z).orbit


def test_unit_adjust_fixes_unit_mismatch():
    m = 8
    y = CycInt(m, (3, 1, 0, 2))
    v = fundamental_unit(m)
    target = y.norm_sq() * (v * v)  # off by v^2 (totally positive unit)
    y2 = unit_adjust(y, target)
    assert y2.norm_sq() == target


def test_unit_adjust_rejects_non_unit_ratio():
    m = 8
    y = CycInt(m, (3, 1, 0, 2))
    with pytest.raises(ValueError):
        unit_adjust(y, y.norm_sq() * RealCycInt.from_int(m, 3))


def test_unit_adjust_m4_negative_unit():
    y = CycInt(4, (2, 1))
    with pytest.raises((NotAdjustable, ValueError)):
        unit_adjust(y, RealCycInt(4, -5, 0))


@settings(max_examples=80)
@given(st.sampled_from([4, 8, 12]), st.data())
def test_divide_exact_roundtrip(m, data):
    a = data.draw(cyc(m))
    b = data.draw(cyc(m))
    if b.is_zero():
        return
    q = (a * b).divide_exact(b)
    assert q == a
