import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from pqfsynth.config import SynthConfig
from pqfsynth.errors import VerificationFailure
from pqfsynth.protocol import (PqfProtocol, _protocol_distances, build_pqf,
                               build_round, cost_moments, euler_decompose,
                               expected_cost, protocol_from_dict,
                               protocol_to_json, protocol_to_dict, reduce_angle,
                               simulate, two_qubit_form)

CFG = SynthConfig()


def test_reduce_angle_exact_eighth_turn():
    with mpmath.workprec(128):
        resid, prefix = reduce_angle(mpmath.pi / 4, "t", 128)
    assert abs(resid) < 1e-30
    assert prefix.to_text() == "T"


def test_reduce_angle_keeps_residual_small():
    for basis, m in (("t", 8), ("pi12", 12), ("v", 4)):
        for theta in (0.1, 1.5, 3.0, -2.7):
            resid, prefix = reduce_angle(theta, basis, 128)
            assert abs(resid) <= math.pi / m + 1e-20
            # prefix phase + residual reproduces theta mod 2 pi
            k = (theta - float(resid)) * m / (2 * math.pi)
            assert abs(k - round(k)) < 1e-12


def test_cost_moments_symbolic():
    # one round, then fallback: E = C + q*F exactly over Fractions
    p = Fraction(3, 4)
    m1, m2 = cost_moments([Fraction(8)], [1 - p], Fraction(16))
    assert m1 == 8 + Fraction(1, 4) * 16  # = 12
    assert m2 == Fraction(8 * 8) + 2 * 8 * Fraction(1, 4) * 16 \
        + Fraction(1, 4) * 256  # = 192
    assert m2 - m1 * m1 == Fraction(48)  # exact variance


def test_cost_moments_closed_form_geometric():
    # k identical rounds: E = C_P (1-q^k)/p + q^k C_F
    p, cp, cf, k = Fraction(9, 10), Fraction(7), Fraction(30), 5
    q = 1 - p
    m1, _ = cost_moments([cp] * k, [q] * k, cf)
    assert m1 == cp * (1 - q ** k) / p + q ** k * cf


@pytest.mark.parametrize("basis", ["t", "pi12", "v"])
def test_build_round_success_branch_accuracy(basis):
    eps = 1e-10
    rd = build_round(0.437, eps, basis, CFG)
    assert 0 < rd.p_success <= 1
    assert rd.cost == rd.circuit.cost
    assert abs(float(rd.failure_phase)) <= math.pi + 1e-9


@pytest.mark.parametrize("basis", ["t", "pi12", "v"])
@pytest.mark.parametrize("eps", [1e-8, 1e-14])
def test_full_protocol_all_trajectories(basis, eps):
    proto = build_pqf(0.813, eps, 2, basis, CFG)
    assert len(proto.rounds) == 2
    for d in _protocol_distances(proto):
        assert d <= eps
    assert abs(expected_cost(proto) - proto.expected_cost) < 1e-9


def test_zero_rounds_is_pure_fallback():
    proto = build_pqf(0.3, 1e-8, 0, "t", CFG)
    assert proto.rounds == ()
    assert max(_protocol_distances(proto)) <= 1e-8
    assert proto.expected_cost == proto.fallback_circuit.cost \
        + proto.prefix_circuit.cost


def test_two_qubit_form_blocks():
    rd = build_round(0.6, 1e-8, "t", CFG)
    rows, L = two_qubit_form(rd)
    v = rd.unitary.to_matrix()
    assert L == v.L
    assert rows[0][0] == v.a and rows[1][1] == v.d
    assert rows[2][2] == v.d and rows[3][3] == v.a
    for i in range(4):
        for j in range(4):
            if (i < 2) != (j < 2):
                assert rows[i][j].is_zero()


def test_simulate_matches_expectation():
    proto = build_pqf(0.71, 1e-10, 2, "t", CFG)
    rep = simulate(proto, 200_000, seed=5)
    var = proto.cost_variance
    sigma = math.sqrt(var / 200_000)
    assert abs(rep.mean_cost - proto.expected_cost) < 4 * sigma
    assert rep.max_distance <= 1e-10
    assert abs(rep.success_freq[0] - proto.rounds[0].p_success) < 0.01


def test_simulate_is_deterministic():
    proto = build_pqf(0.71, 1e-8, 1, "v", CFG)
    a = simulate(proto, 10_000, seed=9)
    b = simulate(proto, 10_000, seed=9)
    assert a == b


def test_serialization_roundtrip():
    proto = build_pqf(0.52, 1e-10, 2, "pi12", CFG)
    data = json.loads(protocol_to_json(proto))
    proto2 = protocol_from_dict(data)
    assert proto2.expected_cost == pytest.approx(proto.expected_cost)
    assert [r.circuit.to_text() for r in proto2.rounds] == \
        [r.circuit.to_text() for r in proto.rounds]


def test_tampered_circuit_detected():
    proto = build_pqf(0.52, 1e-10, 1, "t", CFG)
    data = protocol_to_dict(proto)
    text = data["rounds"][0]["circuit"]
    data["rounds"][0]["circuit"] = text + " T"
    with pytest.raises(VerificationFailure):
        protocol_from_dict(data)


def test_tampered_probability_detected():
    proto = build_pqf(0.52, 1e-10, 1, "t", CFG)
    data = protocol_to_dict(proto)
    data["rounds"][0]["p_success"] = 0.5
    with pytest.raises(VerificationFailure):
        protocol_from_dict(data)


def _mat_err(u, angles, prec=128):
    with mpmath.workprec(prec):
        alpha, beta, gamma, delta = angles

        def rz(t):
            return mpmath.matrix([[mpmath.exp(-1j * t / 2), 0],
                                  [0, mpmath.exp(1j * t / 2)]])
        h = mpmath.matrix([[1, 1], [1, -1]]) / mpmath.sqrt(2)
        rec = rz(alpha) * h * rz(beta) * h * rz(gamma)
        rec *= mpmath.exp(1j * delta)
        return max(abs(rec[i, j] - u[i][j]) for i in range(2)
                   for j in range(2))


def test_euler_decompose_recovers_hadamard():
    r = 1 / math.sqrt(2)
    h = [[r, r], [r, -r]]
    result = euler_decompose(h, 1e-8, "t", 1, CFG)
    alpha, beta, gamma, delta, protos = result
    assert _mat_err(h, (alpha, beta, gamma, delta)) < 1e-12
    assert len(protos) == 3
    for p in protos:
        assert max(_protocol_distances(p)) <= 1e-8 / 3


def test_euler_decompose_diagonal():
    u = [[1, 0], [0, 1j]]
    result = euler_decompose(u, 1e-8, "t", 1, CFG)
    alpha, beta, gamma, delta, _ = result
    assert _mat_err(u, (alpha, beta, gamma, delta)) < 1e-12
