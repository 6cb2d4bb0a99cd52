"""Full probabilistic-with-fallback protocols for diagonal rotations.

A protocol is a chain of measurement rounds followed by a deterministic
fallback.  Each round embeds a basis unitary V into U = CNOT (I x V) CNOT;
measuring the ancilla applies Lambda(z*/z) on success and the known
diagonal Lambda(-y/y*) on failure, so the next round (or the fallback)
simply retargets the residual angle.  Cost moments follow the exact
backward recursion over per-round costs and failure probabilities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import InvalidInput, VerificationFailure
from .exactsynth import (_BASIS_M, _M_BASIS, _lam_tokens, Circuit,
                         ExactUnitary, eval_circuit, synth)
from .fallback import fallback_approx, phase_distance
from .modifier import find_modifier
from .relation import PhaseTarget, approx_phase, cf_phase, rescale_floor


@dataclass(frozen=True)
class Round:
    unitary: ExactUnitary
    circuit: Circuit
    p_success: float
    failure_phase: object  # mpf at working precision
    cost: int
    theta: float  # the angle this round targets

    @property
    def L(self) -> int:
        return self.unitary.L


@dataclass(frozen=True)
class PqfProtocol:
    target: PhaseTarget
    basis: str
    rounds: tuple
    fallback_circuit: Circuit
    expected_cost: float
    cost_variance: float
    prefix_circuit: Circuit


@dataclass(frozen=True)
class SimReport:
    trials: int
    seed: int
    success_freq: tuple
    mean_cost: float
    var_cost: float
    max_distance: float


def _wrap(x):
    """Reduce an angle to (-pi, pi] at the current working precision."""
    two_pi = 2 * mpmath.pi
    x = mpmath.mpf(x) - two_pi * mpmath.nint(mpmath.mpf(x) / two_pi)
    if x <= -mpmath.pi:
        x += two_pi
    return x


def reduce_angle(theta, basis: str, precision_bits: int = 256):
    """Split theta = residual + j*(2 pi / m) with an exact diagonal prefix."""
    m = _BASIS_M[basis]
    with mpmath.workprec(precision_bits):
        th = mpmath.mpf(theta)
        j = int(mpmath.nint(th * m / (2 * mpmath.pi)))
        resid = th - j * 2 * mpmath.pi / m
        prefix = Circuit(basis, tuple(_lam_tokens(basis, j % m)))
        return resid, prefix


def build_round(theta, eps, basis: str,
                config: SynthConfig = DEFAULT_CONFIG) -> Round:
    m = _BASIS_M[basis]
    target = PhaseTarget(theta, float(eps))
    apx = cf_phase(target, config) if m == 4 else \
        approx_phase(target, m, config)
    z = rescale_floor(apx.z, eps, m)
    mod = find_modifier(z, m, config)
    rz = z * mod.r.to_cyc()
    unit = ExactUnitary(m, rz, mod.y, mod.L_r, 0)
    circ = synth(unit)
    prec = config.working_precision(eps) + 64
    with mpmath.workprec(prec):
        zv, _ = rz.eval_complex(prec)
        yv, _ = mod.y.eval_complex(prec)
        # success applies Lambda(z*/z); check it against Lambda(e^{i theta})
        delta = _wrap(-2 * mpmath.arg(zv) - mpmath.mpf(theta))
        d0 = float(2 * abs(mpmath.sin(delta / 4)))
        if d0 > float(eps):
            raise VerificationFailure(
                f"success branch distance {d0:.3e} exceeds eps")
        # failure applies Lambda(-y/y*): theta' = theta - pi - 2 arg(y);
        # kept at working precision so later rounds target the exact angle
        fail = _wrap(mpmath.mpf(theta) - mpmath.pi - 2 * mpmath.arg(yv))
    return Round(unit, circ, mod.p_r, fail, circ.cost, float(theta))


def failure_angle(rd: Round) -> float:
    return rd.failure_phase


def cost_moments(costs: Sequence, failure_probs: Sequence, fallback_cost):
    """Exact first/second moment of total cost by backward recursion.

    Works over any field the inputs live in (Fraction inputs stay exact).
    """
    if len(costs) != len(failure_probs):
        raise InvalidInput("need one failure probability per round")
    m1 = fallback_cost
    m2 = fallback_cost * fallback_cost
    for c, q in zip(reversed(list(costs)), reversed(list(failure_probs))):
        m2 = c * c + 2 * c * q * m1 + q * m2
        m1 = c + q * m1
    return m1, m2


def expected_cost(protocol: PqfProtocol):
    m1, _ = cost_moments([r.cost for r in protocol.rounds],
                         [1 - r.p_success for r in protocol.rounds],
                         protocol.fallback_circuit.cost)
    return m1 + protocol.prefix_circuit.cost


def cost_variance(protocol: PqfProtocol):
    m1, m2 = cost_moments([r.cost for r in protocol.rounds],
                          [1 - r.p_success for r in protocol.rounds],
                          protocol.fallback_circuit.cost)
    return m2 - m1 * m1


def build_pqf(theta, eps, k_rounds: int, basis: str,
              config: SynthConfig = DEFAULT_CONFIG) -> PqfProtocol:
    if k_rounds < 0:
        raise InvalidInput("k_rounds must be nonnegative")
    m = _BASIS_M[basis]
    prec = config.working_precision(eps) + 64
    with mpmath.workprec(prec):
        resid, prefix = reduce_angle(theta, basis, prec)
        rounds = []
        th = resid
        for _ in range(k_rounds):
            rd = build_round(th, eps, basis, config)
            rounds.append(rd)
            th = rd.failure_phase
        fb_resid, fb_prefix = reduce_angle(th, basis, prec)
        fb = fallback_approx(fb_resid, eps, m, config) + fb_prefix
    m1, m2 = cost_moments([r.cost for r in rounds],
                          [1 - r.p_success for r in rounds], fb.cost)
    return PqfProtocol(PhaseTarget(float(theta), float(eps)), basis,
                       tuple(rounds), fb, float(m1) + prefix.cost,
                       float(m2 - m1 * m1), prefix)


def two_qubit_form(rd: Round):
    """Exact 4x4 block matrix of CNOT (I x V) CNOT over the ring, at scale L.

    Basis order |q1 q2> with q1 the data qubit: the top-left block is V and
    the bottom-right block is X V X.
    """
    v = rd.unitary.to_matrix()
    zero = v.a - v.a
    rows = ((v.a, v.b, zero, zero),
            (v.c, v.d, zero, zero),
            (zero, zero, v.d, v.c),
            (zero, zero, v.b, v.a))
    for i in range(4):
        for j in range(4):
            if (i < 2) != (j < 2):
                assert rows[i][j].is_zero()
    return rows, v.L


def _protocol_distances(protocol: PqfProtocol, precision_bits: int = 256):
    """Phase-invariant distance to the target for each trajectory class.

    Class j < k: rounds 1..j fail? no -- class j means success at round j
    after failures in rounds 1..j-1; class k is the fallback trajectory.
    """
    with mpmath.workprec(precision_bits):
        th = mpmath.mpf(protocol.target.theta)
        resid, _ = reduce_angle(th, protocol.basis, precision_bits)
        acc = th - resid  # exact prefix phase, then accumulated failures
        out = []
        for rd in protocol.rounds:
            zv, _ = rd.unitary.z.eval_complex(precision_bits)
            delta = _wrap(acc + (-2 * mpmath.arg(zv)) - th)
            out.append(float(2 * abs(mpmath.sin(delta / 4))))
            yv, _ = rd.unitary.y.eval_complex(precision_bits)
            acc = _wrap(acc + mpmath.pi + 2 * mpmath.arg(yv))
        # fallback composite: U_fb then the accumulated diagonal
        u = eval_circuit(protocol.fallback_circuit)
        zv, _ = u.z.eval_complex(precision_bits)
        yv, _ = u.y.eval_complex(precision_bits)
        nu = mpmath.sqrt(5 if u.m == 4 else 2) ** u.L
        w = mpmath.exp(2j * mpmath.pi * (u.ell % u.m) / u.m)
        phase = mpmath.exp(1j * acc)
        # tr(A^dag B) with A = diag(1, e^{i acc}) U_fb, B = Lambda(e^{i th})
        tr = (mpmath.conj(zv) + zv * mpmath.conj(w * phase) *
              mpmath.exp(1j * th)) / nu
        t = min(abs(tr) / 2, mpmath.mpf(1))
        out.append(float(mpmath.sqrt(max(2 - 2 * t, 0))))
        return out


def simulate(protocol: PqfProtocol, trials: int, seed: int = 0) -> SimReport:
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    k = len(protocol.rounds)
    costs = np.array([r.cost for r in protocol.rounds], dtype=np.int64)
    probs = np.array([r.p_success for r in protocol.rounds])
    alive = np.ones(trials, dtype=bool)
    total = np.full(trials, protocol.prefix_circuit.cost, dtype=np.int64)
    reached = np.zeros(k, dtype=np.int64)
    succeeded = np.zeros(k, dtype=np.int64)
    observed = []
    for j in range(k):
        n_alive = int(alive.sum())
        reached[j] = n_alive
        if n_alive == 0:
            break
        total[alive] += costs[j]
        win = np.zeros(trials, dtype=bool)
        win[alive] = rng.random(n_alive) < probs[j]
        succeeded[j] = int(win.sum())
        if win.any():
            observed.append(j)
        alive &= ~win
    n_fb = int(alive.sum())
    if n_fb:
        total[alive] += protocol.fallback_circuit.cost
        observed.append(k)
    dists = _protocol_distances(protocol)
    max_d = max((dists[j] for j in observed), default=0.0)
    freq = tuple(float(succeeded[j]) / reached[j] if reached[j] else
                 float("nan") for j in range(k))
    return SimReport(trials, seed, freq, float(total.mean()),
                     float(total.var()), max_d)


def euler_decompose(u, eps, basis: str = "t", k_rounds: int = 1,
                    config: SynthConfig = DEFAULT_CONFIG,
                    precision_bits: int = 192):
    """Angles (alpha, beta, gamma, delta) with u = e^{i delta} Rz(a)HRz(b)HRz(c),
    plus one compiled protocol per axial rotation at eps/3 each."""
    with mpmath.workprec(precision_bits):
        mat = mpmath.matrix(2, 2)
        for i in range(2):
            for j in range(2):
                mat[i, j] = mpmath.mpc(u[i][j] if not hasattr(u, "shape")
                                       else u[i, j])
        gram = mat.H * mat
        defect = max(abs(gram[i, j] - (1 if i == j else 0))
                     for i in range(2) for j in range(2))
        if defect > mpmath.mpf("1e-9"):
            raise InvalidInput("matrix is not unitary at working precision")
        tol = max(16 * defect, mpmath.mpf(2) ** (-(precision_bits // 2)))
        det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
        delta = mpmath.arg(det) / 2
        ph = mpmath.exp(-1j * delta)
        a00, a01, a10 = ph * mat[0, 0], ph * mat[0, 1], ph * mat[1, 0]
        beta = 2 * mpmath.atan2(abs(a10), abs(a00))
        zero = mpmath.mpf(0)
        if abs(a10) < mpmath.mpf(2) ** (-precision_bits + 16):
            alpha = _wrap(-2 * mpmath.arg(a00))
            beta_f, gamma = zero, zero
        elif abs(a00) < mpmath.mpf(2) ** (-precision_bits + 16):
            alpha = _wrap(-2 * mpmath.arg(a01) - mpmath.pi)
            beta_f, gamma = +mpmath.pi, zero
        else:
            spq = -2 * mpmath.arg(a00)          # alpha + gamma
            dpq = -2 * mpmath.arg(a01) - mpmath.pi  # alpha - gamma
            alpha = _wrap((spq + dpq) / 2)
            gamma = _wrap((spq - dpq) / 2)
            beta_f = beta
        # re-verify the reconstruction before compiling anything
        rz = lambda t: mpmath.matrix([[mpmath.exp(-1j * mpmath.mpf(t) / 2), 0],
                                      [0, mpmath.exp(1j * mpmath.mpf(t) / 2)]])
        h = mpmath.matrix([[1, 1], [1, -1]]) / mpmath.sqrt(2)
        rec = rz(alpha) * h * rz(beta_f) * h * rz(gamma)
        err = mpmath.mpf(0)
        best = None
        for sign in (1, -1):  # global phase sign of the reconstruction
            e = max(abs(sign * mpmath.exp(1j * delta) * rec[i, j] - mat[i, j])
                    for i in range(2) for j in range(2))
            if best is None or e < best[0]:
                best = (e, sign)
        err, sign = best
        if sign < 0:
            delta = _wrap(delta + mpmath.pi)
        if err > tol:
            raise VerificationFailure(
                f"euler reconstruction error {mpmath.nstr(err)}")
    sub = float(eps) / 3
    protos = tuple(build_pqf(t, sub, k_rounds, basis, config)
                   for t in (alpha, beta_f, gamma))
    return alpha, beta_f, gamma, delta, protos


def protocol_to_dict(protocol: PqfProtocol) -> dict:
    return {
        "basis": protocol.basis,
        "theta": float(protocol.target.theta),
        "eps": float(protocol.target.eps),
        "rounds": [{
            "L": rd.L,
            "p_success": rd.p_success,
            "failure_phase": float(rd.failure_phase),
            "cost": rd.cost,
            "circuit": rd.circuit.to_text(),
        } for rd in protocol.rounds],
        "fallback": {
            "cost": protocol.fallback_circuit.cost,
            "circuit": protocol.fallback_circuit.to_text(),
        },
        "expected_cost": protocol.expected_cost,
        "cost_variance": protocol.cost_variance,
        "prefix_gate": protocol.prefix_circuit.to_text(),
    }


def protocol_to_json(protocol: PqfProtocol, indent: int = 2) -> str:
    return json.dumps(protocol_to_dict(protocol), indent=indent)


def protocol_from_dict(data: dict) -> PqfProtocol:
    """Rebuild and re-verify a serialized protocol.

    Probabilities and distances are recomputed from the circuits; any
    tampering with circuit text or stored statistics raises
    VerificationFailure.
    """
    try:
        basis = data["basis"]
        m = _BASIS_M[basis]
        theta, eps = float(data["theta"]), float(data["eps"])
        prefix = Circuit.parse(data["prefix_gate"], basis)
        rounds = []
        th = theta
        resid, expect_prefix = reduce_angle(theta, basis)
        th = resid
        if prefix.gates != expect_prefix.gates:
            raise VerificationFailure("prefix gate does not match the target")
        for rd in data["rounds"]:
            circ = Circuit.parse(rd["circuit"], basis)
            unit = eval_circuit(circ)
            nsq, _ = unit.z.norm_sq().eval_real(192)
            p = float(nsq / (5 if m == 4 else 2) ** unit.L)
            with mpmath.workprec(192):
                yv, _ = unit.y.eval_complex(192)
                fail = float(_wrap(mpmath.mpf(th) - mpmath.pi -
                                   2 * mpmath.arg(yv)))
            if abs(p - float(rd["p_success"])) > 1e-9 or \
                    circ.cost != int(rd["cost"]):
                raise VerificationFailure("round statistics do not match")
            rounds.append(Round(unit, circ, p, fail, circ.cost, float(th)))
            th = fail
        fb = Circuit.parse(data["fallback"]["circuit"], basis)
        if fb.cost != int(data["fallback"]["cost"]):
            raise VerificationFailure("fallback cost does not match")
    except VerificationFailure:
        raise
    except Exception as exc:
        raise VerificationFailure(f"malformed protocol file: {exc}") from exc
    proto = PqfProtocol(PhaseTarget(theta, eps), basis, tuple(rounds), fb,
                        0.0, 0.0, prefix)
    m1, m2 = cost_moments([r.cost for r in rounds],
                          [1 - r.p_success for r in rounds], fb.cost)
    proto = PqfProtocol(proto.target, basis, proto.rounds, fb,
                        float(m1) + prefix.cost, float(m2 - m1 * m1), prefix)
    for d in _protocol_distances(proto):
        if d > eps * (1 + 1e-9):
            raise VerificationFailure(
                f"trajectory distance {d:.3e} exceeds eps {eps:g}")
    return proto
