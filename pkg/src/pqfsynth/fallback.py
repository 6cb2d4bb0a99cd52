"""Deterministic fallback approximation of Lambda(e^{i theta}).

The final protocol round needs a unitary (not probabilistic) approximation.
Candidates are ring integers u = alpha + i*beta whose rotated real part
nearly saturates nu^k, so that the pinned-form unitary with z = u is within
eps of Lambda(e^{i theta}) in the phase-invariant operator distance.  For
m = 8, 12 candidates come from grid points in vertical strips of the
feasibility meniscus; for m = 4 they are Gaussian lattice points enumerated
along continued-fraction directions of tan(theta/2).  Each candidate leaves
a norm equation for the off-diagonal entry; the first easily solvable one is
synthesized exactly and re-verified.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator

import mpmath

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import AssumptionFailure, PreconditionViolated
from .exactsynth import _M_BASIS, Circuit, ExactUnitary, eval_circuit, synth
from .modifier import grid_point
from .normeq import solve_norm_eq, solve_two_squares
from .rings import CycInt, RealCycInt

# round-exponent constants: k = ceil(C + 2 log2(1/eps)) makes both grid
# areas exceed the unit^2 precondition while keeping the non-Clifford count
# within 2 log2(1/eps) + 7 (m=12) and 4 log2(1/eps) + 16 (m=8)
_C_CONST = {8: 3.8, 12: 5.0}
_V_EXCESS = 6  # m=4: k = ceil(3 log5(1/eps)) + excess


@dataclass(frozen=True)
class FeasibleCandidate:
    u: CycInt
    k: int
    j: int


def _work_prec(eps: float, k: int) -> int:
    return max(192, 4 * int(math.log2(1.0 / eps)) + 2 * k + 64)


def round_exponent(eps: float, m: int) -> int:
    if m == 4:
        return int(math.ceil(3 * math.log(1.0 / eps, 5))) + _V_EXCESS
    return int(math.ceil(_C_CONST[m] + 2 * math.log2(1.0 / eps)))


def phase_distance(op, theta, precision_bits: int = 256) -> float:
    """Upper bound on min_phi || U - phi Lambda(e^{i theta}) || (spectral)."""
    u = eval_circuit(op) if isinstance(op, Circuit) else op
    with mpmath.workprec(precision_bits):
        th = mpmath.mpf(theta)
        zv, zr = u.z.eval_complex(precision_bits)
        nu = mpmath.sqrt(5 if u.m == 4 else 2) ** u.L
        w = mpmath.exp(2j * mpmath.pi * (u.ell % u.m) / u.m)
        tr = (mpmath.conj(zv) + zv * mpmath.conj(w) * mpmath.exp(1j * th)) / nu
        t_lo = (abs(tr) - 4 * zr / nu) / 2
        if t_lo > 1:
            t_lo = mpmath.mpf(1)
        return float(mpmath.sqrt(max(2 - 2 * t_lo, 0)))


def _meniscus_slice(y, c, s, eps_sq_half):
    """Horizontal extent [x_lo, x_hi] of the feasibility region at height y."""
    x_hi = mpmath.sqrt(max(1 - y * y, 0))
    x_lo = (1 - eps_sq_half + y * s) / c
    return x_lo, x_hi


def _candidates_quadratic(theta, eps, k: int, m: int,
                          seed: int) -> Iterator[FeasibleCandidate]:
    """Strip construction over Z[sqrt d][i], d = 2 or 3 (m = 8, 12)."""
    d = 2 if m == 8 else 3
    prec = _work_prec(eps, k)
    with mpmath.workprec(prec):
        th = mpmath.mpf(theta)
        e = mpmath.mpf(eps)
        c, s = mpmath.cos(th / 2), mpmath.sin(th / 2)
        esh = e * e / 2
        thresh = e * e / 3  # keep strips whose slice stays this long
        y_star = -s

        def ell(y):
            lo, hi = _meniscus_slice(y, c, s, esh)
            return hi - lo

        if ell(y_star) <= thresh:
            raise PreconditionViolated("meniscus too thin at this exponent")

        def bisect_edge(lo, hi):
            # ell(lo) > thresh >= ell(hi); find the crossing
            for _ in range(prec):
                mid = (lo + hi) / 2
                if ell(mid) > thresh:
                    lo = mid
                else:
                    hi = mid
            return lo

        y_min = bisect_edge(y_star, max(y_star - 2 * e, mpmath.mpf(-1)))
        y_max = bisect_edge(y_star, min(y_star + 2 * e, mpmath.mpf(1)))
        if y_min > y_max:
            y_min, y_max = y_max, y_min
        n = int(mpmath.floor(2 * mpmath.sqrt(2) / e))
        h = (y_max - y_min) / n
        R = mpmath.sqrt(2) ** k
        Rc = mpmath.sqrt(2) ** (k - 1)
        rng = random.Random(seed)
        emitted = 0
        for j in _iter_indices(n, rng):
            y0 = y_min + j * h
            try:
                beta = grid_point(R * y0, R * (y0 + h), -Rc, Rc, d)
            except PreconditionViolated:
                continue
            y_act = beta.eval_real(prec)[0] / R
            x_lo, x_hi = _meniscus_slice(y_act, c, s, esh)
            if x_hi <= x_lo:
                continue
            try:
                alpha = grid_point(R * x_lo, R * x_hi, -Rc, Rc, d)
            except PreconditionViolated:
                continue
            u = alpha.to_cyc() + CycInt.zeta(m, m // 4) * beta.to_cyc()
            emitted += 1
            yield FeasibleCandidate(u, k, int(j))
            if emitted > 64 * k:
                return


def _iter_indices(n: int, rng: random.Random):
    """Seeded sampling of strip indices without replacement (lazy for huge n)."""
    if n <= 4096:
        idx = list(range(n))
        rng.shuffle(idx)
        yield from idx
        return
    seen = set()
    while len(seen) < n:
        j = rng.randrange(n)
        if j in seen:
            continue
        seen.add(j)
        yield j


def _convergents(t, max_den):
    """Consecutive continued-fraction convergents (p, q) of the real t."""
    out = []
    p0, q0, p1, q1 = 1, 0, int(mpmath.floor(t)), 1
    x = t - mpmath.floor(t)
    out.append((p1, q1))
    for _ in range(10000):
        if q1 > max_den:
            break
        if x == 0:
            break
        x = 1 / x
        a = int(mpmath.floor(x))
        x -= a
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
    return out


def _candidates_gaussian(theta, eps, k: int,
                         seed: int) -> Iterator[FeasibleCandidate]:
    """Lattice walk over Z[i] along continued-fraction directions (m = 4)."""
    prec = _work_prec(eps, k)
    with mpmath.workprec(prec):
        th = mpmath.mpf(theta)
        e = mpmath.mpf(eps)
        c, s = mpmath.cos(th / 2), mpmath.sin(th / 2)
        R = mpmath.sqrt(5) ** k
        A_lo = (1 - e * e / 2) * R
        Yb = R * mpmath.sqrt(max(1 - (1 - e * e / 2) ** 2, 0))
        t = s / c  # tan(theta/2), |theta| <= pi/2
        convs = _convergents(t, int(Yb))
        # consecutive convergents straddling |g| ~ Yb/4
        gi = 0
        for i, (p, q) in enumerate(convs):
            if mpmath.hypot(p, q) <= Yb / 4:
                gi = i
        p1, q1 = convs[gi]
        if gi + 1 < len(convs):
            p2, q2 = convs[gi + 1]
        elif gi >= 1:
            p2, q2 = convs[gi - 1]  # tan(theta/2) exactly rational
        else:
            p2, q2 = 1, 0

        def A(a, b):
            return a * c - b * s

        def Y(a, b):
            return a * s + b * c

        s1, s2 = A(p1, q1), A(p2, q2)
        t1, t2 = Y(p1, q1), Y(p2, q2)
        if t1 == 0:  # walk direction orthogonal to the arc: swap roles
            (p1, q1, s1, t1), (p2, q2, s2, t2) = \
                (p2, q2, s2, t2), (p1, q1, s1, t1)
        det = s1 * t2 - s2 * t1  # = +-1 (rotation of a unimodular pair)
        A_c = (A_lo + R) / 2
        b0 = -t1 * A_c / det  # Cramer for a*s1+b*s2=A_c, a*t1+b*t2=0
        b0i = int(mpmath.nint(b0))
        misses = 0
        count = 0
        for off in _center_out():
            b = b0i + off
            if misses > 4096:
                return
            # a-range from the Y window
            ya, yb_ = (-Yb - b * t2) / t1, (Yb - b * t2) / t1
            if ya > yb_:
                ya, yb_ = yb_, ya
            # a-range from the A window
            if s1 != 0:
                aa, ab = (A_lo - b * s2) / s1, (R - b * s2) / s1
                if aa > ab:
                    aa, ab = ab, aa
            elif A_lo <= b * s2 <= R:
                aa, ab = ya, yb_  # the whole line sits inside the A window
            else:
                misses += 1
                continue
            lo = int(mpmath.ceil(max(ya, aa)))
            hi = int(mpmath.floor(min(yb_, ab)))
            if lo > hi:
                misses += 1
                continue
            misses = 0
            for a in range(lo, hi + 1):
                alpha = a * p1 + b * p2
                beta = a * q1 + b * q2
                norm = alpha * alpha + beta * beta
                if norm > 5 ** k:
                    continue
                if A(alpha, beta) < A_lo:
                    continue
                u = CycInt(4, (alpha, beta))
                count += 1
                yield FeasibleCandidate(u, k, count)
                if count > 64 * k:
                    return


def _center_out():
    yield 0
    i = 1
    while True:
        yield i
        yield -i
        i += 1


def feasible_candidates(theta, eps, k: int, m: int,
                        seed: int = 0) -> Iterator[FeasibleCandidate]:
    if m == 4:
        return _candidates_gaussian(theta, eps, k, seed)
    return _candidates_quadratic(theta, eps, k, m, seed)


def _count_allowance(eps: float, m: int) -> float:
    if m == 12:
        return 2 * math.log2(1 / eps) + 7
    if m == 8:
        return 4 * math.log2(1 / eps) + 16
    return 3 * math.log(1 / eps, 5) + 16


def fallback_approx(theta, eps, m: int,
                    config: SynthConfig = DEFAULT_CONFIG) -> Circuit:
    """A basis circuit within eps of Lambda(e^{i theta}), |theta| <= pi/2."""
    if abs(float(theta)) > math.pi / 2 + 1e-12:
        raise PreconditionViolated("fallback requires |theta| <= pi/2")
    ident = ExactUnitary.identity(m)
    if phase_distance(ident, theta) <= eps:
        return Circuit(_M_BASIS[m], ())
    k = round_exponent(eps, m)
    nu_pow = 5 ** k if m == 4 else 2 ** k
    budget = config.fallback_budget_factor * k
    tried = 0
    for cand in feasible_candidates(theta, eps, k, m, config.seed):
        tried += 1
        if tried > budget:
            break
        nsq = cand.u.norm_sq()
        xi = RealCycInt.from_int(m, nu_pow) - nsq
        try:
            if m == 4:
                if xi.a < 0:
                    continue
                y = solve_two_squares(xi.a, config)
                if y is None:
                    continue
            else:
                if xi.sign() < 0 or xi.bullet().sign() < 0:
                    continue
                out = solve_norm_eq(xi, m, config)
                if not out.solved:
                    continue
                y = out.y
        except AssumptionFailure:
            continue  # factorization stalled on this candidate; try another
        try:
            unit = ExactUnitary(m, cand.u, y, k, 0)
        except Exception:
            continue
        dist = phase_distance(unit, theta, _work_prec(eps, k))
        if dist > eps:
            continue
        circ = synth(unit)
        assert circ.cost <= _count_allowance(eps, m)
        return circ
    raise AssumptionFailure(
        f"no feasible fallback candidate accepted within {tried} tries",
        stage="fallback")
