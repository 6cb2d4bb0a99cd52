"""Stage 2: pick a real modifier r so that |rz|^2 / nu^{2 L_r} is close to 1.

The modified numerator rz keeps the phase of z but nearly saturates the
power-of-nu denominator, which makes the success probability of one
measurement round high while leaving an easily solvable norm equation
|y|^2 = nu^{2 L_r} - |rz|^2 for the off-diagonal entry.  Candidates come
from a two-dimensional grid argument over Z[sqrt 2] / Z[sqrt 3] (m = 8, 12)
or from integer intervals in geometric progression (m = 4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import mpmath

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import AssumptionFailure, PreconditionViolated
from .normeq import solve_norm_eq, solve_two_squares
from .rigor import ceil_log2_real, ceil_log_int
from .rings import CycInt, RealCycInt, fundamental_unit

_WORK_PREC = 160


@dataclass(frozen=True)
class ModifierResult:
    r: RealCycInt            # the modifier (b = 0 and m = 4 for integers)
    y: CycInt                # |y|^2 = nu^{2 L_r} - |r z|^2
    L_r: int
    p_r: float
    candidates_tried: int
    L1: int
    slack: float


def grid_point(x0, x1, y0, y1, d: int) -> RealCycInt:
    """Some alpha = a + b*sqrt(d) with alpha in [x0,x1], alpha^bullet in [y0,y1].

    Exists whenever (x1-x0)(y1-y0) >= unit^2 with unit = 1+sqrt2 (d=2) or
    2+sqrt3 (d=3); found by rescaling with a unit power to balance the two
    interval widths and enumerating the few possible coefficients.
    """
    if d == 2:
        m = 8
    elif d == 3:
        m = 12
    else:
        raise ValueError("d must be 2 or 3")
    v = fundamental_unit(m)
    with mpmath.workprec(_WORK_PREC):
        x0, x1, y0, y1 = (mpmath.mpf(t) for t in (x0, x1, y0, y1))
        lam = mpmath.mpf(v.a) + mpmath.mpf(v.b) * mpmath.sqrt(d)
        wx, wy = x1 - x0, y1 - y0
        if wx <= 0 or wy <= 0 or wx * wy < lam ** 2 * (1 - mpmath.mpf(2) ** -40):
            raise PreconditionViolated("interval area below unit^2")
        k = int(mpmath.floor(mpmath.log(mpmath.sqrt(wy / wx)) / mpmath.log(lam)))
        # scale alpha by v^k: x-side stretches by lam^k, bullet side by
        # (v^bullet)^k = (N(v)/lam)^k; N(v) = -1 for d=2 flips orientation.
        sx = lam ** k
        sy = (1 / lam) ** k
        X0, X1 = x0 * sx, x1 * sx
        if d == 2 and k % 2:
            Y0, Y1 = -y1 * sy, -y0 * sy
        else:
            Y0, Y1 = y0 * sy, y1 * sy
        rd = mpmath.sqrt(d)
        b_lo = int(mpmath.floor((X0 - Y1) / (2 * rd))) - 1
        b_hi = int(mpmath.ceil((X1 - Y0) / (2 * rd))) + 1
        unscale = v ** (-k)
        for b in range(b_lo, b_hi + 1):
            a_lo = mpmath.ceil(max(X0 - b * rd, Y0 + b * rd))
            a_hi = mpmath.floor(min(X1 - b * rd, Y1 + b * rd))
            a = int(a_lo)
            while a <= a_hi:
                cand = RealCycInt(m, a, b) * unscale
                cv = cand.eval_real(_WORK_PREC)[0]
                cb = cand.bullet().eval_real(_WORK_PREC)[0]
                if x0 <= cv <= x1 and y0 <= cb <= y1:
                    return cand
                a += 1
    raise PreconditionViolated("no grid point found despite area bound")


def success_probability(r: RealCycInt, z: CycInt, L_r: int, m: int) -> float:
    nu_pow = 2 ** L_r if m in (8, 12) else 5 ** L_r
    with mpmath.workprec(_WORK_PREC):
        nr = ((r * r) * z.norm_sq()).eval_real(_WORK_PREC)[0]
        return float(nr / nu_pow)


def enumerate_candidates_v(z: CycInt) -> Iterator[int]:
    """Integers r with fractional part of log_sqrt5(r|z|) in (lam-1/L1, lam)."""
    if z.is_zero():
        raise ValueError("z must be nonzero")
    nz_sq = z.norm_sq().a  # |z|^2, a plain integer for m = 4
    L1 = max(ceil_log_int(nz_sq, 5), 2)
    with mpmath.workprec(_WORK_PREC):
        rt5 = mpmath.sqrt(5)
        log_nz = mpmath.log(nz_sq) / (2 * mpmath.log(rt5))
        lam = L1 - log_nz
        k = int(mpmath.ceil(mpmath.log(L1) / mpmath.log(rt5)))
        while True:
            hi = rt5 ** (k + lam)
            lo = rt5 ** (k + lam - mpmath.mpf(1) / L1)
            r = int(mpmath.floor(hi))
            stop = int(mpmath.ceil(lo))
            while r >= stop:
                if r > 0 and lo < r <= hi:
                    yield r
                r -= 1
            k += 1


def _exceeds_prob_floor(nr: RealCycInt, nu_pow: int, floor_den: int) -> bool:
    """Exact test nr / nu_pow > 1 - 1/floor_den."""
    lhs = nr * floor_den - nu_pow * (floor_den - 1)
    return lhs.sign() > 0 if isinstance(lhs, RealCycInt) else lhs > 0


def _find_modifier_v(z: CycInt, config: SynthConfig) -> ModifierResult:
    nz_sq = z.norm_sq().a
    L1 = max(ceil_log_int(nz_sq, 5), 2)
    # aim well above the guaranteed 1 - 1/L1 floor
    floor_den = max(L1, 250)
    with mpmath.workprec(_WORK_PREC):
        slack = float(L1 - mpmath.log(nz_sq) / mpmath.log(5))
    budget = config.candidate_budget_factor * max(L1, 8)
    consumed = 0
    tried = 0  # norm-equation attempts, the reported candidate count
    for r in enumerate_candidates_v(z):
        consumed += 1
        if consumed > budget:
            raise AssumptionFailure(
                f"no easy norm equation within {budget} V-basis candidates",
                stage="modifier")
        nr_sq = r * r * nz_sq
        L_r = ceil_log_int(nr_sq, 5)
        nu_pow = 5 ** L_r
        if not (nr_sq * floor_den > nu_pow * (floor_den - 1)):
            continue
        tried += 1
        try:
            y = solve_two_squares(nu_pow - nr_sq, config)
        except AssumptionFailure:
            # factoring budget ran out on this defect; try the next candidate
            continue
        if y is None:
            continue
        rr = RealCycInt(4, r, 0)
        assert y.norm_sq() + (rr * rr) * z.norm_sq() == RealCycInt(4, nu_pow, 0)
        return ModifierResult(rr, y, L_r, float(nr_sq / nu_pow),
                              tried, L1, slack)
    raise AssumptionFailure("V-candidate stream exhausted", stage="modifier")


def find_modifier(z: CycInt, m: Optional[int] = None,
                  config: SynthConfig = DEFAULT_CONFIG) -> ModifierResult:
    """First modifier r (by scan order) with an easily solvable norm equation."""
    if z.is_zero():
        raise ValueError("z must be nonzero")
    if m is None:
        m = z.m
    if m == 4:
        return _find_modifier_v(z, config)

    nz = z.norm_sq()
    L1 = max(ceil_log2_real(nz), 2)
    Lw = max(L1, 100)
    v = fundamental_unit(m)
    d = 2 if m == 8 else 3
    with mpmath.workprec(_WORK_PREC):
        lam = mpmath.mpf(v.a) + mpmath.mpf(v.b) * mpmath.sqrt(d)
        abs_z = mpmath.sqrt(nz.eval_real(_WORK_PREC)[0])
        abs_zb = mpmath.sqrt(z.bullet().norm_sq().eval_real(_WORK_PREC)[0])
        slack = float(L1 - mpmath.log(nz.eval_real(_WORK_PREC)[0], 2))
        two_pow_slack = mpmath.mpf(2) ** L1 / nz.eval_real(_WORK_PREC)[0]
        R = int(mpmath.ceil(mpmath.log(lam ** 2 * Lw * abs_zb / abs_z, 2)))
        budget = config.candidate_budget_factor * L1
        consumed = 0
        tried = 0  # norm-equation attempts, the reported candidate count
        while consumed <= budget:
            X = mpmath.sqrt(mpmath.mpf(2) ** R * two_pow_slack)
            span_lo = (1 - mpmath.mpf(1) / (2 * Lw)) * X
            B = X * abs_z / abs_zb
            # subwindows of ~2 unit^2 grid area, scanned from the top so the
            # accepted candidate sits as close to the denominator as possible
            min_w = lam ** 2 / B  # area lam^2 with conjugate range 2B
            n_win = max(1, int((X - span_lo) / (2 * min_w)))
            width = (X - span_lo) / n_win
            if width * 2 * B < lam ** 2:
                R += 1
                consumed += 1
                continue
            for i in range(n_win):
                hi = X - i * width
                lo = hi - width
                consumed += 1
                if consumed > budget:
                    break
                try:
                    r = grid_point(lo, hi, -B, B, d)
                except PreconditionViolated:
                    continue
                if r.sign() <= 0:
                    continue
                nr = (r * r) * nz
                L_r = ceil_log2_real(nr)
                nu_pow = 2 ** L_r
                if not _exceeds_prob_floor(nr, nu_pow, L1):
                    continue
                xi = RealCycInt.from_int(m, nu_pow) - nr
                if xi.bullet().sign() < 0:  # conjugate-branch feasibility
                    continue
                tried += 1
                try:
                    out = solve_norm_eq(xi, m, config)
                except AssumptionFailure:
                    continue
                if not out.solved:
                    continue
                y = out.y
                assert y.norm_sq() + nr == RealCycInt.from_int(m, nu_pow)
                p = success_probability(r, z, L_r, m)
                return ModifierResult(r, y, L_r, p, tried, L1, slack)
            R += 1
    raise AssumptionFailure(
        f"no easy norm equation within {budget} modifier candidates",
        stage="modifier")
