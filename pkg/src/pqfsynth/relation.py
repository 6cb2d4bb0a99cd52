"""Stage 1: approximate e^{i*theta} by a unimodular cyclotomic rational z*/z.

For m = 8, 12 a customized PSLQ searches for an integer relation among the
sine values x_j(theta) = sin(theta/2 + 2*pi*j/m); the customization is the
termination test, evaluated on the current best integer vector at every
iteration: accept the first z with 2*|Im(z e^{i theta/2})| < eps*|z|, which
is equivalent to |z*/z - e^{i theta}| < eps.  For m = 4 a continued-fraction
expansion of -tan(theta/2) plays the same role.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import IterationCap, PrecisionExhausted
from .rings import CycInt

_DEG = {4: 2, 8: 4, 12: 4}


@dataclass(frozen=True)
class PhaseTarget:
    theta: object  # mpf-convertible
    eps: float

    def __post_init__(self):
        if not (0 < float(self.eps) < 1):
            raise ValueError("eps must lie in (0, 1)")


@dataclass(frozen=True)
class PhaseApprox:
    z: CycInt
    achieved_error: float   # rigorous upper bound on |z*/z - e^{i theta}|
    residual: float         # value of the linear form F(a, x(theta))
    iterations: int


def relation_coeffs(theta, m: int, precision_bits: int = 128):
    """The sine coefficients x_j(theta) of the Stage-1 linear form."""
    d = _DEG[m]
    with mpmath.workprec(precision_bits):
        t = mpmath.mpf(theta)
        return [mpmath.sin(t / 2 + 2 * mpmath.pi * j / m) for j in range(d)]


def pslq_find(x, stop, precision_bits: int, max_iter: int):
    """PSLQ (gamma = sqrt(4/3)) with a per-iteration stop predicate.

    ``stop`` receives the current best candidate integer vector (the column
    of B matching the smallest updated residual) and returns either None or
    the final result, which is passed through.  The integer matrices A and B
    are kept exact; only H and y are floating point.
    """
    n = len(x)
    if n < 2:
        raise ValueError("need at least two values")
    with mpmath.workprec(precision_bits):
        if min(abs(mpmath.mpf(v)) for v in x) == 0:
            raise ValueError("PSLQ requires nonzero entries")
        gamma = mpmath.sqrt(mpmath.mpf(4) / 3)
        tiny = mpmath.mpf(2) ** (-precision_bits + 24)

        x = [mpmath.mpf(v) for v in x]
        B = [[int(i == j) for j in range(n)] for i in range(n)]
        # partial sums s_k = sqrt(sum_{j >= k} x_j^2)
        s = [mpmath.sqrt(mpmath.fsum(v * v for v in x[k:])) for k in range(n)]
        t = s[0]
        y = [v / t for v in x]
        s = [v / t for v in s]
        H = [[mpmath.mpf(0)] * (n - 1) for _ in range(n)]
        for i in range(n):
            if i < n - 1:
                H[i][i] = s[i + 1] / s[i] if s[i] else mpmath.mpf(0)
            for j in range(i):
                denom = s[j] * s[j + 1]
                H[i][j] = (-y[i] * y[j] / denom) if denom else mpmath.mpf(0)

        def size_reduce(i_start, j_top):
            for i in range(i_start, n):
                for j in range(min(i - 1, j_top), -1, -1):
                    if not H[j][j]:
                        raise PrecisionExhausted("PSLQ pivot vanished")
                    tq = int(mpmath.nint(H[i][j] / H[j][j]))
                    if tq == 0:
                        continue
                    y[j] += tq * y[i]
                    for k in range(j + 1):
                        H[i][k] -= tq * H[j][k]
                    for k in range(n):
                        B[k][j] += tq * B[k][i]

        size_reduce(1, n - 2)
        for rep in range(1, max_iter + 1):
            # pivot row maximizing gamma^i |H_ii|
            mrow, best = 0, -1
            gpow = mpmath.mpf(1)
            for i in range(n - 1):
                sz = gpow * abs(H[i][i])
                if sz > best:
                    mrow, best = i, sz
                gpow *= gamma
            # swap rows mrow, mrow+1 (columns of B)
            y[mrow], y[mrow + 1] = y[mrow + 1], y[mrow]
            H[mrow], H[mrow + 1] = H[mrow + 1], H[mrow]
            for k in range(n):
                B[k][mrow], B[k][mrow + 1] = B[k][mrow + 1], B[k][mrow]
            # corner rotation
            if mrow <= n - 3:
                t0 = mpmath.hypot(H[mrow][mrow], H[mrow][mrow + 1])
                if not t0:
                    raise PrecisionExhausted("PSLQ corner vanished")
                c1 = H[mrow][mrow] / t0
                c2 = H[mrow][mrow + 1] / t0
                for i in range(mrow, n):
                    h1, h2 = H[i][mrow], H[i][mrow + 1]
                    H[i][mrow] = c1 * h1 + c2 * h2
                    H[i][mrow + 1] = -c2 * h1 + c1 * h2
            size_reduce(mrow + 1, mrow + 1)
            # evaluate the stop predicate on the current best vector
            ibest = min(range(n), key=lambda i: abs(y[i]))
            vec = [B[j][ibest] for j in range(n)]
            if any(vec):
                result = stop(vec, rep)
                if result is not None:
                    return result, rep
            if abs(y[ibest]) < tiny:
                raise PrecisionExhausted("PSLQ residual below working precision")
    raise IterationCap(f"PSLQ exceeded {max_iter} iterations")


def _rigorous_error(z: CycInt, theta, precision_bits: int):
    """Upper bound on |z*/z - e^{i theta}| = 2|Im(z e^{i theta/2})| / |z|."""
    with mpmath.workprec(precision_bits):
        val, rad = z.eval_complex(precision_bits)
        rot = val * mpmath.exp(1j * mpmath.mpf(theta) / 2)
        resid = mpmath.im(rot)
        nz = abs(val)
        err_num = 2 * (abs(resid) + 2 * rad)
        err_den = nz - 2 * rad
        if err_den <= 0:
            raise PrecisionExhausted("z too small to bound the phase error")
        return err_num / err_den, resid


def approx_phase(target: PhaseTarget, m: int,
                 config: SynthConfig = DEFAULT_CONFIG) -> PhaseApprox:
    """PSLQ phase approximation for m = 8, 12."""
    if m not in (8, 12):
        raise ValueError("approx_phase handles m in {8, 12}; use cf_phase for m=4")
    eps = mpmath.mpf(target.eps)
    prec = config.working_precision(target.eps)
    d = _DEG[m]
    with mpmath.workprec(prec):
        xs = relation_coeffs(target.theta, m, prec)
        # exact-representability fast path: a single power of zeta suffices
        for j in range(d):
            if 2 * abs(xs[j]) < eps / 2:
                z = CycInt.zeta(m, j)
                err, resid = _rigorous_error(z, target.theta, prec)
                if err < eps:
                    return PhaseApprox(z, float(err), float(resid), 0)
        # relabel so x_0 carries the largest magnitude
        order = sorted(range(d), key=lambda j: -abs(xs[j]))
        xp = [xs[o] for o in order]

        def stop(vec, _rep):
            coeffs = [0] * d
            for i, o in enumerate(order):
                coeffs[o] = vec[i]
            z = CycInt(m, coeffs)
            if z.is_zero():
                return None
            try:
                err, resid = _rigorous_error(z, target.theta, prec)
            except PrecisionExhausted:
                return None
            if err < eps:
                return (z, err, resid)
            return None

        max_iter = max(32, int(config.pslq_iter_factor *
                               math.log2(1.0 / float(target.eps))))
        (z, err, resid), iters = pslq_find(xp, stop, prec, max_iter)
        return PhaseApprox(z, float(err), float(resid), iters)


def cf_phase(target: PhaseTarget,
             config: SynthConfig = DEFAULT_CONFIG) -> PhaseApprox:
    """Continued-fraction phase approximation over Z[i] (m = 4)."""
    eps = mpmath.mpf(target.eps)
    prec = config.working_precision(target.eps)
    with mpmath.workprec(prec):
        theta = mpmath.mpf(target.theta)
        t = -mpmath.tan(theta / 2)
        # convergents of t
        p_prev, q_prev = 1, 0
        p, q = int(mpmath.floor(t)), 1
        frac = t - int(mpmath.floor(t))
        for it in range(1, 4 * prec):
            z = CycInt(4, (q, p))
            if not z.is_zero():
                err, resid = _rigorous_error(z, target.theta, prec)
                if err < eps:
                    return PhaseApprox(z, float(err), float(resid), it)
            if frac == 0:
                raise PrecisionExhausted("continued fraction terminated early")
            t = 1 / frac
            a = int(mpmath.floor(t))
            frac = t - a
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        raise IterationCap("continued-fraction expansion exhausted")


def rescale_floor(z: CycInt, eps, m: int) -> CycInt:
    """Scale z by the smallest integer s putting |sz| above eps^{-1/(2d)}."""
    if z.is_zero():
        raise ValueError("z must be nonzero")
    d = _DEG[m]
    with mpmath.workprec(192):
        floor_val = mpmath.mpf(eps) ** (mpmath.mpf(-1) / (2 * d))
        nz = mpmath.sqrt(z.norm_sq().eval_real(192)[0])
        s = int(mpmath.ceil(floor_val / nz))
        if s < 1:
            s = 1
        if s * nz <= floor_val:
            s += 1
        if s == 1:
            return z
        return z * s
