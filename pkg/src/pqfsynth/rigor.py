"""Rigorous numeric helpers: exact ceil-logs and guarded comparisons.

Search heuristics throughout the pipeline run on mpmath floats, but every
decision that feeds a correctness claim is either made in exact ring
arithmetic or re-checked here with explicit error margins.
"""

from __future__ import annotations

import mpmath

from .errors import PrecisionExhausted
from .rings import RealCycInt


def _le_pow2(x: RealCycInt, k: int) -> bool:
    """Exact test x <= 2^k (k may be negative)."""
    if k >= 0:
        return x <= RealCycInt.from_int(x.m, 1 << k)
    return RealCycInt(x.m, x.a << (-k), x.b << (-k)) <= 1


def ceil_log2_real(x: RealCycInt) -> int:
    """Smallest integer k with x <= 2^k, decided exactly (x > 0 required)."""
    if x.sign() <= 0:
        raise ValueError("ceil_log2_real requires a positive argument")
    val, _ = x.eval_real(96)
    k = int(mpmath.ceil(mpmath.log(val, 2)))
    while not _le_pow2(x, k):
        k += 1
    while _le_pow2(x, k - 1):
        k -= 1
    return k


def ceil_log_int(n: int, base: int) -> int:
    """Smallest k with n <= base^k for positive integers."""
    if n <= 0:
        raise ValueError("positive n required")
    k = 0
    p = 1
    while p < n:
        p *= base
        k += 1
    return k


def reduce_mod_2pi(theta, precision_bits: int = 128):
    """Reduce an angle to (-pi, pi] at the requested precision."""
    with mpmath.workprec(precision_bits):
        pi = mpmath.pi
        t = mpmath.mpf(theta)
        n = mpmath.floor((t + pi) / (2 * pi))
        return t - 2 * pi * n


def guarded_less(lhs, rhs, margin) -> bool:
    """True iff lhs < rhs with certainty margin; raises when undecidable."""
    if lhs + margin < rhs:
        return True
    if lhs - margin >= rhs:
        return False
    raise PrecisionExhausted(f"comparison undecidable: {lhs} vs {rhs}")
