"""Norm-equation solver: find y in Z[zeta_m] with y*conj(y) = xi, xi in Z[rho].

Solvability is decided through a limited factorization of xi over Z[rho]:
trial division by a precomputed set of small ring primes, then a bounded
Pollard-rho attack on the integer norm of the remaining cofactor.  Each prime
factor is classified as good (a solution above it is constructible) or bad
(an odd exponent certifies unsolvability); composite leftovers make the
instance "not easy" rather than unsolvable.  The Gaussian two-squares
equation |y|^2 = n is handled by the same machinery over Z[i].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from sympy.ntheory.residue_ntheory import sqrt_mod

from .config import DEFAULT_CONFIG, SynthConfig
from .errors import AssumptionFailure
from .rings import CycInt, RealCycInt, euclid_gcd, unit_adjust

_SMALL_PRIME_BOUND = 1000


# ---------------------------------------------------------------------------
# integer factorization helpers


def _small_primes(bound: int = _SMALL_PRIME_BOUND):
    sieve = bytearray([1]) * bound
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(bound ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i:bound:i] = bytearray(len(range(i * i, bound, i)))
    return [i for i in range(bound) if sieve[i]]


_PRIMES = _small_primes()


def _is_prime(n: int, config: SynthConfig = DEFAULT_CONFIG) -> bool:
    import gmpy2
    if n < 2:
        return False
    return bool(gmpy2.is_prime(n, max(config.mr_rounds, 25)))


def _rho_brent(n: int, budget: int, seed_c: int = 1) -> Optional[int]:
    """Brent-cycle Pollard rho; returns a nontrivial factor or None."""
    if n % 2 == 0:
        return 2
    for c in range(seed_c, seed_c + 20):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        count = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
                count += 128
                if count > budget:
                    return None
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    return None


def _factor_int(n: int, config: SynthConfig = DEFAULT_CONFIG):
    """Factor n > 0 into (dict prime -> exponent, leftover composite)."""
    factors: dict[int, int] = {}
    for p in _PRIMES:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        if n == 1:
            return factors, 1
    stack = [n]
    leftover = 1
    while stack:
        v = stack.pop()
        if v == 1:
            continue
        if _is_prime(v, config):
            factors[v] = factors.get(v, 0) + 1
            continue
        d = _rho_brent(v, config.rho_iter_budget)
        if d is None:
            leftover *= v
            continue
        stack.append(d)
        stack.append(v // d)
    return factors, leftover


# ---------------------------------------------------------------------------
# arithmetic in the real quadratic rings Z[sqrt(2)], Z[sqrt(3)]


def _real_gcd(a: RealCycInt, b: RealCycInt) -> RealCycInt:
    """Euclidean gcd in the norm-Euclidean rings Z[sqrt 2], Z[sqrt 3]."""
    while not b.is_zero():
        num = a * b.bullet()
        den = b.abs_norm()
        q0 = _round_half(num.a, den)
        q1 = _round_half(num.b, den)
        best = None
        for da in (0, 1, -1):
            for db in (0, 1, -1):
                q = RealCycInt(a.m, q0 + da, q1 + db)
                r = a - q * b
                nr = abs(r.abs_norm())
                if best is None or nr < best[0]:
                    best = (nr, r)
                if nr < abs(b.abs_norm()) and (da, db) == (0, 0):
                    break
        a, b = b, best[1]
    return a


def _round_half(n: int, d: int) -> int:
    if d < 0:
        n, d = -n, -d
    return (2 * n + d) // (2 * d)


def _ramified_gens(m: int) -> dict[int, RealCycInt]:
    if m == 8:
        return {2: RealCycInt(8, 0, 1)}                      # sqrt(2)
    return {2: RealCycInt(12, 1, 1), 3: RealCycInt(12, 0, 1)}  # 1+sqrt3, sqrt3


def _split_prime_above(p: int, m: int) -> Optional[RealCycInt]:
    """A ring prime of Z[sqrt k] above a rational prime p that splits."""
    k = 2 if m == 8 else 3
    ram = _ramified_gens(m)
    if p in ram:
        return ram[p]
    t = sqrt_mod(k, p)
    if t is None:
        return None  # inert
    g = _real_gcd(RealCycInt(m, p, 0), RealCycInt(m, t, -1))
    if abs(g.abs_norm()) != p:
        raise ArithmeticError(f"failed to split {p} over Z[sqrt {k}]")
    return g


def s_prime(m: int) -> list[RealCycInt]:
    """Small ring primes of Z[rho] above all rational primes < 1000."""
    out = []
    for p in _PRIMES:
        g = _split_prime_above(p, m)
        if g is None:
            out.append(RealCycInt(m, p, 0))
        else:
            out.append(g)
            gb = g.bullet()
            if abs(gb.abs_norm()) == p:
                out.append(gb)
    return out


_S_PRIME_CACHE: dict[int, list[RealCycInt]] = {}


def get_s_prime(m: int) -> list[RealCycInt]:
    if m not in _S_PRIME_CACHE:
        _S_PRIME_CACHE[m] = s_prime(m)
    return _S_PRIME_CACHE[m]


# ---------------------------------------------------------------------------
# limited factorization over Z[rho]


@dataclass
class LimitedFactorization:
    unit: RealCycInt
    factors: list  # list[(RealCycInt, int)]
    cofactor: RealCycInt
    budget_spent: int = 0

    def product(self) -> RealCycInt:
        acc = self.unit
        for p, e in self.factors:
            acc = acc * p ** e
        return acc * self.cofactor


def _divide_out(cur: RealCycInt, p: RealCycInt):
    e = 0
    while True:
        q = cur.divide_exact(p)
        if q is None:
            return cur, e
        cur, e = q, e + 1


def limited_factor(xi: RealCycInt,
                   config: SynthConfig = DEFAULT_CONFIG) -> LimitedFactorization:
    if xi.is_zero():
        raise ValueError("cannot factor zero")
    m = xi.m
    cur = xi
    factors = []
    work = 0
    for p in get_s_prime(m):
        cur, e = _divide_out(cur, p)
        if e:
            factors.append((p, e))
        work += 1
        if abs(cur.abs_norm()) == 1:
            break
    n = abs(cur.abs_norm())
    if n > 1:
        intfac, leftover = _factor_int(n, config)
        work += n.bit_length()
        for p in sorted(intfac):
            if p < _SMALL_PRIME_BOUND:
                continue  # already fully removed by trial division
            g = _split_prime_above(p, m)
            if g is None:
                g = RealCycInt(m, p, 0)
            cur, e = _divide_out(cur, g)
            if e:
                factors.append((g, e))
            cur, e = _divide_out(cur, g.bullet())
            if e:
                factors.append((g.bullet(), e))
        if leftover > 1:
            return LimitedFactorization(RealCycInt.from_int(m, 1), factors,
                                        cur, work)
    if abs(cur.abs_norm()) == 1:
        return LimitedFactorization(cur, factors, RealCycInt.from_int(m, 1), work)
    # remaining cofactor could not be broken; report it as-is
    return LimitedFactorization(RealCycInt.from_int(m, 1), factors, cur, work)


# ---------------------------------------------------------------------------
# prime classification and per-prime solutions


def _rational_under(xi: RealCycInt) -> Optional[int]:
    """q > 0 if xi is an associate of the rational integer q, else None."""
    n = abs(xi.abs_norm())
    r = math.isqrt(n)
    if r * r == n and r > 0 and \
            xi.divide_exact(RealCycInt.from_int(xi.m, r)) is not None:
        return r
    return None


def classify_prime(xi: RealCycInt, m: int) -> str:
    """'good' if the norm equation above this prime is solvable by recipe."""
    q = _rational_under(xi)
    if q is not None:
        return "bad" if q % m == m - 1 else "good"
    n = abs(xi.abs_norm())
    if _is_prime(n):
        return "good" if n % m == 1 else "bad"
    return "bad"


def _root_of_unity_mod(p: int, m: int) -> int:
    """An element of exact multiplicative order m modulo p (p = 1 mod m)."""
    half = m // 2
    for a in range(2, 1000):
        u = pow(a, (p - 1) // m, p)
        if pow(u, half, p) == p - 1:  # order exactly m (m = 4, 8, 12)
            if m == 12 and pow(u, 4, p) == 1:
                continue
            return u
    raise ArithmeticError(f"no order-{m} element found mod {p}")


def _unit_quotient(target: RealCycInt, value: RealCycInt) -> Optional[RealCycInt]:
    q = target.divide_exact(value)
    if q is not None and abs(q.abs_norm()) == 1:
        return q
    return None


def _solve_split(p_elem: RealCycInt, m: int) -> CycInt:
    """y with norm_sq(y) an associate of p_elem, for split p = 1 mod m."""
    p = abs(p_elem.abs_norm())
    u = _root_of_unity_mod(p, m)
    pi = euclid_gcd(CycInt.from_int(m, p), CycInt.zeta(m) - CycInt.from_int(m, u))
    for cand in (pi, pi.bullet()):
        if _unit_quotient(p_elem, cand.norm_sq()) is not None:
            return cand
    raise ArithmeticError(f"split solution does not match prime {p_elem!r}")


def _solve_inert(q: int, m: int) -> CycInt:
    """y with norm_sq(y) an associate of the inert rational prime q."""
    if m == 8:
        r = q % 8
        if r == 5:
            h = sqrt_mod(-1, q)
            return euclid_gcd(CycInt.from_int(8, q),
                              CycInt(8, (h, 0, 1, 0)))      # h + i
        if r == 3:
            h = sqrt_mod(-2, q)
            return euclid_gcd(CycInt.from_int(8, q),
                              CycInt(8, (h, 1, 0, 1)))      # h + i*sqrt2
    else:
        r = q % 12
        if r == 5:
            h = sqrt_mod(-1, q)
            return euclid_gcd(CycInt.from_int(12, q),
                              CycInt(12, (h, 0, 0, 1)))     # h + i
        if r == 7:
            h = sqrt_mod(-3, q)
            return euclid_gcd(CycInt.from_int(12, q),
                              CycInt(12, (h - 1, 0, 2, 0)))  # h + i*sqrt3
    raise ArithmeticError(f"unexpected inert residue {q} mod {m}")


# ---------------------------------------------------------------------------
# the norm equation


@dataclass
class NormEqOutcome:
    status: str  # "solved" | "unsolvable" | "not_easy"
    y: Optional[CycInt] = None
    certificate: Optional[LimitedFactorization] = None

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def _is_ramified(p: RealCycInt, m: int) -> Optional[int]:
    """The rational prime under p if p ramifies, else None."""
    n = abs(p.abs_norm())
    if m == 8 and n == 2:
        return 2
    if m == 12 and n in (2, 3):
        return n
    return None


def solve_norm_eq(xi: RealCycInt, m: int = None,
                  config: SynthConfig = DEFAULT_CONFIG) -> NormEqOutcome:
    """Solve y * conj(y) = xi over Z[zeta_m] for m in {8, 12}."""
    if m is None:
        m = xi.m
    if m not in (8, 12) or xi.m != m:
        raise ValueError("norm equation defined over m in {8, 12}")
    if xi.is_zero():
        return NormEqOutcome("solved", CycInt.zero(m))
    if xi.sign() < 0 or xi.bullet().sign() < 0:
        return NormEqOutcome("unsolvable")
    lf = limited_factor(xi, config)
    if abs(lf.cofactor.abs_norm()) != 1:
        co = lf.cofactor
        q = _rational_under(co)
        prime_like = (_is_prime(q, config) if q is not None
                      else _is_prime(abs(co.abs_norm()), config))
        if not prime_like:
            return NormEqOutcome("not_easy", certificate=lf)
        lf.factors.append((co, 1))
        prod = RealCycInt.from_int(m, 1)
        for p, e in lf.factors:
            prod = prod * p ** e
        u = xi.divide_exact(prod)
        if u is None or abs(u.abs_norm()) != 1:
            return NormEqOutcome("not_easy", certificate=lf)
        lf.unit = u
        lf.cofactor = RealCycInt.from_int(m, 1)

    y = CycInt.one(m)
    for p, e in lf.factors:
        under = _is_ramified(p, m)
        if under is not None:
            if m == 12:
                if e % 2:
                    return NormEqOutcome("unsolvable", certificate=lf)
                y = y * (p ** (e // 2)).to_cyc()
            else:
                # norm_sq(1 + w) = 2 + sqrt2, an associate of sqrt2
                y = y * (p ** (e // 2)).to_cyc()
                if e % 2:
                    y = y * CycInt(8, (1, 1, 0, 0))
            continue
        verdict = classify_prime(p, m)
        if verdict == "bad":
            if e % 2:
                return NormEqOutcome("unsolvable", certificate=lf)
            y = y * (p ** (e // 2)).to_cyc()
            continue
        q = _rational_under(p)
        if q is not None:
            yp = _solve_inert(q, m)
        else:
            yp = _solve_split(p, m)
        y = y * yp ** e
    try:
        y = unit_adjust(y, xi)
    except Exception as exc:  # NotAdjustable — taxonomy violation
        raise AssumptionFailure(f"unit adjustment failed: {exc}",
                                stage="normeq")
    assert y.norm_sq() == xi
    return NormEqOutcome("solved", y, lf)


# ---------------------------------------------------------------------------
# Gaussian two-squares


def solve_two_squares(n: int,
                      config: SynthConfig = DEFAULT_CONFIG) -> Optional[CycInt]:
    """y in Z[i] with |y|^2 = n, or None when provably unsolvable."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return CycInt.zero(4)
    factors, leftover = _factor_int(n, config)
    if leftover > 1:
        raise AssumptionFailure(
            f"factorization budget exhausted on cofactor {leftover}",
            stage="two_squares")
    y = CycInt.one(4)
    for p in sorted(factors):
        e = factors[p]
        if p == 2:
            y = y * CycInt(4, (1, 1)) ** e
        elif p % 4 == 1:
            h = sqrt_mod(-1, p)
            pi = euclid_gcd(CycInt.from_int(4, p), CycInt(4, (h, 1)))
            y = y * pi ** e
        else:
            if e % 2:
                return None
            y = y * CycInt.from_int(4, p ** (e // 2))
    assert y.norm_sq() == RealCycInt(4, n, 0)
    return y
