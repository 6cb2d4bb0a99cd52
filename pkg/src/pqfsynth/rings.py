"""Exact arithmetic in the cyclotomic rings Z[zeta_m], m in {4, 8, 12}.

CycInt stores an element of Z[zeta_m] as phi(m) integer coefficients in the
power basis {1, zeta, ..., zeta^{d-1}} (low degree first).  RealCycInt stores
an element a + b*rho of the real subring, where rho = zeta + zeta^{-1}
(sqrt(2) for m=8, sqrt(3) for m=12, and rho is unused for m=4 where the real
subring is plain Z).

Everything here is immutable and pure; all equality decisions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .errors import NotAdjustable

_SUPPORTED_M = (4, 8, 12)

# d = phi(m)
_DEGREE = {4: 2, 8: 4, 12: 4}

# square of rho (rho = sqrt(_RHO_SQ[m])); m=4 has no rho.
_RHO_SQ = {8: 2, 12: 3}


def _degree(m: int) -> int:
    if m not in _SUPPORTED_M:
        raise ValueError(f"unsupported ring order m={m}")
    return _DEGREE[m]


@lru_cache(maxsize=None)
def _zeta_power_table(m: int) -> tuple[tuple[int, ...], ...]:
    """Coefficient vectors of zeta^k for k = 0..m-1, canonically reduced."""
    d = _degree(m)
    rows = [[0] * d for _ in range(m)]
    rows[0][0] = 1
    for k in range(1, m):
        prev = rows[k - 1]
        cur = [0] * (d + 1)
        for i, c in enumerate(prev):
            cur[i + 1] = c
        # reduce the single overflow power zeta^d
        top = cur[d]
        cur = cur[:d]
        if top:
            if m == 4:  # zeta^2 = -1
                cur[0] -= top
            elif m == 8:  # zeta^4 = -1
                cur[0] -= top
            else:  # m == 12: zeta^4 = zeta^2 - 1
                cur[0] -= top
                cur[2] += top
        rows[k] = cur
    return tuple(tuple(r) for r in rows)


class CycInt:
    """Exact cyclotomic integer in Z[zeta_m]."""

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs):
        d = _degree(m)
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != d:
            raise ValueError(f"expected {d} coefficients for m={m}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, *a):  # immutability
        raise AttributeError("CycInt is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def from_int(cls, m: int, n: int) -> "CycInt":
        d = _degree(m)
        return cls(m, (int(n),) + (0,) * (d - 1))

    @classmethod
    def zeta(cls, m: int, k: int = 1) -> "CycInt":
        return cls(m, _zeta_power_table(m)[k % m])

    @classmethod
    def zero(cls, m: int) -> "CycInt":
        return cls.from_int(m, 0)

    @classmethod
    def one(cls, m: int) -> "CycInt":
        return cls.from_int(m, 1)

    # -- basic ring ops ------------------------------------------------
    def _check(self, other: "CycInt") -> None:
        if not isinstance(other, CycInt) or other.m != self.m:
            raise ValueError("mixed-ring operands")

    def __add__(self, other):
        if isinstance(other, int):
            other = CycInt.from_int(self.m, other)
        self._check(other)
        return CycInt(self.m, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.m, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = CycInt.from_int(self.m, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CycInt(self.m, tuple(a * other for a in self.coeffs))
        if isinstance(other, RealCycInt):
            other = other.to_cyc()
        self._check(other)
        d = len(self.coeffs)
        conv = [0] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        conv[i + j] += a * b
        out = list(conv[:d])
        table = _zeta_power_table(self.m)
        for k in range(d, 2 * d - 1):
            c = conv[k]
            if c:
                red = table[k]
                for i in range(d):
                    out[i] += c * red[i]
        return CycInt(self.m, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers not defined in the ring")
        result = CycInt.one(self.m)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycInt.from_int(self.m, other)
        return isinstance(other, CycInt) and other.m == self.m and other.coeffs == self.coeffs

    def __hash__(self):
        return hash((self.m, self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    # -- Galois maps ----------------------------------------------------
    def conj(self) -> "CycInt":
        """Complex conjugation: zeta -> zeta^{-1}."""
        m, d = self.m, len(self.coeffs)
        table = _zeta_power_table(m)
        out = [0] * d
        for k, a in enumerate(self.coeffs):
            if a:
                red = table[(m - k) % m]
                for i in range(d):
                    out[i] += a * red[i]
        return CycInt(m, out)

    def bullet(self) -> "CycInt":
        """The Galois map extending zeta -> -zeta (m = 8, 12 only)."""
        if self.m == 4:
            raise ValueError("bullet automorphism is not used for m=4")
        return CycInt(self.m, tuple(c if i % 2 == 0 else -c
                                    for i, c in enumerate(self.coeffs)))

    def norm_sq(self) -> "RealCycInt":
        """z * conj(z), expressed in the real subring."""
        prod = self * self.conj()
        c = prod.coeffs
        m = self.m
        if m == 4:
            if c[1] != 0:
                raise ArithmeticError("norm not real (bug)")
            return RealCycInt(m, c[0], 0)
        if m == 8:
            # rho = zeta - zeta^3  ->  a + b*rho = (a, b, 0, -b)
            if c[2] != 0 or c[3] != -c[1]:
                raise ArithmeticError("norm not in Z[rho] (bug)")
            return RealCycInt(m, c[0], c[1])
        # m == 12: rho = 2*zeta - zeta^3 -> a + b*rho = (a, 2b, 0, -b)
        if c[2] != 0 or c[1] != -2 * c[3]:
            raise ArithmeticError("norm not in Z[rho] (bug)")
        return RealCycInt(m, c[0], -c[3])

    def divide_exact(self, other) -> "CycInt | None":
        """Exact quotient self/other in Z[zeta_m], or None if not divisible."""
        if isinstance(other, RealCycInt):
            other = other.to_cyc()
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError
        num, den = _field_quotient_numerator(self, other)
        if den < 0:
            num, den = -num, -den
        if any(c % den for c in num.coeffs):
            return None
        return CycInt(self.m, tuple(c // den for c in num.coeffs))

    def full_norm(self) -> int:
        """Norm down to Z: |z|^2 * |z_bullet|^2 (z*conj(z) squared for m=4)."""
        n = self.norm_sq()
        if self.m == 4:
            return n.a
        return n.abs_norm()

    # -- numerics --------------------------------------------------------
    def eval_complex(self, precision_bits: int = 128):
        """Complex interval evaluation; returns (mpmath.mpc, mpf error radius)."""
        if precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        with mpmath.workprec(precision_bits + 16):
            zeta = mpmath.exp(2j * mpmath.pi / self.m)
            val = mpmath.mpc(0)
            power = mpmath.mpc(1)
            for c in self.coeffs:
                if c:
                    val += c * power
                power *= zeta
            scale = sum(abs(c) for c in self.coeffs) + 1
            rad = mpmath.mpf(scale) * mpmath.mpf(2) ** (-precision_bits - 4)
        return val, rad

    def __repr__(self):
        terms = " + ".join(f"{c}*w^{i}" if i else str(c)
                           for i, c in enumerate(self.coeffs))
        return f"{terms} (m={self.m})"


@dataclass(frozen=True)
class RealCycInt:
    """Element a + b*rho of the real subring (b = 0 when m = 4)."""

    m: int
    a: int
    b: int = 0

    def __post_init__(self):
        _degree(self.m)
        if self.m == 4 and self.b != 0:
            raise ValueError("m=4 real subring is plain Z")
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))

    @property
    def rho_sq(self) -> int:
        return _RHO_SQ.get(self.m, 0)

    @classmethod
    def from_int(cls, m: int, n: int) -> "RealCycInt":
        return cls(m, int(n), 0)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, int):
            return RealCycInt(self.m, other, 0)
        if isinstance(other, RealCycInt) and other.m == self.m:
            return other
        raise ValueError("mixed-ring operands")

    def __add__(self, other):
        other = self._coerce(other)
        return RealCycInt(self.m, self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return RealCycInt(self.m, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CycInt):
            return self.to_cyc() * other
        other = self._coerce(other)
        k = self.rho_sq
        return RealCycInt(self.m,
                          self.a * other.a + k * self.b * other.b,
                          self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            inv = self.unit_inverse()
            return inv ** (-n)
        result = RealCycInt.from_int(self.m, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def unit_inverse(self) -> "RealCycInt":
        n = self.abs_norm()
        if n == 1:
            return self.bullet()
        if n == -1:
            return -self.bullet()
        raise ZeroDivisionError("not a unit")

    def bullet(self) -> "RealCycInt":
        return RealCycInt(self.m, self.a, -self.b)

    def abs_norm(self) -> int:
        """self * self_bullet as a rational integer (a^2 for m=4)."""
        if self.m == 4:
            return self.a * self.a
        return self.a * self.a - self.rho_sq * self.b * self.b

    def divide_exact(self, other) -> "RealCycInt | None":
        """Exact quotient self/other in the ring, or None."""
        other = self._coerce(other)
        n = other.abs_norm()
        if n == 0:
            raise ZeroDivisionError
        num = self * other.bullet()
        if num.a % n or num.b % n:
            return None
        return RealCycInt(self.m, num.a // n, num.b // n)

    # -- ordering (exact, by real value) ---------------------------------
    def sign(self) -> int:
        a, b, k = self.a, self.b, self.rho_sq
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # mixed signs: compare a^2 with k*b^2
        if a * a == k * b * b:
            return 0  # impossible for k in {2,3}, kept for safety
        big_a = a * a > k * b * b
        return (1 if a > 0 else -1) if big_a else (1 if b > 0 else -1)

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other):
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other):
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other):
        return (self - self._coerce(other)).sign() >= 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    # -- embeddings -------------------------------------------------------
    def to_cyc(self) -> CycInt:
        m = self.m
        if m == 4:
            return CycInt(m, (self.a, 0))
        if m == 8:  # rho = zeta - zeta^3
            return CycInt(m, (self.a, self.b, 0, -self.b))
        return CycInt(m, (self.a, 2 * self.b, 0, -self.b))

    def eval_real(self, precision_bits: int = 128):
        """Real interval evaluation; returns (mpf value, mpf error radius)."""
        with mpmath.workprec(precision_bits + 16):
            if self.m == 4:
                return mpmath.mpf(self.a), mpmath.mpf(0)
            val = self.a + self.b * mpmath.sqrt(self.rho_sq)
            rad = (abs(self.a) + abs(self.b) + 1) * mpmath.mpf(2) ** (-precision_bits - 4)
        return val, rad

    def __repr__(self):
        if self.m == 4:
            return f"{self.a}"
        root = "sqrt2" if self.m == 8 else "sqrt3"
        return f"{self.a}{self.b:+}*{root}"


def fundamental_unit(m: int) -> RealCycInt:
    """1 + sqrt(2) for m=8, 2 + sqrt(3) for m=12."""
    if m == 8:
        return RealCycInt(8, 1, 1)
    if m == 12:
        return RealCycInt(12, 2, 1)
    raise ValueError("fundamental unit only defined for m in {8, 12}")


def rho(m: int) -> RealCycInt:
    if m not in (8, 12):
        raise ValueError("rho only defined for m in {8, 12}")
    return RealCycInt(m, 0, 1)


# ---------------------------------------------------------------------------
# Euclidean gcd
# ---------------------------------------------------------------------------

def _field_quotient_numerator(a: CycInt, b: CycInt) -> tuple[CycInt, int]:
    """Return (numerator, denominator) with a/b = numerator/denominator."""
    bc = b * b.conj()
    if a.m == 4:
        num = a * b.conj()
        den = bc.coeffs[0]
    else:
        num = a * b.conj() * bc.bullet()
        den = b.full_norm()
    return num, den


def _round_div(n: int, d: int) -> int:
    """Round n/d to the nearest integer (d > 0), ties toward +inf."""
    return (2 * n + d) // (2 * d)


def euclid_gcd(a: CycInt, b: CycInt) -> CycInt:
    """Greatest common divisor in the norm-Euclidean ring Z[zeta_m]."""
    if a.m != b.m:
        raise ValueError("mixed-ring operands")
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) undefined")
    while not b.is_zero():
        nb = abs(b.full_norm())
        num, den = _field_quotient_numerator(a, b)
        if den < 0:
            num, den = -num, -den
        base = [_round_div(c, den) for c in num.coeffs]
        d = len(base)
        # nearest rounding is almost always enough; search the unit cube
        # of roundings when needed (the rings are norm-Euclidean).
        best = a - CycInt(a.m, base) * b
        best_norm = abs(best.full_norm())
        if best_norm >= nb:
            for mask in range(1, 3 ** d):
                offs = []
                mm = mask
                for _ in range(d):
                    offs.append(mm % 3 - 1)
                    mm //= 3
                if all(o == 0 for o in offs):
                    continue
                q = CycInt(a.m, tuple(base[i] + offs[i] for i in range(d)))
                r = a - q * b
                rn = abs(r.full_norm())
                if rn < best_norm:
                    best, best_norm = r, rn
                    if rn < nb:
                        break
        if best_norm >= nb:
            raise ArithmeticError("euclidean division failed to reduce norm")
        a, b = b, best
    return a


# ---------------------------------------------------------------------------
# Parity morphism (m = 12)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParityClass:
    residue: tuple[int, int, int, int]
    orbit: str  # "O0" | "O1" | "O2" | "O3"
    n2: tuple[int, int, int, int]  # residue of the norm in Z2[omega]


def _mul_omega_mod2(r: tuple[int, ...]) -> tuple[int, ...]:
    # omega * (c0 + c1 w + c2 w^2 + c3 w^3); w^4 = w^2 - 1 == w^2 + 1 (mod 2)
    c0, c1, c2, c3 = r
    return (c3 % 2, c0 % 2, (c1 + c3) % 2, c2 % 2)


@lru_cache(maxsize=None)
def _parity_tables():
    reps = {"O0": (0, 0, 0, 0), "O1": (1, 0, 0, 0),
            "O2": (1, 1, 0, 0), "O3": (1, 0, 0, 1)}
    orbit_of = {}
    for name, rep in reps.items():
        cur = rep
        for _ in range(12):
            orbit_of[cur] = name
            cur = _mul_omega_mod2(cur)
    assert len(orbit_of) == 16
    sizes = {name: sum(1 for v in orbit_of.values() if v == name) for name in reps}
    assert sizes == {"O0": 1, "O1": 6, "O2": 6, "O3": 3}
    # N2: residue of norm_sq, constant per orbit
    n2 = {}
    for res, name in orbit_of.items():
        z = CycInt(12, res)
        nrm = tuple(c % 2 for c in z.norm_sq().to_cyc().coeffs)
        if name in n2:
            assert n2[name] == nrm
        else:
            n2[name] = nrm
    return orbit_of, n2


def parity_mu(z: CycInt) -> ParityClass:
    """Parity morphism mu: Z[omega] -> Z2[omega], with its omega-orbit (m=12)."""
    if z.m != 12:
        raise ValueError("parity morphism is defined for m=12")
    orbit_of, n2 = _parity_tables()
    res = tuple(c % 2 for c in z.coeffs)
    name = orbit_of[res]
    return ParityClass(res, name, n2[name])


# ---------------------------------------------------------------------------
# Unit adjustment
# ---------------------------------------------------------------------------

def _unit_log(u: RealCycInt) -> int:
    """Exponent k with u = v^k for the fundamental unit v (u totally positive)."""
    v = fundamental_unit(u.m)
    uval, _ = u.eval_real(128)
    vval, _ = v.eval_real(128)
    k = int(mpmath.nint(mpmath.log(uval) / mpmath.log(vval)))
    for kk in (k, k - 1, k + 1):
        if v ** kk == u:
            return kk
    raise NotAdjustable(f"unit {u!r} is not a power of the fundamental unit")


def unit_adjust(y: CycInt, target: RealCycInt) -> CycInt:
    """Rescale y by units so that norm_sq(y) == target exactly."""
    m = y.m
    nrm = y.norm_sq()
    u = nrm.divide_exact(target)
    if u is None or abs(u.abs_norm()) != 1:
        raise ValueError("norm_sq(y) is not a unit multiple of target")
    if m == 4:
        if u.a == 1:
            return y
        raise NotAdjustable("m=4: negative unit is not a Gaussian norm")
    if u.sign() <= 0 or u.bullet().sign() <= 0:
        raise NotAdjustable("unit is not totally positive")
    k = _unit_log(u)
    v = fundamental_unit(m)
    if k % 2 == 0:
        out = y * (v ** (-(k // 2))).to_cyc()
    else:
        if m == 8:
            # odd powers of 1+sqrt2 are not totally positive; unreachable here
            raise NotAdjustable("odd unit power for m=8")
        # m=12: |1+omega|^2 = 2+sqrt3 = v, so one factor of w=1+omega
        # carries half a unit.  w is itself a unit of Z[zeta_12].
        w = CycInt(12, (1, 1, 0, 0))
        out = y * (v ** (-((k + 1) // 2))).to_cyc() * w
    if out.norm_sq() != target:
        raise ArithmeticError("unit adjustment failed (bug)")
    return out
