"""Exact single-qubit synthesis over three gate bases.

An ExactUnitary is a 2x2 unitary with entries in Z[zeta_m] over a power of
nu (sqrt2 for m = 8, 12; sqrt5 for m = 4), pinned to the form

    (1/nu^L) [[z, y], [-y*, z*]] . diag(1, w^ell)

Circuits are whitespace-separated token words, leftmost token applied first.
Synthesis reduces the first column by exact divisibility arguments:
H T^j syllables (m=8), H K(k) syllables with a mod-2 parity orbit match
(m=12), or peeling one of the six V generators (m=4).  Costs are bounded by
2L, L+2 and L respectively; every call re-evaluates its output and asserts
exact equality with the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

from .errors import InternalReductionFailure, InvalidInput
from .rings import CycInt, RealCycInt, parity_mu, _mul_omega_mod2

BASIS_T = "t"
BASIS_V = "v"
BASIS_PI12 = "pi12"

_BASIS_M = {BASIS_T: 8, BASIS_V: 4, BASIS_PI12: 12}
_M_BASIS = {8: BASIS_T, 4: BASIS_V, 12: BASIS_PI12}


def _nu_sq(m: int) -> int:
    return 5 if m == 4 else 2


# ---------------------------------------------------------------------------
# exact 2x2 matrices with denominator bookkeeping


@dataclass(frozen=True)
class Mat2:
    """Matrix (1/(nu^L * sqrt2^h)) [[a, b], [c, d]] with ring entries.

    h tracks sqrt2 factors from H gates in the V basis (where nu = sqrt5);
    it stays 0 for m = 8, 12.
    """
    m: int
    a: CycInt
    b: CycInt
    c: CycInt
    d: CycInt
    L: int = 0
    h: int = 0

    @classmethod
    def identity(cls, m: int) -> "Mat2":
        one, zero = CycInt.one(m), CycInt.zero(m)
        return cls(m, one, zero, zero, one)

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.m,
                    self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
                    self.L + o.L, self.h + o.h)

    def scaled(self, s: CycInt) -> "Mat2":
        return Mat2(self.m, self.a * s, self.b * s, self.c * s, self.d * s,
                    self.L, self.h)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def is_unitary(self) -> bool:
        m = self.m
        gram_aa = self.a * self.a.conj() + self.c * self.c.conj()
        gram_bb = self.b * self.b.conj() + self.d * self.d.conj()
        gram_ab = self.a * self.b.conj() + self.c * self.d.conj()
        den = _nu_sq(m) ** self.L * 2 ** self.h if m == 4 else \
            2 ** self.L * (0 if self.h else 1)
        if m != 4 and self.h:
            raise InvalidInput("sqrt2 tracking is V-basis only")
        target = CycInt.from_int(m, den)
        return gram_aa == target and gram_bb == target and gram_ab.is_zero()


def _conj_entries(mat: Mat2) -> Mat2:
    return Mat2(mat.m, mat.a.conj(), mat.c.conj(),
                mat.b.conj(), mat.d.conj(), mat.L, mat.h)


# ---------------------------------------------------------------------------
# gate tables


def _lam(m: int, k: int) -> Mat2:
    return Mat2(m, CycInt.one(m), CycInt.zero(m), CycInt.zero(m),
                CycInt.zeta(m, k % m))


def _phase(m: int, k: int) -> Mat2:
    w = CycInt.zeta(m, k % m)
    return Mat2(m, w, CycInt.zero(m), CycInt.zero(m), w)


def _xgate(m: int) -> Mat2:
    one, zero = CycInt.one(m), CycInt.zero(m)
    return Mat2(m, zero, one, one, zero)


def _ygate(m: int) -> Mat2:
    i = CycInt.zeta(m, m // 4)
    return Mat2(m, CycInt.zero(m), -i, i, CycInt.zero(m))


def _hgate(m: int) -> Mat2:
    one = CycInt.one(m)
    return Mat2(m, one, one, one, -one, L=0 if m == 4 else 1,
                h=1 if m == 4 else 0)


_TOKEN_RE = re.compile(r"^(K|Wph|Gph)\((-?\d+)\)$")


def gate_matrix(basis: str, token: str) -> Mat2:
    m = _BASIS_M[basis]
    fixed = {"H": _hgate, "X": _xgate, "Y": _ygate}
    if token in fixed:
        return fixed[token](m)
    if token == "Z":
        return _lam(m, m // 2)
    if basis == BASIS_T:
        simple = {"T": 1, "Tdg": 7, "S": 2, "Sdg": 6}
        if token in simple:
            return _lam(8, simple[token])
    if basis == BASIS_V:
        if token == "S":
            return _lam(4, 1)
        i, one = CycInt.zeta(4), CycInt.one(4)
        two_i, two = i * 2, CycInt.from_int(4, 2)
        v_table = {
            "VX": Mat2(4, one, two_i, two_i, one, L=1),
            "VXdg": Mat2(4, one, -two_i, -two_i, one, L=1),
            "VY": Mat2(4, one, two, -two, one, L=1),
            "VYdg": Mat2(4, one, -two, two, one, L=1),
            "VZ": Mat2(4, one + two_i, CycInt.zero(4), CycInt.zero(4),
                       one - two_i, L=1),
            "VZdg": Mat2(4, one - two_i, CycInt.zero(4), CycInt.zero(4),
                         one + two_i, L=1),
        }
        if token in v_table:
            return v_table[token]
    mm = _TOKEN_RE.match(token)
    if mm:
        name, arg = mm.group(1), int(mm.group(2))
        if name == "K" and basis == BASIS_PI12 and -5 <= arg <= 6:
            return _lam(12, arg)
        if name == "Wph" and basis in (BASIS_T, BASIS_PI12) and 0 <= arg < m:
            return _phase(m, arg)
        if name == "Gph" and basis == BASIS_V and 0 <= arg < 4:
            return _phase(4, arg)
    raise InvalidInput(f"unknown token {token!r} for basis {basis!r}")


_INVERSE = {"H": "H", "X": "X", "Y": "Y", "Z": "Z",
            "T": "Tdg", "Tdg": "T", "S": "Sdg", "Sdg": "S"}


def invert_token(basis: str, token: str) -> str:
    m = _BASIS_M[basis]
    if basis == BASIS_V and token == "S":
        raise InvalidInput("S is not self-inverse; expand before inverting")
    if token in _INVERSE:
        return _INVERSE[token]
    if token.startswith("VX") or token.startswith("VY") or \
            token.startswith("VZ"):
        return token[:-2] if token.endswith("dg") else token + "dg"
    mm = _TOKEN_RE.match(token)
    if mm:
        name, arg = mm.group(1), int(mm.group(2))
        if name == "K":
            inv = (-arg) % 12
            return f"K({inv if inv <= 6 else inv - 12})"
        return f"{name}({(-arg) % m})"
    raise InvalidInput(f"cannot invert token {token!r}")


def _token_cost(basis: str, token: str) -> int:
    if basis == BASIS_T:
        return 1 if token in ("T", "Tdg") else 0
    if basis == BASIS_V:
        return 1 if token.startswith("V") else 0
    mm = _TOKEN_RE.match(token)
    if mm and mm.group(1) == "K":
        return 1 if int(mm.group(2)) % 3 != 0 else 0
    return 0


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Circuit:
    basis: str
    gates: tuple

    def __post_init__(self):
        if self.basis not in _BASIS_M:
            raise InvalidInput(f"unknown basis {self.basis!r}")
        for t in self.gates:
            gate_matrix(self.basis, t)  # validates

    @property
    def cost(self) -> int:
        return sum(_token_cost(self.basis, t) for t in self.gates)

    def to_text(self) -> str:
        return " ".join(self.gates)

    @classmethod
    def parse(cls, text: str, basis: str) -> "Circuit":
        return cls(basis, tuple(text.split()))

    def inverse(self) -> "Circuit":
        return Circuit(self.basis,
                       tuple(invert_token(self.basis, t)
                             for t in reversed(self.gates)))

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.basis != self.basis:
            raise InvalidInput("cannot concatenate circuits of mixed bases")
        return Circuit(self.basis, self.gates + other.gates)


def circuit_matrix(c: Circuit) -> Mat2:
    m = _BASIS_M[c.basis]
    acc = Mat2.identity(m)
    for t in c.gates:  # leftmost applied first => left-multiply in order
        acc = gate_matrix(c.basis, t) @ acc
    return acc


# ---------------------------------------------------------------------------
# the pinned unitary form


@dataclass(frozen=True)
class ExactUnitary:
    m: int
    z: CycInt
    y: CycInt
    L: int
    ell: int = 0

    def __post_init__(self):
        m = self.m
        target = RealCycInt(m, _nu_sq(m) ** self.L, 0) if m == 4 else \
            RealCycInt.from_int(m, 2 ** self.L)
        if self.z.norm_sq() + self.y.norm_sq() != target:
            raise InvalidInput("columns do not normalize to nu^{2L}")

    @property
    def nu(self) -> str:
        return "sqrt5" if self.m == 4 else "sqrt2"

    @classmethod
    def identity(cls, m: int) -> "ExactUnitary":
        return cls(m, CycInt.one(m), CycInt.zero(m), 0, 0)

    def to_matrix(self) -> Mat2:
        w = CycInt.zeta(self.m, self.ell % self.m)
        return Mat2(self.m, self.z, self.y * w,
                    -self.y.conj(), self.z.conj() * w, self.L)

    @classmethod
    def from_matrix(cls, mat: Mat2) -> "ExactUnitary":
        m = mat.m
        if mat.h:
            if m != 4:
                raise InvalidInput("sqrt2 tracking is V-basis only")
            if mat.h % 2:
                raise InvalidInput(
                    "odd sqrt2 power: matrix is not over Z[i]/sqrt5^L")
            a, b, c, d, h = mat.a, mat.b, mat.c, mat.d, mat.h
            while h:
                nxt = [e.divide_exact(CycInt.from_int(4, 2)) for e in
                       (a, b, c, d)]
                if any(e is None for e in nxt):
                    raise InvalidInput(
                        "sqrt2 factors do not cancel: not a sqrt5-unitary")
                a, b, c, d = nxt
                h -= 2
            mat = Mat2(4, a, b, c, d, mat.L, 0)
        if not mat.is_unitary():
            raise InvalidInput("matrix is not unitary at its stated scale")
        z, y = mat.a, -mat.c.conj()
        for ell in range(m):
            w = CycInt.zeta(m, ell)
            if mat.b == y * w and mat.d == z.conj() * w:
                return cls(m, z, y, mat.L, ell)
        raise InvalidInput("unitary does not match the pinned form (bug)")

    def equal_up_to_phase(self, other: "ExactUnitary") -> bool:
        """True if self == w^j . other for some j."""
        if self.m != other.m:
            return False
        m1, m2 = self.to_matrix(), other.to_matrix()
        if (m1.L - m2.L) % 2:
            return False
        if m1.L > m2.L:
            m2 = m2.scaled(CycInt.from_int(self.m,
                                           _nu_sq(self.m) ** ((m1.L - m2.L) // 2)))
        elif m2.L > m1.L:
            m1 = m1.scaled(CycInt.from_int(self.m,
                                           _nu_sq(self.m) ** ((m2.L - m1.L) // 2)))
        for j in range(self.m):
            w = CycInt.zeta(self.m, j)
            if all(e1 == e2 * w for e1, e2 in zip(m1.entries(), m2.entries())):
                return True
        return False


def eval_circuit(c: Circuit) -> ExactUnitary:
    return ExactUnitary.from_matrix(circuit_matrix(c))


# ---------------------------------------------------------------------------
# column reduction, m = 8


@lru_cache(maxsize=None)
def _sqrt2_cyc() -> CycInt:
    return CycInt(8, (0, 1, 0, -1))


def _val_rho(x: RealCycInt) -> int:
    if x.is_zero():
        return 1 << 30
    rho = RealCycInt(8, 0, 1)
    v = 0
    while True:
        q = x.divide_exact(rho)
        if q is None:
            return v
        x, v = q, v + 1


def _strip_sqrt2(top: CycInt, bot: CycInt, L: int):
    s2 = _sqrt2_cyc()
    while L > 0:
        t2, b2 = top.divide_exact(s2), bot.divide_exact(s2)
        if t2 is None or b2 is None:
            break
        top, bot, L = t2, b2, L - 1
    return top, bot, L


def _reduce_column_t(top: CycInt, bot: CycInt, L: int):
    """Gate tokens (application order) mapping the column to (1, 0)."""
    ops = []
    top, bot, L = _strip_sqrt2(top, bot, L)
    guard = 8 * L + 16
    while L > 0:
        guard -= 1
        if guard < 0:
            raise InternalReductionFailure("T-basis reduction stalled")
        pot = (L, 2 * L - min(_val_rho(top.norm_sq()), 2 * L))
        best = None
        for j in (0, 2, 1, 3):  # cost-free syllables first
            wj = CycInt.zeta(8, j)
            t2, b2, L2 = _strip_sqrt2(top + wj * bot, top - wj * bot, L + 1)
            key = (L2, 2 * L2 - min(_val_rho(t2.norm_sq()), 2 * L2))
            if best is None or key < best[0]:
                best = (key, j, t2, b2, L2)
        key, j, top, bot, L = best
        if key >= pot:
            raise InternalReductionFailure("no reducing syllable (m=8)")
        # ops apply T^j (diag(1, w^j)) then H to the column
        if j == 1:
            ops.append("T")
        elif j == 2:
            ops.append("S")
        elif j == 3:
            ops.append("S")
            ops.append("T")
        ops.append("H")
    if top.is_zero():
        ops.append("X")
        top, bot = bot, top
    # top is now a unit w^a
    for a in range(8):
        if top == CycInt.zeta(8, a):
            if a:
                ops.append(f"Wph({(-a) % 8})")
            break
    else:
        raise InternalReductionFailure("terminal column not monomial (m=8)")
    if not bot.is_zero():
        raise InternalReductionFailure("terminal column not (1,0) (m=8)")
    return ops


# ---------------------------------------------------------------------------
# column reduction, m = 12

# (S H)^3 = (1+i)/sqrt2 . I exactly; used to clear half-integer phases
PHI_WORD = ("H", "K(3)", "H", "K(3)", "H", "K(3)")


def _k_token(k: int) -> str:
    k %= 12
    return f"K({k if k <= 6 else k - 12})"


def _orbit_shift(target, source) -> int:
    """k with target = w^k . source in Z2[w], or -1."""
    r = source
    for k in range(12):
        if r == target:
            return k
        r = _mul_omega_mod2(r)
    return -1


def _reduce_column_pi12(top: CycInt, bot: CycInt, L: int):
    """Tokens (application order) mapping the column exactly to (1, 0)."""
    ops = []
    one_i = CycInt(12, (1, 0, 0, 1))  # 1 + i
    two = CycInt.from_int(12, 2)
    t_phi = 0  # accumulated (1+i)/sqrt2 global phases from odd strips
    guard = 4 * L + 16
    while L > 0:
        guard -= 1
        if guard < 0:
            raise InternalReductionFailure("pi/12 reduction stalled")
        t2, b2 = top.divide_exact(two), bot.divide_exact(two)
        if t2 is not None and b2 is not None and L >= 2:
            top, bot, L = t2, b2, L - 2
            continue
        ti, bi = top.divide_exact(one_i), bot.divide_exact(one_i)
        if ti is not None and bi is not None:
            top, bot, L, t_phi = ti, bi, L - 1, t_phi + 1
            continue
        pt, pb = parity_mu(top), parity_mu(bot)
        if pt.orbit != pb.orbit:
            raise InternalReductionFailure(
                f"unmatched parity orbits ({pt.orbit},{pb.orbit}) at L={L}")
        k = _orbit_shift(pt.residue, pb.residue)
        if k < 0:
            raise InternalReductionFailure("no orbit shift found (m=12)")
        wk = CycInt.zeta(12, k)
        ntop, nbot = top + wk * bot, top - wk * bot
        t2, b2 = ntop.divide_exact(two), nbot.divide_exact(two)
        if t2 is None or b2 is None:
            raise InternalReductionFailure("syllable failed to divide (m=12)")
        ops.append(_k_token(k))
        ops.append("H")
        top, bot, L = t2, b2, L - 1
    if top.is_zero():
        ops.append("X")
        top, bot = bot, top
    if not bot.is_zero():
        raise InternalReductionFailure("terminal column not monomial (m=12)")
    for a in range(12):
        if top == CycInt.zeta(12, a):
            break
    else:
        raise InternalReductionFailure("terminal entry not a unit (m=12)")
    if t_phi % 2:
        ops.extend(PHI_WORD)
        t_phi += 1
    # residual global phase is i^{t_phi/2} w^a = w^{3 t_phi/2 + a}
    j = (3 * (t_phi // 2) + a) % 12
    if j:
        ops.append(f"Wph({(-j) % 12})")
    return ops


def reduce_column_pi12(z: CycInt, y: CycInt, L: int) -> Circuit:
    """A circuit c with c . (z, y)^T / sqrt2^L = (1, 0)^T exactly."""
    return Circuit(BASIS_PI12, tuple(_reduce_column_pi12(z, y, L)))


# ---------------------------------------------------------------------------
# column reduction, m = 4

_V_TOKENS = ("VX", "VXdg", "VY", "VYdg", "VZ", "VZdg")


def _reduce_column_v(top: CycInt, bot: CycInt, L: int):
    ops = []
    five = CycInt.from_int(4, 5)
    guard = 2 * L + 16
    while L > 0:
        guard -= 1
        if guard < 0:
            raise InternalReductionFailure("V-basis reduction stalled")
        t5, b5 = top.divide_exact(five), bot.divide_exact(five)
        if t5 is not None and b5 is not None and L >= 2:
            top, bot, L = t5, b5, L - 2
            continue
        for tok in _V_TOKENS:
            g = gate_matrix(BASIS_V, tok)
            nt = g.a * top + g.b * bot
            nb = g.c * top + g.d * bot
            t5, b5 = nt.divide_exact(five), nb.divide_exact(five)
            if t5 is not None and b5 is not None:
                ops.append(tok)
                top, bot, L = t5, b5, L - 1
                break
        else:
            raise InternalReductionFailure("no V generator divides (m=4)")
    if top.is_zero():
        ops.append("X")
        top, bot = bot, top
    if not bot.is_zero():
        raise InternalReductionFailure("terminal column not monomial (m=4)")
    for a in range(4):
        if top == CycInt.zeta(4, a):
            if a:
                ops.append(f"Gph({(-a) % 4})")
            break
    else:
        raise InternalReductionFailure("terminal entry not a unit (m=4)")
    return ops


# ---------------------------------------------------------------------------
# full synthesis


def _mat_equal(m1: Mat2, m2: Mat2) -> bool:
    if m1.m != m2.m or m1.h != m2.h:
        return False
    mm = m1.m
    if (m1.L - m2.L) % 2:
        if mm != 8:
            return False
        # sqrt2 lies in Z[zeta_8]; rescale by one factor
        if m1.L > m2.L:
            m2 = m2.scaled(_sqrt2_cyc())
            m2 = Mat2(8, m2.a, m2.b, m2.c, m2.d, m2.L + 1, 0)
        else:
            m1 = m1.scaled(_sqrt2_cyc())
            m1 = Mat2(8, m1.a, m1.b, m1.c, m1.d, m1.L + 1, 0)
    if m1.L != m2.L:
        step = _nu_sq(mm)
        if m1.L > m2.L:
            m2 = m2.scaled(CycInt.from_int(mm, step ** ((m1.L - m2.L) // 2)))
        else:
            m1 = m1.scaled(CycInt.from_int(mm, step ** ((m2.L - m1.L) // 2)))
    return all(e1 == e2 for e1, e2 in zip(m1.entries(), m2.entries()))


def _lam_tokens(basis: str, ell: int):
    if basis == BASIS_PI12:
        return [] if ell % 12 == 0 else [_k_token(ell)]
    if basis == BASIS_T:
        table = {0: [], 1: ["T"], 2: ["S"], 3: ["S", "T"], 4: ["Z"],
                 5: ["Z", "T"], 6: ["Sdg"], 7: ["Tdg"]}
        return table[ell % 8]
    table = {0: [], 1: ["S"], 2: ["Z"], 3: ["S", "Z"]}
    return table[ell % 4]


def _synth(u: ExactUnitary, basis: str, reducer) -> Circuit:
    mat = u.to_matrix()
    ops = reducer(mat.a, mat.c, mat.L)
    inv_ops = tuple(invert_token(basis, t) for t in reversed(ops))
    m = u.m
    for ell in range(m):
        cand = Circuit(basis, tuple(_lam_tokens(basis, ell)) + inv_ops)
        if _mat_equal(circuit_matrix(cand), mat):
            return cand
    raise InternalReductionFailure("no diagonal phase matches (bug)")


def synth_t(u: ExactUnitary) -> Circuit:
    if u.m != 8:
        raise InvalidInput("synth_t expects the m=8 ring")
    c = _synth(u, BASIS_T, _reduce_column_t)
    assert c.cost <= max(2 * u.L, 1)
    return c


def synth_pi12(u: ExactUnitary) -> Circuit:
    if u.m != 12:
        raise InvalidInput("synth_pi12 expects the m=12 ring")
    c = _synth(u, BASIS_PI12, _reduce_column_pi12)
    assert c.cost <= u.L + 2
    return c


def synth_v(u: ExactUnitary) -> Circuit:
    if u.m != 4:
        raise InvalidInput("synth_v expects the m=4 ring")
    c = _synth(u, BASIS_V, _reduce_column_v)
    assert c.cost <= max(u.L, 0)
    return c


def synth(u: ExactUnitary) -> Circuit:
    return {8: synth_t, 12: synth_pi12, 4: synth_v}[u.m](u)
