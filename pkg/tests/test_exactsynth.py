import math
import random

import mpmath
import pytest

from pqfsynth.exactsynth import (BASIS_PI12, BASIS_T, BASIS_V, Circuit,
                                 ExactUnitary, eval_circuit, synth)
from pqfsynth.rings import CycInt

TOKENS = {
    BASIS_T: ["H", "T", "Tdg", "S", "Sdg", "Z", "X", "Y"],
    BASIS_PI12: ["H", "Z", "X", "Y", "K(1)", "K(2)", "K(3)", "K(4)", "K(5)"],
    # standalone H leaves sqrt2 denominators outside Z[i]; random V-basis
    # words therefore use H only inside Pauli conjugations like "H X H"
    BASIS_V: ["S", "Z", "X", "Y", "VX", "VXdg", "VY", "VYdg", "VZ", "VZdg",
              "H X H", "H VZ H"],
}
M_OF = {BASIS_T: 8, BASIS_PI12: 12, BASIS_V: 4}


def random_word(basis, rng, n=16):
    toks = [rng.choice(TOKENS[basis]) for _ in range(n)]
    return Circuit.parse(" ".join(toks), basis)


NU_SQ = {4: 5, 8: 2, 12: 2}


def to_numeric(u: ExactUnitary):
    mat = u.to_matrix()
    with mpmath.workprec(256):
        den = mpmath.sqrt(NU_SQ[mat.m]) ** mat.L * mpmath.sqrt(2) ** mat.h
        a, b, c, d = (e.eval_complex(256)[0] / den for e in mat.entries())
        return [[a, b], [c, d]]


def mats_close(a, b, tol=1e-40):
    with mpmath.workprec(256):
        return all(abs(a[i][j] - b[i][j]) < tol
                   for i in range(2) for j in range(2))


def test_parse_roundtrip():
    c = Circuit.parse("H  T\nH S T", BASIS_T)
    assert c.to_text() == "H T H S T"
    assert c.cost == 2


def test_parse_rejects_foreign_tokens():
    with pytest.raises(Exception):
        Circuit.parse("H VX", BASIS_T)
    with pytest.raises(Exception):
        Circuit.parse("T", BASIS_V)


def test_cost_counts_only_expensive_gates():
    assert Circuit.parse("H S Z X Y", BASIS_T).cost == 0
    assert Circuit.parse("T Tdg T", BASIS_T).cost == 3
    assert Circuit.parse("K(3) K(6) K(1) K(2)", BASIS_PI12).cost == 2
    assert Circuit.parse("VX VYdg H S VZ", BASIS_V).cost == 3


@pytest.mark.parametrize("basis", [BASIS_T, BASIS_PI12, BASIS_V])
def test_circuit_inverse(basis):
    rng = random.Random(3)
    c = random_word(basis, rng)
    if basis == BASIS_V:
        # S has no direct inverse token in this alphabet
        c = Circuit.parse(c.to_text().replace("S", "Z"), basis)
    u = eval_circuit(c + c.inverse())
    ident = ExactUnitary.identity(u.m)
    assert u.equal_up_to_phase(ident)


@pytest.mark.parametrize("basis", [BASIS_T, BASIS_PI12, BASIS_V])
def test_eval_circuit_is_unitary(basis):
    rng = random.Random(11)
    for _ in range(5):
        u = eval_circuit(random_word(basis, rng))
        mat = to_numeric(u)
        with mpmath.workprec(256):
            prod = [[sum(mat[k][i].conjugate() * mat[k][j] for k in range(2))
                     for j in range(2)] for i in range(2)]
            assert abs(prod[0][0] - 1) < 1e-40 and abs(prod[1][1] - 1) < 1e-40
            assert abs(prod[0][1]) < 1e-40


@pytest.mark.parametrize("basis", [BASIS_T, BASIS_PI12, BASIS_V])
def test_synth_roundtrip_and_cost_bounds(basis):
    rng = random.Random(5)
    for _ in range(25):
        u = eval_circuit(random_word(basis, rng, n=20))
        c = synth(u)
        assert c.basis == basis
        u2 = eval_circuit(c)
        assert mats_close(to_numeric(u), to_numeric(u2))
        # count bounds relative to the denominator exponent
        if basis == BASIS_T:
            assert c.cost <= max(2 * u.L, 1)
        elif basis == BASIS_PI12:
            assert c.cost <= u.L + 2
        else:
            assert c.cost <= max(u.L, 0)


def test_synth_identity_costs_nothing_expensive():
    for m in (4, 8, 12):
        c = synth(ExactUnitary.identity(m))
        assert c.cost <= 1


def test_leftmost_token_applies_first():
    # X then H: matrix is H @ X
    u = eval_circuit(Circuit.parse("X H", BASIS_T))
    mat = to_numeric(u)
    with mpmath.workprec(256):
        r = 1 / mpmath.sqrt(2)
        # H @ X = [[r, r], [-r, r]] row-wise sign convention: H X |0> = H|1>
        col0 = (mat[0][0], mat[1][0])
        assert abs(col0[0] - r) < 1e-30 and abs(abs(col0[1]) - r) < 1e-30


def test_determinism_of_synth():
    rng = random.Random(9)
    u = eval_circuit(random_word(BASIS_T, rng))
    assert synth(u).to_text() == synth(u).to_text()


@pytest.mark.parametrize("basis", [BASIS_T, BASIS_PI12, BASIS_V])
def test_text_roundtrip_through_parser(basis):
    rng = random.Random(21)
    u = eval_circuit(random_word(basis, rng))
    c = synth(u)
    c2 = Circuit.parse(c.to_text(), basis)
    assert c2 == c
    assert eval_circuit(c2).equal_up_to_phase(u)
