import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticeweak.layout import SPECIES, LatticeParams, QubitLayout, TildeCoefficients, preset


def test_grouped_l1_register():
    lay = QubitLayout(1, "grouped")
    assert [lay.index(0, "u", c) for c in range(3)] == [0, 1, 2]
    assert [lay.index(0, "d", c) for c in "rgb"] == [3, 4, 5]
    assert [lay.index(0, "ubar", c) for c in range(3)] == [6, 7, 8]
    assert [lay.index(0, "dbar", c) for c in range(3)] == [9, 10, 11]
    assert [lay.index(0, s) for s in ("nu", "e", "nubar", "ebar")] == [12, 13, 14, 15]
    assert lay.nqubits == 16


@given(st.integers(1, 4), st.sampled_from(["grouped", "interleaved"]))
def test_layout_is_a_bijection(L, scheme):
    lay = QubitLayout(L, scheme)
    qubits = [q for s in SPECIES for q in lay.qubits(s)]
    assert sorted(qubits) == list(range(16 * L))
    anti = set(lay.qubits(("ubar", "dbar", "nubar", "ebar")))
    for q in range(16 * L):
        assert lay.is_antiparticle_slot(q) == (q in anti)


@given(st.integers(1, 3))
def test_relabel_permutation(L):
    a, b = QubitLayout(L, "grouped"), QubitLayout(L, "interleaved")
    perm = a.relabel_to(b)
    assert sorted(perm) == list(range(16 * L))
    for q in range(16 * L):
        assert a.label(q) == b.label(perm[q])


def test_staggered_slots():
    lay = QubitLayout(2, "interleaved")
    assert lay.staggered("u", 0, 1) == lay.index(0, "u", 1)
    assert lay.staggered("u", 3, 1) == lay.index(1, "ubar", 1)
    with pytest.raises(IndexError):
        lay.staggered("u", 4, 0)


def test_layout_errors():
    with pytest.raises(ValueError):
        QubitLayout(1, "diagonal")
    with pytest.raises(ValueError):
        QubitLayout(1).index(0, "u")
    with pytest.raises(IndexError):
        QubitLayout(1).index(1, "e")


def test_preset_and_params():
    p = preset()
    assert (p.L, p.m_u, p.m_d, p.m_e, p.m_nu, p.g, p.G) == (1, 0.9, 2.1, 0.0, 0.0, 2.0, 0.5)
    assert LatticeParams.from_dict(p.to_dict()) == p
    assert p.with_(G=0).G == 0
    with pytest.raises(ValueError):
        preset("nonexistent")
    with pytest.raises(ValueError):
        LatticeParams.from_dict({"m_top": 1.0})
    with pytest.raises(ValueError):
        LatticeParams(L=0)
    with pytest.raises(ValueError):
        LatticeParams(g=float("inf"))


def test_tilde_coefficients_massless():
    tc = TildeCoefficients.from_params(preset())
    assert tc.lambda_e == tc.lambda_nu == 0.5
    assert tc.same_site == pytest.approx(1.0)
    assert tc.cross_site == pytest.approx(1.0)


def test_tilde_lambda_massive():
    tc = TildeCoefficients.from_params(preset().with_(m_e=0.75))
    assert tc.lambda_e == pytest.approx(0.9014, abs=1e-4)
