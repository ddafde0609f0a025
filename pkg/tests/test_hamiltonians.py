import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import golden_l1 as gold
from latticeweak.hamiltonians import (BETA_FORMS, baryon_number, build_full, build_h_beta, build_h_glue,
                                      build_h_leptons, build_h_majorana, build_h_quarks, electric_charge,
                                      lepton_number, multi_qubit_term_count)
from latticeweak.layout import QubitLayout, TildeCoefficients, preset
from latticeweak.pauli import OperatorSum, commutator, dense_matrix, multiply
from latticeweak.spectra import SectorSpec, build_sector, diagonalize

masses = st.floats(0, 3, allow_nan=False)
LEPTONS = {12: 0, 13: 1, 14: 2, 15: 3}


def coefficient_of(H: OperatorSum, pattern: OperatorSum) -> complex:
    """Common ratio of H's coefficients to those of ``pattern`` on its strings."""
    coeffs = dict(H.items())
    vals = np.array([coeffs.get(k, 0) / v for k, v in pattern.items()])
    assert np.allclose(vals, vals[0]), vals
    return vals[0]


def lepton_block(op: OperatorSum) -> OperatorSum:
    mapping = {q: LEPTONS.get(q, q) for q in range(op.nqubits)}
    for (x, z), _ in op.items():
        assert (x | z) >> 12 << 12 == (x | z), "operator must act on lepton qubits only"
    return op.permute(mapping, 4)


def charge_sector(layout, B, Lq, Q):
    sec = SectorSpec(layout.nqubits).add("B", baryon_number(layout), B)
    sec.add("L", lepton_number(layout), Lq).add("Q", electric_charge(layout), Q)
    return sec


# -- oracle comparisons --------------------------------------------------------------

@given(masses, masses)
def test_quarks_matches_hand_expansion(mu, md):
    p = preset().with_(m_u=mu, m_d=md)
    # builders prune terms under 1e-12 one by one, so a few such terms may be missing
    assert build_h_quarks(p, QubitLayout(1)).close_to(gold.quarks(mu, md), 1e-10)


@given(masses, masses)
def test_tilde_leptons_matches_hand_expansion(me, mnu):
    p = preset().with_(m_e=me, m_nu=mnu)
    assert build_h_leptons(p, QubitLayout(1), "tilde").close_to(gold.leptons(me, mnu), 1e-10)


@given(st.floats(0, 3))
def test_glue_matches_hand_expansion(g):
    H = build_h_glue(preset().with_(g=g), QubitLayout(1))
    assert H.close_to(gold.glue(g), 1e-12)


@given(st.floats(-2, 2), masses, masses)
def test_tilde_beta_matches_hand_expansion(G, me, mnu):
    p = preset().with_(G=G, m_e=me, m_nu=mnu)
    tc = TildeCoefficients.from_params(p)
    lay = QubitLayout(1)
    assert build_h_beta(p, lay, "tilde").close_to(gold.beta_tilde(G, tc.same_site, tc.cross_site), 1e-12)
    assert build_h_beta(p, lay, "valence").close_to(gold.beta_tilde(G, 1.0, 0.0, valence_only=True), 1e-12)


def test_mass_term_coefficient(params, layout):
    H = build_h_quarks(params, layout)
    assert H.coefficient("Z".rjust(16, "I")) == pytest.approx(0.45)


def test_massless_quarks_have_only_hopping():
    H = build_h_quarks(preset().with_(m_u=0, m_d=0), QubitLayout(1))
    assert all(bin(x).count("1") == 2 for (x, z), _ in H.items())


def test_hopping_term_with_five_z(params, layout):
    hop = gold.product(("+", 6), *gold.zs(5, 4, 3, 2, 1), ("-", 0))
    assert coefficient_of(build_h_quarks(params, layout), hop.hc()) == pytest.approx(-0.5)
    for (x, z), _ in hop.items():
        assert bin(z & ~x).count("1") == 5


def test_glue_six_qubit_term(params, layout):
    term = gold.product(("+", 5), ("Z", 4), ("-", 3), ("-", 2), ("Z", 1), ("+", 0))
    assert coefficient_of(build_h_glue(params, layout), term.hc()) == pytest.approx(params.g ** 2 / 2)


def test_glue_constant_and_zero_coupling(params, layout):
    H = build_h_glue(params, layout)
    six = OperatorSum(6, {k: v for k, v in H.items() if (k[0] | k[1]) < 64})
    assert dense_matrix(six)[0, 0].real == pytest.approx(H.constant().real + sum(
        v.real for (x, z), v in H.items() if x == 0 and z and z < 64))
    assert H.constant().real == pytest.approx(2 * params.g ** 2 / 2)
    assert len(build_h_glue(params.with_(g=0), layout)) == 0


def test_tilde_beta_nine_qubit_cross_term(params, layout):
    H = build_h_beta(params, layout, "tilde")
    assert any(x & 0x3FF == (1 << 9) | 1 and (z & 0x1FE) == 0x1FE for (x, z), _ in H.items())


def test_valence_beta_structure(params, layout):
    H = build_h_beta(params, layout, "valence")
    supports = {x for (x, z), _ in H.items()}
    assert supports == {(1 << c) | (1 << (3 + c)) | (1 << 13) | (1 << 14) for c in range(3)}
    assert multi_qubit_term_count(H) == 3
    # G/sqrt2 on sigma+ sigma- sigma- sigma+ gives G/sqrt2/16 on each of its Pauli strings
    assert max(abs(v) for _, v in H.items()) == pytest.approx(params.G / math.sqrt(2) / 8)


def test_beta_form_errors(params, layout):
    with pytest.raises(ValueError):
        build_h_beta(params, layout, "bogus")
    with pytest.raises(ValueError):
        build_h_beta(params.with_(L=2), QubitLayout(2), "tilde")
    with pytest.raises(ValueError):
        build_full(params, layout, beta="valence", leptons="standard")
    with pytest.raises(ValueError):
        build_h_leptons(params.with_(L=2), QubitLayout(2), "tilde")
    assert len(build_h_beta(params.with_(G=0), layout, "tilde")) == 0


def test_lepton_single_particle_energies():
    p = preset().with_(m_e=0.75)
    lay = QubitLayout(1)
    std = dense_matrix(lepton_block(build_h_leptons(p, lay, "standard")))
    til = dense_matrix(lepton_block(build_h_leptons(p, lay, "tilde")))
    a, b = np.linalg.eigvalsh(std), np.linalg.eigvalsh(til)
    # the two bases differ by a constant energy shift only
    assert np.allclose(a - a[0], b - b[0], atol=1e-10)
    lam = 0.5 * math.sqrt(1 + 4 * 0.75 ** 2)
    # exciting the electron pair costs 2 lambda_e above the lepton vacuum
    gaps = b - b[0]
    assert np.min(np.abs(gaps - 2 * lam)) < 1e-10
    assert np.min(np.abs(gaps - lam)) < 1e-10


# -- symmetries ----------------------------------------------------------------------

@pytest.mark.parametrize("form", BETA_FORMS)
def test_builders_hermitian_and_conserving(form, params):
    lay = QubitLayout(1)
    H = build_full(params, lay, beta=form)
    assert H.is_hermitian()
    for charge in (baryon_number(lay), lepton_number(lay), electric_charge(lay)):
        assert len(commutator(H, charge)) == 0


@pytest.mark.parametrize("scheme", ["grouped", "interleaved"])
def test_conservation_at_l2(scheme):
    p = preset().with_(L=2)
    lay = QubitLayout(2, scheme)
    H = build_full(p, lay, beta="standard")
    assert H.is_hermitian()
    assert len(commutator(H, baryon_number(lay))) == 0
    assert len(commutator(H, lepton_number(lay))) == 0


def test_g0_commutes_with_lepton_z(params, layout):
    H = build_full(params.with_(G=0), layout, beta="tilde")
    for q in range(12, 16):
        assert len(commutator(H, OperatorSum.single(16, {q: "Z"}))) == 0


def test_total_sz_conserved(params, layout):
    sz = sum((OperatorSum.single(16, {q: "Z"}) for q in range(16)), OperatorSum.zero(16))
    for form in ("tilde", "valence", "standard"):
        assert len(commutator(build_full(params, layout, beta=form), sz)) == 0


def test_majorana_term():
    p = preset().with_(m_M=0.3)
    lay = QubitLayout(1)
    Hm = build_h_majorana(p, lay)
    assert Hm.is_hermitian()
    assert multi_qubit_term_count(Hm) == 1
    assert len(build_h_majorana(p.with_(m_M=0), lay)) == 0
    L = lepton_number(lay)
    assert len(commutator(Hm, L)) > 0
    M = dense_matrix(lepton_block(Hm))
    Ld = np.diag(dense_matrix(lepton_block(L - L.constant() * OperatorSum.identity(16)))).real
    Ld = Ld + L.constant().real
    rows, cols = np.nonzero(np.abs(M) > 1e-12)
    assert len(rows)
    assert set(np.round(Ld[rows] - Ld[cols]).astype(int)) <= {-2, 2}


# -- spectral equivalences -----------------------------------------------------------

def _sector_spectrum(H, layout, B=1, Lq=0, Q=-1):
    sec = build_sector(H, charge_sector(layout, B, Lq, Q))
    return diagonalize(H, sec)[0]


def test_standard_and_tilde_bases_equivalent(params):
    lay = QubitLayout(1)
    std = build_full(params, lay, beta="standard")
    til = build_full(params, lay, beta="tilde-complete")
    a, b = _sector_spectrum(std, lay), _sector_spectrum(til, lay)
    assert len(a) == len(b)
    assert np.max(np.abs(a - b)) < 1e-10


def test_grouped_and_interleaved_equivalent(params):
    g, i = QubitLayout(1, "grouped"), QubitLayout(1, "interleaved")
    a = _sector_spectrum(build_full(params, g, beta="standard"), g)
    b = _sector_spectrum(build_full(params, i, beta="standard"), i)
    assert np.max(np.abs(a - b)) < 1e-10


def test_grouped_relabeling_is_a_permutation(params):
    g, i = QubitLayout(1, "grouped"), QubitLayout(1, "interleaved")
    Hg = build_full(params, g, beta="standard", pieces=("quarks", "leptons", "glue"))
    Hi = build_full(params, i, beta="standard", pieces=("quarks", "leptons", "glue"))
    # diagonal parts map string-for-string under the relabeling
    diag_g = OperatorSum(16, {k: v for k, v in Hg.items() if k[0] == 0}).permute(g.relabel_to(i))
    diag_i = OperatorSum(16, {k: v for k, v in Hi.items() if k[0] == 0})
    assert diag_g.close_to(diag_i, 1e-12)
