"""Qubit Hamiltonians of two-flavor SU(3) lattice QCD with a four-Fermi decay term.

All pieces are assembled from Jordan-Wigner fermion bilinears
(:func:`latticeweak.pauli.hopping`), so the Z strings and their signs
follow from the qubit layout rather than being entered by hand.  Hermitian
conjugates are always generated programmatically.
"""
from __future__ import annotations

import math
from functools import reduce

import numpy as np

from .layout import ANTI, LatticeParams, QubitLayout, TildeCoefficients
from .pauli import OperatorSum, hopping, multiply, number_op

BETA_FORMS = ("standard", "tilde", "tilde-complete", "valence", "grouped")


def _check(p: LatticeParams, layout: QubitLayout) -> int:
    if layout.L != p.L:
        raise ValueError(f"layout covers L={layout.L} but parameters have L={p.L}")
    return layout.nqubits


def _sum(ops, n: int) -> OperatorSum:
    return reduce(lambda a, b: a + b, ops, OperatorSum.zero(n))


def _staggered_block(layout: QubitLayout, flavor: str, n: int) -> list[int]:
    if flavor in ("u", "d"):
        return [layout.staggered(flavor, n, c) for c in range(3)]
    return [layout.staggered(flavor, n)]


def _kinetic_and_mass(layout: QubitLayout, flavor: str, mass: float) -> OperatorSum:
    n = layout.nqubits
    out = OperatorSum.zero(n)
    colors = range(3) if flavor in ("u", "d") else [None]
    for c in colors:
        sites = [layout.staggered(flavor, k, c) for k in range(2 * layout.L)]
        for k in range(2 * layout.L - 1):
            out = out + 0.5 * hopping(sites[k], sites[k + 1], n).hc()
        if mass:
            for k, q in enumerate(sites):
                # odd half-sites get +m so that every basis state has non-negative mass energy
                out = out + (mass * number_op(q, n) if k % 2 == 0
                             else mass * (OperatorSum.identity(n) - number_op(q, n)))
    return out.real_part()


def build_h_quarks(p: LatticeParams, layout: QubitLayout) -> OperatorSum:
    """Staggered quark hopping (open boundaries) and shifted mass terms."""
    _check(p, layout)
    return _kinetic_and_mass(layout, "u", p.m_u) + _kinetic_and_mass(layout, "d", p.m_d)


def build_h_leptons(p: LatticeParams, layout: QubitLayout, basis: str = "standard") -> OperatorSum:
    """Free lepton Hamiltonian.

    ``basis="tilde"`` (L = 1 only) uses the modes that diagonalize the
    two-site problem: ``lambda_nu/2 (Z_nu - Z_nubar) + lambda_e/2 (Z_e - Z_ebar)``,
    where the ``nu``/``e`` qubit holds the positive-energy mode and the
    barred qubit the negative-energy mode.
    """
    n = _check(p, layout)
    if basis == "standard":
        return _kinetic_and_mass(layout, "e", p.m_e) + _kinetic_and_mass(layout, "nu", p.m_nu)
    if basis != "tilde":
        raise ValueError(f"unknown lepton basis {basis!r}")
    if p.L != 1:
        raise ValueError("the tilde lepton basis is only supported for L = 1")
    tc = TildeCoefficients.from_params(p)
    out = OperatorSum.zero(n)
    for f, lam in (("nu", tc.lambda_nu), ("e", tc.lambda_e)):
        out = out + OperatorSum.single(n, {layout.index(0, f): "Z"}, lam / 2)
        out = out + OperatorSum.single(n, {layout.index(0, ANTI[f]): "Z"}, -lam / 2)
    return out


# -- glue -------------------------------------------------------------------------

def color_charge_product(a: list[int], b: list[int], n: int) -> OperatorSum:
    """``sum_a Q^(a)_A Q^(a)_B`` for two color triplets of modes A and B.

    Uses ``sum_a T^a_ij T^a_kl = (delta_il delta_jk - delta_ij delta_kl / 3) / 2``,
    i.e. ``(1/2) sum_ij E^A_ij E^B_ji - N_A N_B / 6`` with ``E_ij = c_i^+ c_j``.
    """
    out = OperatorSum.zero(n)
    for i in range(3):
        for j in range(3):
            out = out + 0.5 * multiply(hopping(a[i], a[j], n), hopping(b[j], b[i], n))
    na = _sum((number_op(q, n) for q in a), n)
    nb = _sum((number_op(q, n) for q in b), n)
    return (out - multiply(na, nb) / 6).real_part()


def build_h_glue(p: LatticeParams, layout: QubitLayout) -> OperatorSum:
    """Chromo-electric energy in axial gauge with open boundaries.

    ``g^2/2 sum_{n=0}^{2L-2} (sum_{m<=n} Q_m)^2``, rewritten as a sum over
    pairs of half-sites weighted by ``2L - 1 - max(m, m')``.
    """
    n = _check(p, layout)
    if p.g == 0:
        return OperatorSum.zero(n)
    last = 2 * p.L - 2
    blocks = {(m, f): _staggered_block(layout, f, m) for m in range(last + 1) for f in ("u", "d")}
    cache: dict = {}
    out = OperatorSum.zero(n)
    for m in range(last + 1):
        for mp in range(last + 1):
            weight = 2 * p.L - 1 - max(m, mp)
            for f in ("u", "d"):
                for fp in ("u", "d"):
                    key = (m, f, mp, fp)
                    sym = (mp, fp, m, f)
                    if sym in cache:
                        # Q_A.Q_B = Q_B.Q_A for distinct modes (bilinears are even)
                        term = cache[sym]
                    else:
                        term = color_charge_product(blocks[(m, f)], blocks[(mp, fp)], n)
                        cache[key] = term
                    out = out + weight * term
    return (0.5 * p.g ** 2 * out).real_part()


# -- weak decay ---------------------------------------------------------------------

def _quark_bilinear(layout: QubitLayout, nu_: int, nd_: int, n: int) -> OperatorSum:
    """``sum_c phi^(u)+_{nu_} phi^(d)_{nd_}`` summed over colors."""
    return _sum((hopping(layout.staggered("u", nu_, c), layout.staggered("d", nd_, c), n)
                 for c in range(3)), n)


def _standard_beta(p: LatticeParams, layout: QubitLayout, chi_e, chi_nu) -> OperatorSum:
    """Site-local four-Fermi operator for given lepton mode operators.

    ``chi_e(k, dagger)`` / ``chi_nu(k, dagger)`` return the lepton field on
    staggered half-site ``k``.
    """
    n = layout.nqubits
    out = OperatorSum.zero(n)
    for l in range(p.L):
        a, b = 2 * l, 2 * l + 1
        same = _quark_bilinear(layout, a, a, n) + _quark_bilinear(layout, b, b, n)
        cross = _quark_bilinear(layout, a, b, n) + _quark_bilinear(layout, b, a, n)
        lep1 = multiply(chi_e(a, True), chi_nu(b, False)) - multiply(chi_e(b, True), chi_nu(a, False))
        lep2 = multiply(chi_e(a, True), chi_nu(a, False)) - multiply(chi_e(b, True), chi_nu(b, False))
        out = out + multiply(same, lep1) + multiply(cross, lep2)
    return (p.G / math.sqrt(2) * out).hc().real_part()


def _lepton_field(layout: QubitLayout, flavor: str):
    from .pauli import fermion_op
    n = layout.nqubits

    def chi(k: int, dagger: bool) -> OperatorSum:
        return fermion_op(layout.staggered(flavor, k), n, dagger)

    return chi


def tilde_rotation(mass: float) -> np.ndarray:
    """Columns are the positive- and negative-energy modes of the two-site lepton problem.

    ``chi_n = sum_k U[n, k] chi~_k`` with ``U[:, 0] ~ (1/2, lambda - m)`` and
    ``U[:, 1] ~ (-1/2, lambda + m)``.
    """
    lam = 0.5 * math.sqrt(1 + 4 * mass ** 2)
    vp = np.array([0.5, lam - mass])
    vm = np.array([-0.5, lam + mass])
    return np.column_stack([vp / np.linalg.norm(vp), vm / np.linalg.norm(vm)])


def _rotated_lepton_field(layout: QubitLayout, flavor: str, mass: float):
    from .pauli import fermion_op
    n = layout.nqubits
    U = tilde_rotation(mass)
    modes = [layout.index(0, flavor), layout.index(0, ANTI[flavor])]

    def chi(k: int, dagger: bool) -> OperatorSum:
        return _sum((U[k, j] * fermion_op(modes[j], n, dagger) for j in range(2)), n)

    return chi


def build_h_beta(p: LatticeParams, layout: QubitLayout, form: str = "standard") -> OperatorSum:
    """Four-Fermi decay operator ``d -> u e nubar`` in one of several forms.

    standard        local lepton modes, any L.
    grouped         the standard operator on the ``grouped`` layout.
    tilde           L = 1, tilde lepton modes, only the channel creating
                    an electron and an anti-neutrino from the lepton vacuum.
    tilde-complete  L = 1, the standard operator rewritten exactly in tilde
                    lepton modes (all four lepton channels).
    valence         L = 1, the tilde channel restricted to the valence
                    bilinear ``sum_c u_c^+ d_c`` on the particle half-site.
    """
    n = _check(p, layout)
    if form not in BETA_FORMS:
        raise ValueError(f"unknown beta form {form!r}; choose from {BETA_FORMS}")
    if p.G == 0:
        return OperatorSum.zero(n)
    if form == "grouped" and layout.scheme != "grouped":
        raise ValueError("form 'grouped' requires the grouped layout")
    if form in ("standard", "grouped"):
        return _standard_beta(p, layout, _lepton_field(layout, "e"), _lepton_field(layout, "nu"))
    if p.L != 1:
        raise ValueError(f"beta form {form!r} is only defined for L = 1")
    if form == "tilde-complete":
        return _standard_beta(p, layout, _rotated_lepton_field(layout, "e", p.m_e),
                              _rotated_lepton_field(layout, "nu", p.m_nu))
    # e~_0^+ nu~_1 : creates the electron mode and empties the negative neutrino mode
    lep = hopping(layout.index(0, "e"), layout.index(0, "nubar"), n)
    if form == "valence":
        quark = _quark_bilinear(layout, 0, 0, n)
    else:
        tc = TildeCoefficients.from_params(p)
        quark = (tc.same_site * (_quark_bilinear(layout, 0, 0, n) + _quark_bilinear(layout, 1, 1, n))
                 - tc.cross_site * (_quark_bilinear(layout, 0, 1, n) + _quark_bilinear(layout, 1, 0, n)))
    return (p.G / math.sqrt(2) * multiply(quark, lep)).hc().real_part()


def build_h_majorana(p: LatticeParams, layout: QubitLayout) -> OperatorSum:
    """Lepton-number violating neutrino mass ``m_M/2 sum_l (nu_{2l} nu_{2l+1} + h.c.)``."""
    from .pauli import fermion_op
    n = _check(p, layout)
    out = OperatorSum.zero(n)
    if p.m_M == 0:
        return out
    for l in range(p.L):
        a = layout.staggered("nu", 2 * l)
        b = layout.staggered("nu", 2 * l + 1)
        out = out + multiply(fermion_op(a, n, False), fermion_op(b, n, False))
    return (0.5 * p.m_M * out).hc().real_part()


def build_full(p: LatticeParams, layout: QubitLayout | None = None, *, leptons: str | None = None,
               beta: str | None = "valence", majorana: bool = False,
               pieces=("quarks", "leptons", "glue", "beta")) -> OperatorSum:
    """Sum of the selected Hamiltonian pieces.

    ``leptons`` defaults to ``tilde`` when ``beta`` is one of the L = 1 tilde
    forms and to ``standard`` otherwise.  ``beta=None`` drops the decay term.
    """
    layout = layout or QubitLayout(p.L, "grouped")
    tilde_forms = ("tilde", "tilde-complete", "valence")
    if leptons is None:
        leptons = "tilde" if beta in tilde_forms else "standard"
    if beta in tilde_forms and leptons != "tilde":
        raise ValueError(f"beta form {beta!r} needs tilde-basis leptons")
    if beta in ("standard", "grouped") and leptons != "standard":
        raise ValueError(f"beta form {beta!r} needs standard-basis leptons")
    n = _check(p, layout)
    out = OperatorSum.zero(n)
    if "quarks" in pieces:
        out = out + build_h_quarks(p, layout)
    if "leptons" in pieces:
        out = out + build_h_leptons(p, layout, leptons)
    if "glue" in pieces:
        out = out + build_h_glue(p, layout)
    if "beta" in pieces and beta is not None:
        out = out + build_h_beta(p, layout, beta)
    if majorana:
        out = out + build_h_majorana(p, layout)
    return out


# -- conserved charges ----------------------------------------------------------------

def occupation(layout: QubitLayout, species) -> OperatorSum:
    """Total mode occupation over the given species (Z-diagonal)."""
    n = layout.nqubits
    return _sum((number_op(q, n) for q in layout.qubits(species)), n)


def flavor_number(layout: QubitLayout, flavor: str) -> OperatorSum:
    """Particles minus antiparticles of one flavor (per color for quarks, summed)."""
    occ = occupation(layout, (flavor, ANTI[flavor]))
    per_site = 3 if flavor in ("u", "d") else 1
    return occ - per_site * layout.L


def baryon_number(layout: QubitLayout) -> OperatorSum:
    return (flavor_number(layout, "u") + flavor_number(layout, "d")) / 3


def lepton_number(layout: QubitLayout) -> OperatorSum:
    return flavor_number(layout, "e") + flavor_number(layout, "nu")


def electric_charge(layout: QubitLayout) -> OperatorSum:
    """Electric charge with the usual quark assignments (u: 2/3, d: -1/3, e: -1)."""
    return (2 * flavor_number(layout, "u") - flavor_number(layout, "d")) / 3 - flavor_number(layout, "e")


def multi_qubit_term_count(op: OperatorSum) -> int:
    """Number of multi-qubit interaction terms, counting ``A + A^dagger`` once.

    Strings are grouped by their support and X/Y pattern positions: the
    Pauli strings that come from one fermionic product plus its conjugate
    share the same set of flipped qubits, so terms are counted as distinct
    (support, flip-mask) pairs among strings of weight >= 2.
    """
    keys = set()
    for (x, z), _ in op.items():
        if bin(x | z).count("1") >= 2:
            keys.add((x, z if x == 0 else 0, (x | z)))
    return len(keys)
