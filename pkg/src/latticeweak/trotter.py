"""Ordered Trotter term lists for the single-site decay simulation.

The order of the exponentials inside one Trotter step is part of the
result (finite-step decay probabilities depend on it), so it is kept here
as a named, versioned constant shared by the circuit compiler and the
operator-level reference product.
"""
from __future__ import annotations

from dataclasses import dataclass

from .hamiltonians import build_h_leptons, color_charge_product
from .layout import LatticeParams, QubitLayout
from .pauli import OperatorSum, hopping, multiply, number_op

# v2: hopping (u then d, r g b) -> single-Z terms (masses, leptons, glue) ->
#     glue exchange (rg, rb, gb), each group carrying the glue ZZ strings on
#     its own four qubits -> valence decay (r g b), decay last.
TROTTER_ORDER_VERSION = "v2"
STRONG_ORDER = ("hop:u0", "hop:u1", "hop:u2", "hop:d0", "hop:d1", "hop:d2", "diag",
                "exch:01", "exch:02", "exch:12")
BETA_ORDER = ("beta:0", "beta:1", "beta:2")


@dataclass(frozen=True)
class TrotterTerm:
    name: str
    op: OperatorSum


def _check_l1(p: LatticeParams, layout: QubitLayout):
    if p.L != 1 or layout.L != 1:
        raise ValueError("the Trotter term lists are defined for L = 1")


def strong_terms(p: LatticeParams, layout: QubitLayout) -> list[TrotterTerm]:
    """Strong + free-lepton Hamiltonian split into groups of commuting strings.

    Each group's Pauli strings commute among themselves, so every group
    exponential is exact; only the order between groups is a Trotter choice.
    """
    _check_l1(p, layout)
    n = layout.nqubits
    one = OperatorSum.identity(n)
    terms = {}
    diag = build_h_leptons(p, layout, "tilde")
    for f, m in (("u", p.m_u), ("d", p.m_d)):
        for c in range(3):
            diag = diag + m * number_op(layout.staggered(f, 0, c), n)
            diag = diag + m * (one - number_op(layout.staggered(f, 1, c), n))
            terms[f"hop:{f}{c}"] = 0.5 * hopping(layout.staggered(f, 0, c), layout.staggered(f, 1, c), n).hc()
    blocks = {f: [layout.staggered(f, 0, c) for c in range(3)] for f in ("u", "d")}
    glue = OperatorSum.zero(n)
    for f in ("u", "d"):
        for fp in ("u", "d"):
            glue = glue + color_charge_product(blocks[f], blocks[fp], n)
    glue = 0.5 * p.g ** 2 * glue
    exch = {}
    for (x, z), v in glue.items():
        if x == 0:
            diag = diag + OperatorSum(n, {(x, z): v})
            continue
        cols = tuple(c for c in range(3) if (x >> blocks["u"][c]) & 1)
        exch.setdefault(cols, {})[(x, z)] = v
    # glue ZZ strings on the four qubits of an exchange group commute with it
    # and are exponentiated with that group (first group in order wins)
    keys = sorted(exch)
    support = {cols: sum(1 << blocks[f][c] for f in ("u", "d") for c in cols) for cols in keys}
    rest = {}
    for (x, z), v in diag.items():
        home = None
        if x == 0 and bin(z).count("1") >= 2:
            home = next((cols for cols in keys if z & support[cols] == z), None)
        if home is None:
            rest[(x, z)] = v
        else:
            exch[home][(x, z)] = v
    terms["diag"] = OperatorSum(n, rest)
    for cols, data in exch.items():
        terms["exch:" + "".join(map(str, cols))] = OperatorSum(n, data)
    return [TrotterTerm(k, terms[k].real_part()) for k in STRONG_ORDER if k in terms]


def beta_terms(p: LatticeParams, layout: QubitLayout) -> list[TrotterTerm]:
    """Valence decay operator split by color (colors do not commute: they share the leptons)."""
    _check_l1(p, layout)
    n = layout.nqubits
    lep = hopping(layout.index(0, "e"), layout.index(0, "nubar"), n)
    out = []
    for c in range(3):
        q = hopping(layout.staggered("u", 0, c), layout.staggered("d", 0, c), n)
        out.append(TrotterTerm(f"beta:{c}", (p.G / 2 ** 0.5 * multiply(q, lep)).hc().real_part()))
    return out


def step_sequence(p: LatticeParams, layout: QubitLayout, t: float, steps: int,
                  skip_first_strong: bool = True) -> list[tuple[TrotterTerm, float]]:
    """(term, duration) pairs in application order for ``steps`` steps of total time ``t``.

    One step is ``exp(-i H_beta dt) exp(-i H_strong dt)``; the strong factor of
    the first step is dropped when the initial state is a strong eigenstate.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = t / steps
    strong, beta = strong_terms(p, layout), beta_terms(p, layout)
    seq = []
    for k in range(steps):
        if not (k == 0 and skip_first_strong):
            seq += [(term, dt) for term in strong]
        seq += [(term, dt) for term in beta]
    return seq
