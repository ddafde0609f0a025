"""Charge-sector bases and exact diagonalization."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .hamiltonians import build_full, flavor_number
from .layout import LatticeParams, QubitLayout
from .pauli import OperatorSum, commutator

DENSE_SECTOR_CAP = 4096
RESIDUAL_TOL = 1e-9


@dataclass
class SectorSpec:
    """Joint eigenspace of diagonal charges, as a sorted list of basis states."""

    nqubits: int
    charges: list = field(default_factory=list)   # [(name, OperatorSum, value)]
    basis: np.ndarray | None = None

    def add(self, name: str, op: OperatorSum, value: float) -> "SectorSpec":
        if not op.is_diagonal():
            raise ValueError(f"charge {name!r} is not diagonal in the computational basis")
        self.charges.append((name, op, value))
        return self

    @property
    def dim(self) -> int:
        return 0 if self.basis is None else len(self.basis)


def _states_with(charges, nqubits: int, restrict=None) -> np.ndarray:
    states = np.arange(1 << nqubits, dtype=np.int64) if restrict is None else np.asarray(restrict)
    keep = np.ones(len(states), dtype=bool)
    for _, op, value in charges:
        keep &= np.abs(op.diagonal_values(states).real - value) < 1e-9
    return states[keep]


def build_sector(H: OperatorSum, sector: SectorSpec, restrict=None, check: bool = True) -> SectorSpec:
    """Fill ``sector.basis`` and check that every charge commutes with ``H``.

    ``restrict`` optionally pre-filters the candidate states, which keeps
    16-qubit enumerations cheap when some bits are already fixed.
    """
    if check:
        for name, op, _ in sector.charges:
            c = commutator(H, op)
            if len(c):
                worst = max(c.terms, key=lambda t: abs(t.coefficient))
                raise ValueError(f"charge {name!r} does not commute with H (offending term {worst.paulis})")
    sector.basis = _states_with(sector.charges, sector.nqubits, restrict)
    return sector


def diagonalize(H: OperatorSum, sector: SectorSpec, k: int | None = None,
                dense_cap: int = DENSE_SECTOR_CAP):
    """Ascending eigenvalues and eigenvectors of ``H`` on the sector.

    Dense ``eigh`` up to ``dense_cap`` states, Lanczos (``k`` lowest) beyond.
    Degenerate eigenvectors are rotated so that each has a distinct dominant
    basis state, and ties are ordered by that state's index.
    """
    M = H.to_sparse(sector.basis)
    n = M.shape[0]
    if n <= dense_cap:
        w, v = np.linalg.eigh(M.toarray())
        if k is not None:
            w, v = w[:k], v[:, :k]
    else:
        kk = k or 6
        # extra pairs guard against a Krylov space missing a copy of a degenerate level
        w, v = spla.eigsh(M, k=min(n - 1, kk + 6), which="SA", tol=1e-12)
        order = np.argsort(w)[:kk]
        w, v = w[order], v[:, order]
    w, v = _canonical_degenerate(w, v)
    res = np.linalg.norm(M @ v - v * w, axis=0)
    if res.size and res.max() > RESIDUAL_TOL:
        raise RuntimeError(f"eigenpairs not converged: max residual {res.max():.2e}")
    return w, v


def _canonical_degenerate(w, v, tol=1e-9):
    v = v.copy()
    start = 0
    out_w, out_v = [], []
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) < tol:
            stop += 1
        block = v[:, start:stop]
        if stop - start > 1:
            # QR with column pivoting on block^T picks well-conditioned dominant states
            _, _, piv = sla.qr(block.T, pivoting=True, mode="economic")
            rows = np.sort(piv[: stop - start])
            block = block @ np.linalg.inv(block[rows, :])
            block, _ = np.linalg.qr(block)
        for j in range(block.shape[1]):
            col = block[:, j]
            dom = int(np.argmax(np.abs(col)))
            col = col * (np.abs(col[dom]) / col[dom])
            out_v.append((dom, col))
            out_w.append(w[start])
        start = stop
    idx = sorted(range(len(out_w)), key=lambda i: (round(out_w[i] / tol), out_v[i][0]))
    return np.array([out_w[i] for i in idx]), np.column_stack([out_v[i][1] for i in idx])


# -- baryon spectrum table ------------------------------------------------------------

@dataclass
class SpectrumTable:
    rows: list  # (label, gap, multiplicity)

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        if header:
            for line in header.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "gap", "multiplicity"])
        for label, gap, mult in self.rows:
            w.writerow([label, f"{gap:.6f}", mult])
        return buf.getvalue()

    def gaps(self) -> list[float]:
        return [g for _, g, _ in self.rows]


BARYON_LABELS = {(3, 0): "Delta++", (2, 1): "Delta+", (1, 2): "Delta0", (0, 3): "Delta-"}


def _lepton_vacuum_bits(layout: QubitLayout) -> dict[int, int]:
    """Bit values of the tilde lepton vacuum: positive modes empty, negative modes filled."""
    return {layout.index(0, "nu"): 1, layout.index(0, "e"): 1,
            layout.index(0, "nubar"): 0, layout.index(0, "ebar"): 0}


def quark_sector_energies(p: LatticeParams, layout: QubitLayout | None = None) -> dict:
    """Lowest strong energy of each (N_u, N_d) sector with the leptons in their vacuum."""
    layout = layout or QubitLayout(1, "grouped")
    H = build_full(p.with_(G=0.0), layout, beta=None, leptons="tilde")
    n = layout.nqubits
    fixed = _lepton_vacuum_bits(layout)
    mask = sum(1 << q for q in fixed)
    val = sum(b << q for q, b in fixed.items())
    candidates = np.array([s for s in range(1 << n) if s & mask == val], dtype=np.int64)
    out = {}
    for nu, nd in itertools.product(range(-3 * p.L, 3 * p.L + 1), repeat=2):
        sec = SectorSpec(n).add("N_u", flavor_number(layout, "u"), nu).add("N_d", flavor_number(layout, "d"), nd)
        build_sector(H, sec, restrict=candidates, check=False)
        if sec.dim:
            w, v = diagonalize(H, sec, k=1)
            out[(nu, nd)] = (w[0], sec, v[:, 0])
    return out


def spectrum_table(p: LatticeParams, max_lepton_pairs: int = 2) -> SpectrumTable:
    """Gaps of the Delta multiplet and of Delta + lepton-pair states up to the Delta- gap.

    Needs ``G = 0`` so that strong and lepton sectors separate; the free
    lepton levels are ``k * 2 * lambda`` above the lepton vacuum, with the
    multiplicity of zero-lepton-number fillings of the four tilde modes.
    """
    if p.G != 0:
        raise ValueError("spectrum_table labels states of the G = 0 Hamiltonian")
    if p.L != 1:
        raise ValueError("spectrum_table is defined for L = 1")
    if p.m_e != p.m_nu:
        raise ValueError("lepton-pair labels assume degenerate electron and neutrino")
    sectors = quark_sector_energies(p)
    vac = sectors[(0, 0)][0]
    lam = 0.5 * np.sqrt(1 + 4 * p.m_e ** 2)
    lepton_levels = _lepton_pair_levels(lam, max_lepton_pairs)
    baryons = {lab: sectors[key][0] - vac for key, lab in BARYON_LABELS.items()}
    top = baryons["Delta-"] + 1e-9
    rows = []
    for lab, gap in baryons.items():
        for k, (dE, mult) in enumerate(lepton_levels):
            if gap + dE <= top:
                rows.append((lab if k == 0 else f"{lab} + {2 * k}l", gap + dE, mult))
    rows.sort(key=lambda r: r[1])
    return SpectrumTable(rows)


def _lepton_pair_levels(lam: float, max_pairs: int):
    """(excitation energy, degeneracy) of zero-lepton-number lepton states.

    Each of the four tilde modes costs ``lam`` when excited (positive mode
    filled or negative mode emptied); the degeneracy is counted by
    enumerating excitation patterns with zero lepton number.
    """
    levels = {}
    for e_pos, e_neg, n_pos, n_neg in itertools.product((0, 1), repeat=4):
        # n_neg / e_neg = 1 means the negative mode is empty (antiparticle present)
        lepnum = (e_pos - e_neg) + (n_pos - n_neg)
        if lepnum:
            continue
        k = e_pos + e_neg + n_pos + n_neg
        if k % 2 or k // 2 > max_pairs:
            continue
        levels[k // 2] = levels.get(k // 2, 0) + 1
    return [(2 * lam * k, levels[k]) for k in sorted(levels)]
