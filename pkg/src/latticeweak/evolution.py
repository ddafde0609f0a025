"""Reference real-time evolution, the initial baryon, and decay observables."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .hamiltonians import (baryon_number, build_full, build_h_glue, build_h_quarks,
                           electric_charge, flavor_number, lepton_number)
from .layout import LatticeParams, QubitLayout
from .pauli import OperatorSum

NORM_TOL = 1e-10


@dataclass
class Statevector:
    """Amplitudes over all ``2**nqubits`` states or over a sorted sector basis."""

    nqubits: int
    amplitudes: np.ndarray
    basis: np.ndarray | None = None

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expect = (1 << self.nqubits) if self.basis is None else len(self.basis)
        if self.amplitudes.shape != (expect,):
            raise ValueError(f"expected {expect} amplitudes, got {self.amplitudes.shape}")

    @property
    def states(self) -> np.ndarray:
        return np.arange(1 << self.nqubits, dtype=np.int64) if self.basis is None else self.basis

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self, amplitudes=None) -> "Statevector":
        amps = self.amplitudes.copy() if amplitudes is None else amplitudes
        return Statevector(self.nqubits, amps, self.basis)

    def to_full(self) -> np.ndarray:
        if self.basis is None:
            return self.amplitudes.copy()
        out = np.zeros(1 << self.nqubits, dtype=complex)
        out[self.basis] = self.amplitudes
        return out

    def restrict(self, basis: np.ndarray, tol: float = 1e-12) -> "Statevector":
        """Re-express on another basis; amplitude outside it must be negligible."""
        full = self.to_full()
        kept = full[basis]
        lost = 1 - np.vdot(kept, kept).real / max(np.vdot(full, full).real, 1e-300)
        if lost > tol:
            raise ValueError(f"state has weight {lost:.2e} outside the requested basis")
        return Statevector(self.nqubits, kept, np.asarray(basis))

    def expectation(self, op: OperatorSum) -> complex:
        M = op.to_sparse(self.basis) if self.basis is not None else op.to_sparse()
        return complex(np.vdot(self.amplitudes, M @ self.amplitudes))

    def bit_probability(self, qubit: int, value: int) -> float:
        mask = ((self.states >> qubit) & 1) == value
        return float(np.sum(np.abs(self.amplitudes[mask]) ** 2))

    def overlap(self, other: "Statevector") -> complex:
        return complex(np.vdot(self.to_full(), other.to_full()))


# -- initial state ----------------------------------------------------------------------

def u_pair_basis(layout: QubitLayout) -> list[tuple[tuple[int, int, int], int]]:
    """The 8 u-sector states built from same-color u ubar pairs, with d full and leptons empty.

    Pair bit ``p_c = 1`` fills the up-quark slot (bit 0) and removes the
    anti-up (bit 1 on the antiparticle slot).
    """
    out = []
    base = (1 << layout.index(0, "nu")) | (1 << layout.index(0, "e"))
    for pr in (0, 1):
        for pg in (0, 1):
            for pb in (0, 1):
                s = base
                for c, pc in enumerate((pr, pg, pb)):
                    if pc:
                        s |= 1 << layout.staggered("u", 1, c)
                    else:
                        s |= 1 << layout.staggered("u", 0, c)
                out.append(((pr, pg, pb), s))
    return out


def u_vacuum_amplitudes(p: LatticeParams, layout: QubitLayout | None = None) -> dict:
    """Ground state of the up-flavor strong Hamiltonian in the pair basis.

    Only u kinetic, u mass and the u self-interaction of the glue act
    non-trivially when the d sector is fully packed (its color charge
    vanishes), so the problem closes on the 8 pair states.  The overall sign
    is fixed by a positive bare-vacuum amplitude.
    """
    layout = layout or QubitLayout(1, "grouped")
    if p.L != 1:
        raise ValueError("the single-site baryon is defined for L = 1")
    pairs = u_pair_basis(layout)
    states = np.array(sorted(s for _, s in pairs), dtype=np.int64)
    H = build_h_quarks(p, layout) + build_h_glue(p, layout)
    M = H.to_sparse(states).toarray()
    w, v = np.linalg.eigh(M)
    g = v[:, 0]
    pos = {s: i for i, s in enumerate(states)}
    amps = {cfg: g[pos[s]] for cfg, s in pairs}
    sign = np.sign(amps[(0, 0, 0)].real) or 1.0
    return {cfg: float((a * sign).real) for cfg, a in amps.items()}


def prepare_delta_minus(p: LatticeParams, layout: QubitLayout | None = None) -> Statevector:
    """Delta- at L = 1: u vacuum (x) packed d sector (x) tilde lepton vacuum, on 16 qubits."""
    layout = layout or QubitLayout(1, "grouped")
    amps = u_vacuum_amplitudes(p, layout)
    full = np.zeros(1 << layout.nqubits, dtype=complex)
    for cfg, s in u_pair_basis(layout):
        full[s] = amps[cfg]
    full /= np.linalg.norm(full)
    return Statevector(layout.nqubits, full)


def delta_minus_by_sector(p: LatticeParams, layout: QubitLayout | None = None) -> Statevector:
    """Independent route: lowest state of the (N_u, N_d) = (0, 3) sector of the G = 0 Hamiltonian."""
    from .spectra import quark_sector_energies
    layout = layout or QubitLayout(1, "grouped")
    energy, sector, vec = quark_sector_energies(p, layout)[(0, 3)]
    return Statevector(layout.nqubits, vec, sector.basis)


def dynamical_sector(layout: QubitLayout, state: Statevector) -> np.ndarray:
    """Basis of the (B, L_lep, Q) sector that contains ``state``."""
    states = np.arange(1 << layout.nqubits, dtype=np.int64)
    keep = np.ones(len(states), dtype=bool)
    for op in (baryon_number(layout), lepton_number(layout), electric_charge(layout)):
        vals = op.diagonal_values(state.states)
        occupied = np.abs(state.amplitudes) > 1e-12
        target = vals[occupied].real
        if np.ptp(target) > 1e-9:
            raise ValueError("state is not an eigenstate of the conserved charges")
        keep &= np.abs(op.diagonal_values(states).real - target[0]) < 1e-9
    return states[keep]


# -- time evolution ---------------------------------------------------------------------

class SectorPropagator:
    """``exp(-i H t)`` on a sector via eigendecomposition and short-iterative Lanczos."""

    def __init__(self, H: OperatorSum, basis: np.ndarray, check_closed: bool = True):
        self.basis = np.asarray(basis)
        self.nqubits = H.nqubits
        self.matrix = H.to_sparse(self.basis).tocsr()
        if check_closed:
            self._check_closed(H)
        self._eig = None

    def _check_closed(self, H: OperatorSum):
        # single Pauli strings may leave the sector; only their sum must not
        cols, rows, vals = [], [], []
        src = np.arange(len(self.basis))
        for amp, targets in H.apply_to_basis(self.basis):
            outside = ~np.isin(targets, self.basis)
            cols.append(src[outside])
            rows.append(targets[outside])
            vals.append(amp[outside])
        if not cols:
            return
        key = np.concatenate(rows) * len(self.basis) + np.concatenate(cols)
        uniq, inv = np.unique(key, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=complex)
        np.add.at(summed, inv, np.concatenate(vals))
        if np.any(np.abs(summed) > 1e-12):
            raise ValueError("sector is not closed under H")

    @property
    def eig(self):
        if self._eig is None:
            w, v = np.linalg.eigh(self.matrix.toarray())
            self._eig = (w, v)
        return self._eig

    def _as_sector(self, state: Statevector) -> np.ndarray:
        if state.basis is not None and np.array_equal(state.basis, self.basis):
            return state.amplitudes
        return state.restrict(self.basis).amplitudes

    def evolve(self, state: Statevector, t: float, method: str = "eig") -> Statevector:
        psi = self._as_sector(state)
        if method == "eig":
            w, v = self.eig
            out = v @ (np.exp(-1j * w * t) * (v.conj().T @ psi))
        elif method == "krylov":
            out = krylov_expm(self.matrix, psi, t)
        else:
            raise ValueError(f"unknown method {method!r}")
        return Statevector(self.nqubits, out, self.basis)

    def curve(self, state: Statevector, times) -> list[Statevector]:
        w, v = self.eig
        c0 = v.conj().T @ self._as_sector(state)
        return [Statevector(self.nqubits, v @ (np.exp(-1j * w * t) * c0), self.basis) for t in times]


def krylov_expm(A, psi: np.ndarray, t: float, m: int = 30, tol: float = 1e-10,
                max_substeps: int = 100000) -> np.ndarray:
    """``exp(-i A t) psi`` by Lanczos with adaptive sub-steps.

    Each sub-step builds an ``m``-dimensional Krylov space and accepts the
    largest step whose a-posteriori estimate (last-row coefficient of the
    projected exponential times the residual norm) is below ``tol``.
    """
    psi = np.asarray(psi, dtype=complex)
    out = psi.copy()
    done, taken = 0.0, 0
    sign = 1.0 if t >= 0 else -1.0
    total = abs(t)
    dt = total
    while done < total - 1e-15:
        beta0 = np.linalg.norm(out)
        if beta0 == 0:
            return out
        V, T, beta_last = _lanczos(A, out / beta0, m)
        k = T.shape[0]
        dt = min(dt, total - done)
        while True:
            E = sla.expm(-1j * sign * dt * T)
            err = beta0 * abs(beta_last * E[k - 1, 0]) if beta_last > 0 else 0.0
            if err <= tol or dt < 1e-14:
                break
            dt *= 0.5
        out = beta0 * (V[:, :k] @ E[:, 0])
        done += dt
        dt *= 1.5
        taken += 1
        if taken > max_substeps:
            raise RuntimeError("Krylov propagation did not converge")
    return out


def _lanczos(A, v0: np.ndarray, m: int):
    n = v0.size
    m = min(m, n)
    V = np.zeros((n, m + 1), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[:, 0] = v0
    k = m
    for j in range(m):
        w = A @ V[:, j]
        alpha[j] = np.vdot(V[:, j], w).real
        w = w - alpha[j] * V[:, j] - (beta[j - 1] * V[:, j - 1] if j else 0)
        # full reorthogonalization keeps small spaces clean
        w -= V[:, : j + 1] @ (V[:, : j + 1].conj().T @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-13:
            k = j + 1
            beta[j] = 0.0
            break
        V[:, j + 1] = w / beta[j]
    T = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    return V, T, beta[k - 1]


def evolve_exact(state: Statevector, H: OperatorSum, t: float, dt_max: float | None = None,
                 method: str = "eig", basis: np.ndarray | None = None) -> Statevector:
    """``exp(-i H t)`` applied to ``state`` on a sector closed under ``H``.

    The sector defaults to the state's own basis.  ``krylov`` advances in
    sub-steps no longer than ``dt_max``; ``eig`` diagonalizes the sector.
    """
    if basis is None:
        if state.basis is None:
            raise ValueError("evolve_exact needs a sector basis for a full-register state")
        basis = state.basis
    prop = SectorPropagator(H, basis)
    if t == 0:
        return Statevector(prop.nqubits, prop._as_sector(state).copy(), prop.basis)
    if method == "eig" or dt_max is None or abs(t) <= dt_max:
        return prop.evolve(state, t, method)
    if method != "krylov":
        raise ValueError(f"unknown method {method!r}")
    n = int(np.ceil(abs(t) / dt_max))
    psi = prop._as_sector(state)
    for _ in range(n):
        psi = krylov_expm(prop.matrix, psi, t / n)
    return Statevector(prop.nqubits, psi, prop.basis)


def trotter_evolve(state: Statevector, sequence, basis: np.ndarray | None = None) -> Statevector:
    """Apply ``exp(-i h dt)`` for each ``(term, dt)`` in order, on a sector basis."""
    basis = state.basis if basis is None else basis
    psi = state.amplitudes if state.basis is not None and np.array_equal(state.basis, basis) \
        else state.restrict(basis).amplitudes
    cache = {}
    for term, dt in sequence:
        key = (term.name, dt)
        if key not in cache:
            cache[key] = sla.expm(-1j * dt * term.op.to_sparse(basis).toarray())
        psi = cache[key] @ psi
    return Statevector(state.nqubits, psi, basis)


# -- observables ------------------------------------------------------------------------

def decay_probability(state: Statevector, layout: QubitLayout | None = None, check: bool = True) -> float:
    """Occupation of the tilde electron mode; equals the anti-neutrino occupation."""
    layout = layout or QubitLayout(1, "grouped")
    if layout.L != 1:
        raise ValueError("the decay probability is defined in the L = 1 tilde basis")
    p_e = state.bit_probability(layout.index(0, "e"), 0)
    if check:
        p_nubar = state.bit_probability(layout.index(0, "nubar"), 1)
        if abs(p_e - p_nubar) > 1e-10:
            raise ValueError(f"electron ({p_e}) and anti-neutrino ({p_nubar}) occupations differ")
    return p_e


def reduced_density_matrix(state: Statevector, qubits) -> np.ndarray:
    """Partial trace onto ``qubits``; row index bit k is ``qubits[k]``."""
    qubits = list(qubits)
    n = state.nqubits
    if any(q < 0 or q >= n for q in qubits) or len(set(qubits)) != len(qubits):
        raise ValueError("partition outside the register")
    rest = [q for q in range(n) if q not in qubits]
    psi = state.to_full().reshape([2] * n)
    # axis i of the reshaped tensor is qubit n-1-i
    axes = [n - 1 - q for q in reversed(qubits)] + [n - 1 - q for q in reversed(rest)]
    mat = np.transpose(psi, axes).reshape(1 << len(qubits), -1)
    return mat @ mat.conj().T


def linear_entropy(state: Statevector, qubits) -> float:
    rho = reduced_density_matrix(state, qubits)
    return float(1.0 - np.real(np.vdot(rho, rho)))


def quark_qubits(layout: QubitLayout) -> list[int]:
    """The six particle-slot quark qubits (u and d, all colors) of site 0."""
    return sorted(layout.qubits(("u", "d"), site=0))


# -- curves -----------------------------------------------------------------------------

@dataclass
class DecayCurve:
    times: list
    probabilities: list
    method: str
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must be strictly increasing")
        if any(not (-1e-12 <= q <= 1 + 1e-12) for q in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        for line in header.splitlines():
            buf.write(f"# {line}\n")
        cols = ["t", "probability"] + list(self.extra)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for i, t in enumerate(self.times):
            w.writerow([f"{t:.6f}", f"{self.probabilities[i]:.10f}"]
                       + [_fmt(self.extra[k][i]) for k in self.extra])
        return buf.getvalue()


def _fmt(v) -> str:
    return str(int(v)) if isinstance(v, (int, np.integer)) else f"{v:.10f}"


def time_grid(tmax: float, dt: float) -> list[float]:
    n = int(math.floor(tmax / dt + 1e-9))
    return [round(k * dt, 12) for k in range(n + 1)]


def exact_decay_curve(p: LatticeParams, times, operator: str = "valence",
                      method: str = "eig", with_entropy: bool = False) -> DecayCurve:
    """Decay probability under the full Hamiltonian, valence or complete tilde decay term."""
    layout = QubitLayout(1, "grouped")
    form = {"valence": "valence", "full": "tilde"}[operator]
    psi0 = prepare_delta_minus(p, layout)
    H = build_full(p, layout, beta=form)
    basis = dynamical_sector(layout, psi0)
    prop = SectorPropagator(H, basis)
    if method == "eig":
        states = prop.curve(psi0, times)
    else:
        states = [prop.evolve(psi0, t, "krylov") for t in times]
    probs = [decay_probability(s, layout) for s in states]
    extra = {}
    if with_entropy:
        extra["linear_entropy"] = [linear_entropy(s, quark_qubits(layout)) for s in states]
    return DecayCurve(list(times), probs, "exact", extra)


def trotter_decay_curve(p: LatticeParams, times, steps: int, skip_first_strong: bool = True) -> DecayCurve:
    """Operator-level Trotter product (no circuit compilation) at each time."""
    from .trotter import step_sequence
    layout = QubitLayout(1, "grouped")
    psi0 = prepare_delta_minus(p, layout)
    basis = dynamical_sector(layout, psi0)
    psi0 = psi0.restrict(basis)
    probs = []
    for t in times:
        probs.append(decay_probability(trotter_evolve(psi0, step_sequence(p, layout, t, steps, skip_first_strong)), layout))
    return DecayCurve(list(times), probs, f"trotter-{steps}")


def dominant_frequency(times, values) -> float:
    """Frequency (cycles per unit time) of the largest non-zero DFT peak of a uniform series."""
    times = np.asarray(times)
    values = np.asarray(values) - np.mean(values)
    dt = times[1] - times[0]
    pad = 16 * len(values)
    spec = np.abs(np.fft.rfft(values * np.hanning(len(values)), n=pad))
    freqs = np.fft.rfftfreq(pad, dt)
    spec[0] = 0
    return float(freqs[int(np.argmax(spec))])
