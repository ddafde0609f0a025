"""Statevector execution of circuits, shot sampling and post-selection."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .circuits.ir import Circuit, Gate

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _single(kind: str, angle):
    if kind == "H":
        return _H
    if kind == "X":
        return _X
    if kind == "RY":
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    raise ValueError(kind)


def apply_gate(psi: np.ndarray, gate: Gate, nqubits: int) -> np.ndarray:
    """Apply one gate in place (qubit k is bit k of the amplitude index)."""
    if gate.kind == "CNOT":
        c, t = gate.qubits
        v = psi.reshape([2] * nqubits)
        ac, at = nqubits - 1 - c, nqubits - 1 - t
        idx1 = [slice(None)] * nqubits
        idx1[ac] = 1
        sub = v[tuple(idx1)]
        # axis of the target inside the sliced view
        at_sub = at if at < ac else at - 1
        sub[...] = np.flip(sub, axis=at_sub).copy()
        return psi
    if gate.kind == "RESET":
        q = gate.qubits[0]
        v = psi.reshape(-1, 2, 1 << q)
        p1 = float(np.sum(np.abs(v[:, 1, :]) ** 2))
        if p1 > 1e-12:
            raise ValueError(f"RESET on qubit {q} with |1> weight {p1:.3e} is not unitary in a noiseless run")
        return psi
    q = gate.qubits[0]
    U = _single(gate.kind, gate.angle)
    v = psi.reshape(-1, 2, 1 << q)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = U[0, 0] * a0 + U[0, 1] * a1
    v[:, 1, :] = U[1, 0] * a0 + U[1, 1] * a1
    return psi


def run_statevector(circuit: Circuit, initial: np.ndarray | int = 0) -> np.ndarray:
    n = circuit.nqubits
    if isinstance(initial, (int, np.integer)):
        psi = np.zeros(1 << n, dtype=complex)
        psi[int(initial)] = 1.0
    else:
        psi = np.array(initial, dtype=complex)
        if psi.shape != (1 << n,):
            raise ValueError("initial state has the wrong length")
    for g in circuit.gates:
        apply_gate(psi, g, n)
    return psi


def circuit_unitary(circuit: Circuit, cap: int = 12) -> np.ndarray:
    n = circuit.nqubits
    if n > cap:
        raise ValueError(f"dense unitary of {n} qubits exceeds cap {cap}")
    cols = [run_statevector(circuit, k) for k in range(1 << n)]
    return np.column_stack(cols)


# -- sampling ---------------------------------------------------------------------------

@dataclass
class ShotResult:
    nqubits: int
    shots: int
    seed: int
    counts: dict
    kept: int | None = None
    filters: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != (self.shots if self.kept is None else self.kept):
            raise ValueError("counts do not sum to the number of (kept) shots")

    @property
    def total(self) -> int:
        return self.shots if self.kept is None else self.kept

    @property
    def kept_fraction(self) -> float:
        return self.total / self.shots

    def probability(self, predicate) -> tuple[float, float]:
        """Estimate of P(predicate(bits)) with its binomial standard error."""
        hits = sum(c for b, c in self.counts.items() if predicate(int(b, 2)))
        return binomial_estimate(hits, self.total)

    def to_json(self, header: dict | None = None) -> str:
        body = {"shots": self.shots, "seed": self.seed, "kept": self.total,
                "filters": self.filters, "counts": dict(sorted(self.counts.items()))}
        if header:
            body = {"header": header, **body}
        return json.dumps(body, indent=2, sort_keys=False) + "\n"


def binomial_estimate(hits: int, n: int) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("empty sample")
    p = hits / n
    return p, math.sqrt(p * (1 - p) / n)


def sample_counts(psi: np.ndarray, shots: int, seed: int, nqubits: int) -> dict:
    """Counts of computational-basis outcomes (bitstrings with qubit 0 rightmost)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = np.abs(psi) ** 2
    probs = probs / probs.sum()
    rng = np.random.Generator(np.random.Philox(key=seed))
    outcomes = rng.multinomial(shots, probs)
    nz = np.nonzero(outcomes)[0]
    return {format(int(k), f"0{nqubits}b"): int(outcomes[k]) for k in nz}


def run(circuit: Circuit, shots: int, seed: int, initial=0) -> ShotResult:
    psi = run_statevector(circuit, initial)
    return ShotResult(circuit.nqubits, shots, seed, sample_counts(psi, shots, seed, circuit.nqubits))


def charge_filter(layout, qubit_count: int | None = None, baryon: float = 1.0, lepton: float = 0.0):
    """Predicate on bit patterns keeping states with the given baryon and lepton number."""
    from .hamiltonians import baryon_number, lepton_number
    B, L = baryon_number(layout), lepton_number(layout)
    low = (1 << layout.nqubits) - 1

    def keep(bits: int) -> bool:
        s = np.array([bits & low], dtype=np.int64)
        return (abs(B.diagonal_values(s)[0].real - baryon) < 1e-9
                and abs(L.diagonal_values(s)[0].real - lepton) < 1e-9)

    return keep


def post_select(result: ShotResult, filters: dict) -> ShotResult:
    """Keep outcomes passing every predicate in ``filters`` (name -> predicate on int bits)."""
    kept_counts = {}
    for b, c in result.counts.items():
        bits = int(b, 2)
        if all(f(bits) for f in filters.values()):
            kept_counts[b] = c
    kept = sum(kept_counts.values())
    if kept == 0:
        raise ValueError("post-selection removed every shot")
    record = dict(result.filters)
    record.update({name: kept / result.total for name in filters})
    return ShotResult(result.nqubits, result.shots, result.seed, kept_counts, kept, record)


def ancilla_filter(ancilla: int):
    return lambda bits: ((bits >> ancilla) & 1) == 0


# -- end-to-end decay probabilities -------------------------------------------------------

def decay_circuit(p, t: float, steps: int, layout=None, ancilla: bool = True,
                  angles: dict | None = None) -> Circuit:
    """Delta- preparation followed by ``steps`` compiled Trotter steps."""
    from .circuits.compile import trotter_step_circuit
    from .circuits.prep import state_prep_circuit
    from .layout import QubitLayout
    layout = layout or QubitLayout(1, "grouped")
    evo = trotter_step_circuit(p, t, steps, layout, ancilla=ancilla)
    circ = state_prep_circuit(p, angles, layout, nqubits=evo.nqubits)
    circ.gates += evo.gates
    circ.metadata.update({k: v for k, v in evo.metadata.items() if k != "cnot"})
    circ.metadata["cnot"] = circ.cnot_count
    return circ


def trotter_decay_table(p, steps: int, times, layout=None, ancilla: bool = True):
    """Decay probabilities from noiseless statevector runs of the compiled circuits."""
    from .evolution import DecayCurve
    from .layout import QubitLayout
    layout = layout or QubitLayout(1, "grouped")
    e, nubar = layout.index(0, "e"), layout.index(0, "nubar")
    probs, cnots = [], []
    for t in times:
        circ = decay_circuit(p, float(t), steps, layout, ancilla)
        psi = run_statevector(circ)
        w = np.abs(psi) ** 2
        idx = np.arange(len(w))
        p_e = float(w[((idx >> e) & 1) == 0].sum())
        p_nubar = float(w[((idx >> nubar) & 1) == 1].sum())
        if abs(p_e - p_nubar) > 1e-10:
            raise RuntimeError(f"electron ({p_e}) and anti-neutrino ({p_nubar}) occupations differ")
        if circ.metadata.get("ancilla") is not None:
            leak = float(w[((idx >> circ.metadata["ancilla"]) & 1) == 1].sum())
            if leak > 1e-10:
                raise RuntimeError(f"ancilla left excited with probability {leak:.2e}")
        probs.append(p_e)
        cnots.append(circ.cnot_count)
    return DecayCurve(list(map(float, times)), probs, f"circuit-{steps}", {"cnot": cnots})
