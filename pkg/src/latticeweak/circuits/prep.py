"""Delta- preparation at L = 1: variational u-sector vacuum, packed d sector, lepton vacuum."""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import minimize

from ..evolution import u_pair_basis
from ..hamiltonians import build_h_glue, build_h_quarks
from ..layout import LatticeParams, QubitLayout
from ..spectra import _lepton_vacuum_bits
from .ir import Circuit

PAIR_CONFIGS = list(itertools.product((0, 1), repeat=3))


def derived_angles(theta: float, theta1: float, theta11: float) -> dict:
    """Remaining tree angles fixed by the color symmetry of the vacuum.

    The pair amplitudes with one (two) pairs must have equal magnitude for
    every color, which pins the branches not set variationally.
    """
    def asin_checked(arg, name):
        if abs(arg) > 1:
            raise ValueError(f"angle relation for {name} out of domain (|argument| = {abs(arg):.6f} > 1)")
        return float(np.arcsin(arg))

    theta0 = -2 * asin_checked(np.tan(theta / 2) * np.cos(theta1 / 2), "theta0")
    theta01 = -2 * asin_checked(np.cos(theta11 / 2) * np.tan(theta1 / 2), "theta01")
    theta00 = -2 * asin_checked(np.tan(theta0 / 2) * np.cos(theta01 / 2), "theta00")
    return {"theta": theta, "theta0": theta0, "theta1": theta1,
            "theta00": theta00, "theta01": theta01, "theta10": theta01, "theta11": theta11}


def tree_amplitudes(angles: dict) -> dict:
    """Pair-basis amplitudes of the RY tree (r on top, then g, then b)."""
    f = lambda a, bit: np.cos(a / 2) if bit == 0 else np.sin(a / 2)
    out = {}
    for r, g, b in PAIR_CONFIGS:
        out[(r, g, b)] = (f(angles["theta"], r) * f(angles[f"theta{r}"], g)
                          * f(angles[f"theta{r}{g}"], b))
    return out


def _pair_hamiltonian(p: LatticeParams, layout: QubitLayout):
    pairs = u_pair_basis(layout)
    states = np.array([s for _, s in pairs], dtype=np.int64)
    H = build_h_quarks(p, layout) + build_h_glue(p, layout)
    order = np.argsort(states)
    M = H.to_sparse(states[order]).toarray().real
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    return M[np.ix_(inv, inv)], [cfg for cfg, _ in pairs]


def vqe_angles(p: LatticeParams, layout: QubitLayout | None = None, start=(0.2, 0.3, 0.3)) -> dict:
    """Minimize the u-sector energy over (theta, theta1, theta11)."""
    layout = layout or QubitLayout(1, "grouped")
    M, cfgs = _pair_hamiltonian(p, layout)

    def energy(x):
        try:
            amps = tree_amplitudes(derived_angles(*x))
        except ValueError:
            return 1e3
        v = np.array([amps[c] for c in cfgs])
        return float(v @ M @ v / (v @ v))

    res = minimize(energy, np.asarray(start, dtype=float), method="BFGS", options={"gtol": 1e-11})
    angles = derived_angles(*res.x)
    angles["energy"] = res.fun
    return angles


def _ucry1(circ: Circuit, control: int, target: int, phi0: float, phi1: float):
    """RY(phi_c) on ``target`` conditioned on ``control`` = c, with 2 CNOTs."""
    circ.ry(target, (phi0 + phi1) / 2)
    circ.cx(control, target)
    circ.ry(target, (phi0 - phi1) / 2)
    circ.cx(control, target)


def _ucry2(circ: Circuit, c0: int, c1: int, target: int, phi: dict):
    """RY(phi[(b0, b1)]) on ``target`` for control bits (b0, b1), with 4 CNOTs."""
    # effective angle a1 + (-1)^b1 a2 + (-1)^(b0+b1) a3 + (-1)^b0 a4
    rows, rhs = [], []
    for b0, b1 in itertools.product((0, 1), repeat=2):
        rows.append([1, (-1) ** b1, (-1) ** (b0 + b1), (-1) ** b0])
        rhs.append(phi[(b0, b1)])
    a = np.linalg.solve(np.array(rows, dtype=float), np.array(rhs))
    circ.ry(target, a[0])
    circ.cx(c1, target)
    circ.ry(target, a[1])
    circ.cx(c0, target)
    circ.ry(target, a[2])
    circ.cx(c1, target)
    circ.ry(target, a[3])
    circ.cx(c0, target)


def state_prep_circuit(p: LatticeParams, angles: dict | None = None, layout: QubitLayout | None = None,
                       nqubits: int | None = None) -> Circuit:
    """Circuit preparing the Delta- from |0...0>.

    The RY tree writes the pair bits on the up-quark qubits, CNOTs copy them
    to the anti-up qubits, and X gates flip the up-quark and negative-energy
    lepton qubits into their reference values.  ``angles`` takes either the
    three free angles (keys theta, theta1, theta11) or a full set.
    """
    layout = layout or QubitLayout(1, "grouped")
    if p.L != 1 or layout.L != 1:
        raise ValueError("state preparation is defined for L = 1")
    if angles is None:
        angles = vqe_angles(p, layout)
    if "theta0" not in angles:
        angles = derived_angles(angles["theta"], angles["theta1"], angles["theta11"])
    u = [layout.staggered("u", 0, c) for c in range(3)]
    ubar = [layout.staggered("u", 1, c) for c in range(3)]
    circ = Circuit(nqubits or layout.nqubits, [], {"part": "prep", "angles": {k: float(v) for k, v in angles.items()}})
    circ.ry(u[0], angles["theta"])
    _ucry1(circ, u[0], u[1], angles["theta0"], angles["theta1"])
    _ucry2(circ, u[0], u[1], u[2], {(r, g): angles[f"theta{r}{g}"] for r in (0, 1) for g in (0, 1)})
    for c in range(3):
        circ.cx(u[c], ubar[c])
    for c in range(3):
        circ.x(u[c])
    for q, bit in sorted(_lepton_vacuum_bits(layout).items()):
        if bit:
            circ.x(q)
    return circ
