import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from latticeweak.circuits import Circuit, Gate, state_prep_circuit
from latticeweak.hamiltonians import baryon_number, lepton_number
from latticeweak.simulator import (ShotResult, ancilla_filter, apply_gate, binomial_estimate, charge_filter,
                                   circuit_unitary, decay_circuit, post_select, run, run_statevector,
                                   sample_counts, trotter_decay_table)

MATS = {
    "H": np.array([[1, 1], [1, -1]]) / math.sqrt(2),
    "X": np.array([[0, 1], [1, 0]]),
}


def kron_gate(g: Gate, n: int) -> np.ndarray:
    """Independent dense oracle: Kronecker products with qubit 0 rightmost."""
    if g.kind == "CNOT":
        c, t = g.qubits
        U = np.zeros((1 << n, 1 << n))
        for s in range(1 << n):
            U[s ^ (((s >> c) & 1) << t), s] = 1
        return U
    if g.kind == "RZ":
        m = np.diag([np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle)])
    elif g.kind == "RY":
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        m = np.array([[c, -s], [s, c]])
    else:
        m = MATS[g.kind]
    out = np.eye(1)
    for q in reversed(range(n)):
        out = np.kron(out, m if q == g.qubits[0] else np.eye(2))
    return out


gate_st = st.one_of(
    st.builds(lambda k, q: Gate(k, (q,)), st.sampled_from(["H", "X"]), st.integers(0, 3)),
    st.builds(lambda k, q, a: Gate(k, (q,), a), st.sampled_from(["RY", "RZ"]), st.integers(0, 3),
              st.floats(-4, 4)),
    st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda ab: ab[0] != ab[1])
    .map(lambda ab: Gate("CNOT", ab)),
)


@given(st.lists(gate_st, max_size=12))
def test_statevector_matches_kronecker_oracle(gates):
    U = np.eye(16, dtype=complex)
    for g in gates:
        U = kron_gate(g, 4) @ U
    assert np.allclose(circuit_unitary(Circuit(4, list(gates))), U, atol=1e-10)


def test_apply_gate_on_wide_register():
    psi = np.zeros(1 << 17, dtype=complex)
    psi[1 << 16] = 1
    apply_gate(psi, Gate("CNOT", (16, 0)), 17)
    assert psi[(1 << 16) | 1] == 1


def test_reset_only_on_clear_qubit():
    c = Circuit(2)
    c.gates.append(Gate("RESET", (0,)))
    assert np.allclose(run_statevector(c), [1, 0, 0, 0])
    c2 = Circuit(2).x(0)
    c2.gates.append(Gate("RESET", (0,)))
    with pytest.raises(ValueError):
        run_statevector(c2)


@pytest.fixture(scope="module")
def prep_shots(params):
    return run(state_prep_circuit(params), 2000, 11)


def test_prepared_state_has_baryon_one_lepton_zero(prep_shots, layout):
    B, L = baryon_number(layout), lepton_number(layout)
    states = np.array([int(b, 2) for b in prep_shots.counts], dtype=np.int64)
    assert np.allclose(B.diagonal_values(states).real, 1)
    assert np.allclose(L.diagonal_values(states).real, 0)


def test_noiseless_kept_fraction_is_one(prep_shots, layout):
    kept = post_select(prep_shots, {"charges": charge_filter(layout)})
    assert kept.kept_fraction == 1.0


def test_bit_flips_rejected(prep_shots, layout):
    keep = charge_filter(layout)
    for b in prep_shots.counts:
        bits = int(b, 2)
        for q in range(16):
            assert not keep(bits ^ (1 << q))


def test_post_select_idempotent(layout):
    counts = {format(s, "017b"): 1 for s in range(0, 1 << 17, 997)}
    res = ShotResult(17, len(counts), 3, counts)
    filters = {"charges": charge_filter(layout), "ancilla": ancilla_filter(16)}
    once = post_select(res, filters)
    twice = post_select(once, filters)
    assert once.counts == twice.counts and once.kept == twice.kept


def test_ancilla_filter_exact():
    counts = {"100": 3, "000": 5, "110": 2, "011": 1}
    res = post_select(ShotResult(3, 11, 0, counts), {"a": ancilla_filter(2)})
    assert res.counts == {"000": 5, "011": 1}
    with pytest.raises(ValueError):
        post_select(ShotResult(3, 3, 0, {"100": 3}), {"a": ancilla_filter(2)})


def test_binomial_error_scaling():
    _, e100 = binomial_estimate(30, 100)
    _, e400 = binomial_estimate(120, 400)
    assert e400 == pytest.approx(e100 / 2)
    with pytest.raises(ValueError):
        binomial_estimate(0, 0)


def test_sampling_deterministic_and_validated():
    psi = np.ones(8) / math.sqrt(8)
    assert sample_counts(psi, 100, 5, 3) == sample_counts(psi, 100, 5, 3)
    assert sample_counts(psi, 100, 5, 3) != sample_counts(psi, 100, 6, 3)
    with pytest.raises(ValueError):
        sample_counts(psi, 0, 5, 3)
    with pytest.raises(ValueError):
        ShotResult(3, 10, 0, {"000": 3})


def test_sampled_decay_converges(params):
    circ = decay_circuit(params, 1.0, 2)
    psi = run_statevector(circ)
    idx = np.arange(len(psi))
    p = float(np.sum(np.abs(psi[((idx >> 13) & 1) == 0]) ** 2))
    is_decay = lambda bits: ((bits >> 13) & 1) == 0
    zs = []
    for seed in range(60):
        res = ShotResult(circ.nqubits, 400, seed, sample_counts(psi, 400, seed, circ.nqubits))
        est, _ = res.probability(is_decay)
        zs.append((est - p) / math.sqrt(p * (1 - p) / 400))
    assert stats.kstest(zs, "norm").pvalue > 0.01
    spreads = []
    for shots in (100, 1600):
        ests = [ShotResult(circ.nqubits, shots, s, sample_counts(psi, shots, s, circ.nqubits)).probability(is_decay)[0]
                for s in range(200)]
        spreads.append(np.std(ests))
    assert spreads[0] / spreads[1] == pytest.approx(4.0, rel=0.3)


def test_counts_json_schema(prep_shots):
    body = json.loads(prep_shots.to_json({"seed": 11}))
    assert set(body) == {"header", "shots", "seed", "kept", "filters", "counts"}
    assert body["shots"] == 2000 and sum(body["counts"].values()) == body["kept"]


def test_decay_table_at_zero(params):
    curve = trotter_decay_table(params, 2, [0.0, 0.5])
    assert curve.probabilities[0] == pytest.approx(0.0, abs=1e-12)
    assert curve.extra["cnot"] == [9 + 214] * 2
