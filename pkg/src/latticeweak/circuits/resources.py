"""Per-Trotter-step gate estimates for L sites with the leptons at the end of the register."""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ResourceEstimate:
    L: int
    rz: int
    hadamard: int
    cnot: int
    multi_qubit_terms: int
    beta_rz: int
    beta_hadamard: int
    beta_cnot: int

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{k} must be a non-negative integer, got {v!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def _check_L(L) -> int:
    if isinstance(L, bool) or int(L) != L or L < 1:
        raise ValueError(f"L must be an integer >= 1, got {L!r}")
    return int(L)


def resource_estimate(L: int) -> ResourceEstimate:
    """Closed-form counts for one Trotter step of the full Hamiltonian.

    The decay operator is local, so its cost is linear in L; the quadratic
    terms come from the long-range glue interaction.
    """
    L = _check_L(L)
    return ResourceEstimate(
        L=L,
        rz=264 * L * L - 54 * L + 77,
        hadamard=48 * L * L + 20 * L + 2,
        cnot=368 * L * L + 120 * L + 74,
        multi_qubit_terms=96 * L * L - 68 * L + 22,
        beta_rz=192 * L,
        beta_hadamard=48 * L,
        beta_cnot=436 * L,
    )


def multi_qubit_terms_breakdown(L: int) -> dict:
    """Split of the multi-qubit term count by Hamiltonian piece (closed forms)."""
    L = _check_L(L)
    return {
        "glue_zz": 72 * L * L - 78 * L + 21,
        "glue_exchange": 24 * L * L - 30 * L + 9,
        "hopping": 16 * L - 8,
        "beta": 24 * L,
    }


def counted_multi_qubit_terms(L: int) -> dict:
    """Multi-qubit term counts obtained by building the Hamiltonian pieces.

    Counts ``A + A^dagger`` once.  Cost grows quickly with L; intended for
    the small lattices used to check the closed forms.
    """
    from ..hamiltonians import (build_h_beta, build_h_glue, build_h_leptons, build_h_quarks,
                                multi_qubit_term_count)
    from ..layout import QubitLayout, preset

    L = _check_L(L)
    p = preset().with_(L=L)
    layout = QubitLayout(L, "grouped")
    return {
        "quarks": multi_qubit_term_count(build_h_quarks(p, layout)),
        "glue": multi_qubit_term_count(build_h_glue(p, layout)),
        "leptons": multi_qubit_term_count(build_h_leptons(p, layout, "standard")),
        "beta": multi_qubit_term_count(build_h_beta(p, layout, "standard")),
    }
