"""Weighted Pauli strings, Jordan-Wigner ladder operators and matrix rendering.

Bit ordering: qubit ``k`` is bit ``k`` of a computational-basis index, so
qubit 0 is the least significant bit.  Pauli labels are written with
qubit 0 as the *rightmost* character ("IIIZ" is Z on qubit 0), which is
also the layout of the text dump format.

Internally a Pauli string is a pair of integer bit masks ``(x, z)``; the
operator it stands for is ``i**popcount(x & z) * X^x Z^z`` so that a
qubit with both bits set is a ``Y``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

DROP_TOL = 1e-12
DENSE_CAP = 14

_SYMBOL = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _SYMBOL.items()}


def _popcount(v: int) -> int:
    return bin(v).count("1")


def label_to_masks(label: str) -> tuple[int, int]:
    """Convert a label such as ``"XIZY"`` (qubit 0 rightmost) to masks."""
    x = z = 0
    for k, ch in enumerate(reversed(label.upper())):
        try:
            bx, bz = _BITS[ch]
        except KeyError:
            raise ValueError(f"bad Pauli symbol {ch!r} in {label!r}") from None
        x |= bx << k
        z |= bz << k
    return x, z


def masks_to_label(x: int, z: int, nqubits: int) -> str:
    return "".join(_SYMBOL[((x >> k) & 1, (z >> k) & 1)] for k in reversed(range(nqubits)))


def _mul_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """Product of two unit Pauli strings: returns (phase, x, z)."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    power = (_popcount(x1 & z1) + _popcount(x2 & z2) - _popcount(x3 & z3)
             + 2 * _popcount(z1 & x2)) % 4
    return (1, 1j, -1, -1j)[power], x3, z3


@dataclass(frozen=True)
class PauliTerm:
    """A single weighted Pauli string."""

    coefficient: complex
    paulis: str

    @property
    def nqubits(self) -> int:
        return len(self.paulis)

    def support(self) -> list[int]:
        """Qubits on which the string acts non-trivially."""
        n = len(self.paulis)
        return [n - 1 - i for i, ch in enumerate(self.paulis) if ch != "I"][::-1]


class OperatorSum:
    """Sum of weighted Pauli strings on a fixed number of qubits.

    Instances behave as immutable values: arithmetic returns new objects.
    The constructor normalizes (merges duplicate strings and drops
    coefficients with modulus below ``tol``).
    """

    __slots__ = ("nqubits", "_data")

    def __init__(self, nqubits: int, data: Mapping[tuple[int, int], complex] | None = None,
                 tol: float = DROP_TOL):
        if nqubits < 0:
            raise ValueError("nqubits must be non-negative")
        self.nqubits = int(nqubits)
        clean: dict[tuple[int, int], complex] = {}
        limit = 1 << self.nqubits
        for key, c in (data or {}).items():
            if key[0] >= limit or key[1] >= limit:
                raise ValueError(f"Pauli mask {key} exceeds {nqubits} qubits")
            c = complex(c)
            if not np.isfinite(c):
                raise ValueError("non-finite coefficient")
            if abs(c) > tol:
                clean[key] = c
        self._data = clean

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, nqubits: int) -> "OperatorSum":
        return cls(nqubits)

    @classmethod
    def identity(cls, nqubits: int, coeff: complex = 1.0) -> "OperatorSum":
        return cls(nqubits, {(0, 0): coeff})

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "OperatorSum":
        return cls(len(label), {label_to_masks(label): coeff})

    @classmethod
    def single(cls, nqubits: int, ops: Mapping[int, str], coeff: complex = 1.0) -> "OperatorSum":
        """Product of single-qubit Paulis, e.g. ``single(4, {0: "Z", 3: "X"})``."""
        x = z = 0
        for q, ch in ops.items():
            if not 0 <= q < nqubits:
                raise IndexError(f"qubit {q} out of range for {nqubits} qubits")
            bx, bz = _BITS[ch.upper()]
            x |= bx << q
            z |= bz << q
        return cls(nqubits, {(x, z): coeff})

    @classmethod
    def from_terms(cls, terms: Iterable[PauliTerm], nqubits: int | None = None) -> "OperatorSum":
        terms = list(terms)
        if nqubits is None:
            if not terms:
                raise ValueError("cannot infer nqubits from an empty term list")
            nqubits = terms[0].nqubits
        data: dict[tuple[int, int], complex] = {}
        for t in terms:
            if t.nqubits != nqubits:
                raise ValueError("mixed qubit counts")
            key = label_to_masks(t.paulis)
            data[key] = data.get(key, 0) + t.coefficient
        return cls(nqubits, data)

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> list[PauliTerm]:
        """Terms sorted by Pauli label (canonical order)."""
        out = [PauliTerm(c, masks_to_label(x, z, self.nqubits)) for (x, z), c in self._data.items()]
        out.sort(key=lambda t: t.paulis)
        return out

    def items(self):
        return self._data.items()

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self):
        return iter(self.terms)

    def coefficient(self, label: str) -> complex:
        if len(label) != self.nqubits:
            raise ValueError("label length does not match nqubits")
        return self._data.get(label_to_masks(label), 0j)

    def constant(self) -> complex:
        return self._data.get((0, 0), 0j)

    def is_diagonal(self) -> bool:
        return all(x == 0 for x, _ in self._data)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        # Pauli strings are hermitian, so the sum is iff every coefficient is real.
        return all(abs(c.imag) <= tol for c in self._data.values())

    def max_weight(self) -> int:
        return max((_popcount(x | z) for x, z in self._data), default=0)

    # -- algebra ----------------------------------------------------------
    def _check(self, other: "OperatorSum") -> None:
        if not isinstance(other, OperatorSum):
            raise TypeError(f"expected OperatorSum, got {type(other).__name__}")
        if other.nqubits != self.nqubits:
            raise ValueError(f"qubit count mismatch: {self.nqubits} vs {other.nqubits}")

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = OperatorSum.identity(self.nqubits, other)
        self._check(other)
        data = dict(self._data)
        for k, c in other._data.items():
            data[k] = data.get(k, 0) + c
        return OperatorSum(self.nqubits, data)

    __radd__ = __add__

    def __neg__(self):
        return OperatorSum(self.nqubits, {k: -c for k, c in self._data.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            return multiply(self, other)
        c = complex(other)
        return OperatorSum(self.nqubits, {k: c * v for k, v in self._data.items()})

    def __rmul__(self, other):
        return self * other

    def __matmul__(self, other):
        return multiply(self, other)

    def __truediv__(self, other):
        return self * (1.0 / complex(other))

    def dagger(self) -> "OperatorSum":
        return OperatorSum(self.nqubits, {k: c.conjugate() for k, c in self._data.items()})

    def hc(self) -> "OperatorSum":
        """Return ``self + self^dagger``."""
        return self + self.dagger()

    def real_part(self) -> "OperatorSum":
        """Drop imaginary residue of coefficients (use on hermitian sums)."""
        return OperatorSum(self.nqubits, {k: c.real for k, c in self._data.items()})

    def normalize(self, tol: float = DROP_TOL) -> "OperatorSum":
        return OperatorSum(self.nqubits, self._data, tol=tol)

    def close_to(self, other: "OperatorSum", tol: float = 1e-12) -> bool:
        self._check(other)
        diff = self - other
        return all(abs(c) <= tol for c in diff._data.values())

    def __eq__(self, other):
        if not isinstance(other, OperatorSum) or other.nqubits != self.nqubits:
            return NotImplemented
        return self.close_to(other, 0.0)

    def __hash__(self):
        return hash((self.nqubits, frozenset(self._data.items())))

    def __repr__(self):
        body = " + ".join(f"({t.coefficient:.6g})*{t.paulis}" for t in self.terms[:6])
        more = "" if len(self) <= 6 else f" + ... [{len(self)} terms]"
        return f"OperatorSum({self.nqubits}: {body or '0'}{more})"

    # -- embedding ----------------------------------------------------------
    def extend(self, nqubits: int) -> "OperatorSum":
        """Embed in a larger register (new qubits act as identity)."""
        if nqubits < self.nqubits:
            raise ValueError("cannot shrink a register")
        return OperatorSum(nqubits, self._data)

    def permute(self, mapping: Mapping[int, int] | list[int], nqubits: int | None = None) -> "OperatorSum":
        """Relabel qubit ``k`` as ``mapping[k]``."""
        n = self.nqubits if nqubits is None else nqubits
        data = {}
        for (x, z), c in self._data.items():
            nx = nz = 0
            for k in range(self.nqubits):
                if (x >> k) & 1:
                    nx |= 1 << mapping[k]
                if (z >> k) & 1:
                    nz |= 1 << mapping[k]
            data[(nx, nz)] = c
        return OperatorSum(n, data)

    # -- matrices ---------------------------------------------------------
    def apply_to_basis(self, states: np.ndarray):
        """Yield ``(amplitude_array, target_states)`` for each term acting on ``states``."""
        states = np.asarray(states, dtype=np.int64)
        for (x, z), c in self._data.items():
            par = np.zeros(states.shape, dtype=np.int64)
            zz = z
            k = 0
            while zz:
                if zz & 1:
                    par ^= (states >> k) & 1
                zz >>= 1
                k += 1
            amp = c * (1j ** _popcount(x & z)) * (1 - 2 * par)
            yield amp, states ^ x

    def diagonal_values(self, states: np.ndarray) -> np.ndarray:
        """Eigenvalues of a diagonal operator on the given basis states."""
        if not self.is_diagonal():
            raise ValueError("operator is not diagonal")
        states = np.asarray(states, dtype=np.int64)
        out = np.zeros(states.shape, dtype=complex)
        for amp, _ in self.apply_to_basis(states):
            out += amp
        return out

    def to_sparse(self, basis: np.ndarray | None = None) -> sp.csr_matrix:
        """Sparse matrix on the full space or restricted to ``basis``.

        ``basis`` must be a strictly increasing array of basis-state indices;
        amplitude leaving the subspace is discarded (callers check closure).
        """
        if basis is None:
            basis = np.arange(1 << self.nqubits, dtype=np.int64)
        basis = np.asarray(basis, dtype=np.int64)
        dim = len(basis)
        rows, cols, vals = [], [], []
        col_idx = np.arange(dim)
        for amp, target in self.apply_to_basis(basis):
            pos = np.searchsorted(basis, target)
            pos = np.minimum(pos, dim - 1)
            ok = basis[pos] == target
            rows.append(pos[ok])
            cols.append(col_idx[ok])
            vals.append(amp[ok])
        if not rows:
            return sp.csr_matrix((dim, dim), dtype=complex)
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(dim, dim))


def dense_matrix(op: OperatorSum, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense ``2^n x 2^n`` matrix of ``op`` (qubit 0 = least significant bit)."""
    if op.nqubits > cap:
        raise ValueError(f"{op.nqubits} qubits exceeds dense cap {cap}; use a sector projection")
    return op.to_sparse().toarray()


def multiply(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    """Operator product ``a @ b`` with exact Pauli phase tracking."""
    a._check(b)
    data: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a._data.items():
        for (x2, z2), c2 in b._data.items():
            ph, x3, z3 = _mul_masks(x1, z1, x2, z2)
            key = (x3, z3)
            data[key] = data.get(key, 0) + ph * c1 * c2
    return OperatorSum(a.nqubits, data)


def commutator(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    return multiply(a, b) - multiply(b, a)


def terms_commute(x1: int, z1: int, x2: int, z2: int) -> bool:
    return (_popcount(x1 & z2) + _popcount(z1 & x2)) % 2 == 0


# -- Jordan-Wigner ------------------------------------------------------------

def jw_ladder(qubit: int, kind: str, nqubits: int) -> OperatorSum:
    """Spin ladder operator on one qubit: ``raise`` = (X + iY)/2, ``lower`` = (X - iY)/2.

    No parity string is attached.
    """
    if not 0 <= qubit < nqubits:
        raise IndexError(f"qubit {qubit} out of range for {nqubits} qubits")
    sign = {"raise": 1, "+": 1, "lower": -1, "-": -1}.get(kind)
    if sign is None:
        raise ValueError(f"kind must be 'raise' or 'lower', not {kind!r}")
    bit = 1 << qubit
    return OperatorSum(nqubits, {(bit, 0): 0.5, (bit, bit): 0.5j * sign})


def number_op(qubit: int, nqubits: int) -> OperatorSum:
    """Mode occupation (1 + Z)/2: a mode is occupied when its spin is up."""
    return OperatorSum(nqubits, {(0, 0): 0.5, (0, 1 << qubit): 0.5})


def fermion_op(qubit: int, nqubits: int, dagger: bool) -> OperatorSum:
    """Jordan-Wigner fermion operator for the mode stored on ``qubit``.

    The parity string is ``prod_{j<qubit} (-Z_j)``, i.e. (-1)^(occupation)
    of the preceding modes, with creation = spin raising.
    """
    low = (1 << qubit) - 1
    ladder = jw_ladder(qubit, "raise" if dagger else "lower", nqubits)
    sign = -1.0 if qubit % 2 else 1.0
    return multiply(OperatorSum(nqubits, {(0, low): sign}), ladder)


def hopping(i: int, j: int, nqubits: int) -> OperatorSum:
    """Bilinear ``c_i^dagger c_j`` for modes on qubits ``i`` and ``j``."""
    return multiply(fermion_op(i, nqubits, True), fermion_op(j, nqubits, False))


# -- text dump ------------------------------------------------------------------

def dump_terms(op: OperatorSum) -> str:
    """One term per line: ``<re> <im> <label>``, qubit 0 rightmost."""
    return "".join(f"{t.coefficient.real:.17g} {t.coefficient.imag:.17g} {t.paulis}\n" for t in op.terms)


def load_terms(text: str, nqubits: int | None = None) -> OperatorSum:
    terms = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<re> <im> <paulis>'")
        terms.append(PauliTerm(complex(float(parts[0]), float(parts[1])), parts[2]))
    if not terms:
        if nqubits is None:
            raise ValueError("empty dump and no nqubits given")
        return OperatorSum.zero(nqubits)
    return OperatorSum.from_terms(terms, nqubits)
