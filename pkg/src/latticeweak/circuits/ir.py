"""Gate-list circuit representation and its text serialization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

KINDS = {"H": (1, False), "X": (1, False), "RY": (1, True), "RZ": (1, True),
         "CNOT": (2, False), "RESET": (1, False)}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity, has_angle = KINDS[self.kind]
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated operand in {self.kind}{qubits}")
        if has_angle:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def inverse(self) -> "Gate":
        if self.kind == "RESET":
            raise ValueError("RESET has no inverse")
        if self.kind in ("RY", "RZ"):
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def to_text(self) -> str:
        parts = [self.kind] + [str(q) for q in self.qubits]
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


@dataclass
class Circuit:
    nqubits: int
    gates: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, kind: str, *qubits, angle: float | None = None) -> "Circuit":
        g = Gate(kind, qubits, angle)
        if max(g.qubits) >= self.nqubits or min(g.qubits) < 0:
            raise ValueError(f"gate {g.to_text()} outside a {self.nqubits}-qubit register")
        self.gates.append(g)
        return self

    def h(self, q):
        return self.append("H", q)

    def x(self, q):
        return self.append("X", q)

    def ry(self, q, angle):
        return self.append("RY", q, angle=angle)

    def rz(self, q, angle):
        return self.append("RZ", q, angle=angle)

    def cx(self, c, t):
        return self.append("CNOT", c, t)

    def extend(self, other: "Circuit") -> "Circuit":
        if other.nqubits > self.nqubits:
            raise ValueError("cannot extend with a wider circuit")
        self.gates.extend(other.gates)
        return self

    def inverse(self) -> "Circuit":
        return Circuit(self.nqubits, [g.inverse() for g in reversed(self.gates)], dict(self.metadata))

    def copy(self) -> "Circuit":
        return Circuit(self.nqubits, list(self.gates), dict(self.metadata))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    @property
    def cnot_count(self) -> int:
        return self.count("CNOT")

    def counts(self) -> dict:
        out = {}
        for g in self.gates:
            out[g.kind] = out.get(g.kind, 0) + 1
        return dict(sorted(out.items()))

    def depth(self) -> int:
        level = [0] * self.nqubits
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def report(self) -> dict:
        return {"nqubits": self.nqubits, "gates": len(self.gates), "depth": self.depth(),
                "counts": self.counts(), "cnot": self.cnot_count, **self.metadata}

    def to_text(self) -> str:
        lines = [f"QUBITS {self.nqubits}"] + [g.to_text() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        circ = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "QUBITS":
                    circ = cls(int(parts[1]))
                    continue
                if circ is None:
                    raise ValueError("missing QUBITS header")
                kind = parts[0]
                arity, has_angle = KINDS[kind]
                qubits = [int(x) for x in parts[1:1 + arity]]
                angle = float(parts[1 + arity]) if has_angle else None
                if len(parts) != 1 + arity + (1 if has_angle else 0):
                    raise ValueError("wrong number of fields")
                circ.append(kind, *qubits, angle=angle)
            except (KeyError, IndexError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}: {raw!r}") from None
        if circ is None:
            raise ValueError("empty circuit text")
        return circ
