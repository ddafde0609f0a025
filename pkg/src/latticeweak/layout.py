"""Physical parameters and the qubit layouts of the lattice."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

QUARKS = ("u", "d")
LEPTONS = ("nu", "e")
ANTI = {"u": "ubar", "d": "dbar", "nu": "nubar", "e": "ebar"}
SPECIES = ("u", "d", "ubar", "dbar", "nu", "e", "nubar", "ebar")
COLORS = ("r", "g", "b")

# Per-site ordering of the layout that groups fermions with anti-fermions.
_INTERLEAVED_SITE = (
    [("u", c) for c in range(3)] + [("d", c) for c in range(3)] + [("nu", None), ("e", None)]
    + [("ubar", c) for c in range(3)] + [("dbar", c) for c in range(3)]
    + [("nubar", None), ("ebar", None)]
)
_QUARK_SITE = ([("u", c) for c in range(3)] + [("d", c) for c in range(3)]
               + [("ubar", c) for c in range(3)] + [("dbar", c) for c in range(3)])
_LEPTON_SITE = [("nu", None), ("e", None), ("nubar", None), ("ebar", None)]


@dataclass(frozen=True)
class LatticeParams:
    """Couplings in lattice units (a = 1)."""

    L: int = 1
    m_u: float = 0.9
    m_d: float = 2.1
    m_e: float = 0.0
    m_nu: float = 0.0
    g: float = 2.0
    G: float = 0.5
    m_M: float = 0.0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        for name in ("m_u", "m_d", "m_e", "m_nu", "g", "G", "m_M"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_(self, **kw) -> "LatticeParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeParams":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**data)


PRESETS = {
    "benchmark-l1": LatticeParams(L=1, m_u=0.9, m_d=2.1, m_e=0.0, m_nu=0.0, g=2.0, G=0.5),
}


def preset(name: str = "benchmark-l1") -> LatticeParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class TildeCoefficients:
    """Single-mode lepton energies and the combinations entering the decay operator.

    ``lambda_f = sqrt(1 + 4 m_f^2) / 2`` is the energy of the positive
    mode of the two-mode free lepton problem; ``c_e = lambda_e - m_e`` and
    ``c_nu = m_nu + lambda_nu``.
    """

    m_e: float
    m_nu: float
    lambda_e: float
    lambda_nu: float
    c_e: float
    c_nu: float

    @classmethod
    def from_params(cls, p: LatticeParams) -> "TildeCoefficients":
        le = 0.5 * math.sqrt(1 + 4 * p.m_e ** 2)
        ln = 0.5 * math.sqrt(1 + 4 * p.m_nu ** 2)
        return cls(p.m_e, p.m_nu, le, ln, le - p.m_e, p.m_nu + ln)

    @property
    def norm(self) -> float:
        return math.sqrt((1 - 4 * self.m_e * self.c_e) * (1 + 4 * self.m_nu * self.c_nu))

    @property
    def same_site(self) -> float:
        """Weight of the site-diagonal quark bilinears."""
        return (self.c_e + self.c_nu) / self.norm

    @property
    def cross_site(self) -> float:
        """Weight of the quark bilinears connecting the two half-sites."""
        return (1 + 4 * self.c_e * self.c_nu) / (2 * self.norm)


@dataclass(frozen=True)
class QubitLayout:
    """Map from (site, species, color) to qubit index.

    ``interleaved``: each spatial site holds 16 consecutive qubits,
    u(rgb) d(rgb) nu e ubar(rgb) dbar(rgb) nubar ebar.

    ``grouped``: quark blocks u(rgb) d(rgb) ubar(rgb) dbar(rgb) of every
    site first, then lepton blocks nu e nubar ebar of every site.  For
    L = 1 this is the 16-qubit register used for the single-site decay.
    """

    L: int
    scheme: str = "grouped"
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.scheme not in ("interleaved", "grouped"):
            raise ValueError(f"unknown layout scheme {self.scheme!r}")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        index = {}
        if self.scheme == "interleaved":
            for l in range(self.L):
                for k, (s, c) in enumerate(_INTERLEAVED_SITE):
                    index[(l, s, c)] = 16 * l + k
        else:
            for l in range(self.L):
                for k, (s, c) in enumerate(_QUARK_SITE):
                    index[(l, s, c)] = 12 * l + k
            for l in range(self.L):
                for k, (s, c) in enumerate(_LEPTON_SITE):
                    index[(l, s, c)] = 12 * self.L + 4 * l + k
        object.__setattr__(self, "_index", index)

    @property
    def nqubits(self) -> int:
        return 16 * self.L

    def index(self, site: int, species: str, color: int | str | None = None) -> int:
        if isinstance(color, str):
            color = COLORS.index(color)
        if species in ("u", "d", "ubar", "dbar"):
            if color is None:
                raise ValueError(f"quark species {species!r} needs a color")
        else:
            color = None
        try:
            return self._index[(site, species, color)]
        except KeyError:
            raise IndexError(f"no qubit for site={site} species={species!r} color={color!r}") from None

    def staggered(self, flavor: str, n: int, color: int | None = None) -> int:
        """Qubit of staggered half-site ``n`` (even: particle slot, odd: antiparticle slot)."""
        if not 0 <= n < 2 * self.L:
            raise IndexError(f"half-site {n} outside [0, {2 * self.L})")
        species = flavor if n % 2 == 0 else ANTI[flavor]
        return self.index(n // 2, species, color)

    def is_antiparticle_slot(self, qubit: int) -> bool:
        for (l, s, c), q in self._index.items():
            if q == qubit:
                return s.endswith("bar")
        raise IndexError(qubit)

    def qubits(self, species=None, site=None) -> list[int]:
        """Sorted qubits matching the given species (str or tuple) and site."""
        if isinstance(species, str):
            species = (species,)
        out = [q for (l, s, c), q in self._index.items()
               if (species is None or s in species) and (site is None or l == site)]
        return sorted(out)

    def label(self, qubit: int) -> str:
        for (l, s, c), q in self._index.items():
            if q == qubit:
                return f"{s}{'' if c is None else COLORS[c]}@{l}"
        raise IndexError(qubit)

    def relabel_to(self, other: "QubitLayout") -> list[int]:
        """Permutation sending each qubit of ``self`` to the same mode in ``other``."""
        if other.L != self.L:
            raise ValueError("layouts have different L")
        perm = [0] * self.nqubits
        for key, q in self._index.items():
            perm[q] = other._index[key]
        return perm
