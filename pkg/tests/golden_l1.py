"""Hand-expanded L = 1 spin Hamiltonian (grouped layout).

Each term is a product of single-qubit factors ``(symbol, qubit)`` with
symbols ``+``, ``-`` (spin ladders) and ``Z``.  These are typed in
independently of the builders and only used as a test oracle.
"""
import math

from latticeweak.pauli import OperatorSum, jw_ladder, multiply

N = 16


def product(*factors, coeff=1.0):
    op = OperatorSum.identity(N, coeff)
    for sym, q in factors:
        if sym == "Z":
            f = OperatorSum.single(N, {q: "Z"})
        else:
            f = jw_ladder(q, "raise" if sym == "+" else "lower", N)
        op = multiply(op, f)
    return op


def zs(*qs):
    return [("Z", q) for q in qs]


def quarks(m_u, m_d):
    z = lambda q: OperatorSum.single(N, {q: "Z"})
    op = 0.5 * m_u * (z(0) + z(1) + z(2) - z(6) - z(7) - z(8) + 6 * OperatorSum.identity(N))
    op = op + 0.5 * m_d * (z(3) + z(4) + z(5) - z(9) - z(10) - z(11) + 6 * OperatorSum.identity(N))
    for a in range(6):
        b = a + 6
        between = zs(*range(b - 1, a, -1))
        op = op - 0.5 * (product(("+", b), *between, ("-", a)) + product(("-", b), *between, ("+", a)))
    return op


def leptons(m_e, m_nu):
    z = lambda q: OperatorSum.single(N, {q: "Z"})
    return (0.25 * math.sqrt(1 + 4 * m_e ** 2) * (z(13) - z(15))
            + 0.25 * math.sqrt(1 + 4 * m_nu ** 2) * (z(12) - z(14)))


def glue(g, with_dd_self=True):
    zz = lambda a, b: OperatorSum.single(N, {a: "Z", b: "Z"})
    one = OperatorSum.identity(N)
    inner = (3 * one - zz(1, 0) - zz(2, 0) - zz(2, 1)) / 3
    inner = inner + product(("+", 4), ("-", 3), ("-", 1), ("+", 0)) + product(("-", 4), ("+", 3), ("+", 1), ("-", 0))
    inner = inner + product(("+", 5), ("Z", 4), ("-", 3), ("-", 2), ("Z", 1), ("+", 0))
    inner = inner + product(("-", 5), ("Z", 4), ("+", 3), ("+", 2), ("Z", 1), ("-", 0))
    inner = inner + product(("+", 5), ("-", 4), ("-", 2), ("+", 1)) + product(("-", 5), ("+", 4), ("+", 2), ("-", 1))
    inner = inner + (2 * zz(3, 0) + 2 * zz(4, 1) + 2 * zz(5, 2) - zz(5, 0) - zz(5, 1)
                     - zz(4, 2) - zz(4, 0) - zz(3, 1) - zz(3, 2)) / 12
    if with_dd_self:
        inner = inner + (3 * one - zz(4, 3) - zz(5, 3) - zz(5, 4)) / 3
    return 0.5 * g ** 2 * inner


def beta_tilde(G, same, cross, valence_only=False):
    """Tilde-basis decay term: lepton pair creation times d -> u quark hops, plus h.c.

    Of each ladder pair listed for a quark bilinear only the orientation with
    sigma+ on the up-type qubit conserves charge next to sigma-_14 sigma+_13.
    """
    up = {0, 1, 2, 6, 7, 8}

    def hop(a, b):
        lo, hi = min(a, b), max(a, b)
        u, d = (a, b) if a in up else (b, a)
        return product(("+", u), *zs(*range(hi - 1, lo, -1)), ("-", d))

    same_pairs = [(0, 3), (1, 4), (2, 5)] + ([] if valence_only else [(6, 9), (7, 10), (8, 11)])
    cross_pairs = [] if valence_only else [(0, 9), (1, 10), (2, 11), (6, 3), (7, 4), (8, 5)]
    quark = same * sum((hop(a, b) for a, b in same_pairs), OperatorSum.zero(N))
    quark = quark - cross * sum((hop(a, b) for a, b in cross_pairs), OperatorSum.zero(N))
    lep = product(("-", 14), ("+", 13))
    return (G / math.sqrt(2) * multiply(lep, quark)).hc()
