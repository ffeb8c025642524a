"""Character-sum multisets X_n and Frobenius-twisted trace multisets X'_n.

X_n collects, over the nontrivial multiplicative characters chi of
F_{q^n}, the sums over y of chi(y (1 - x y) / (1 - y)), with chi(0) = 0.  X'_n evaluates Trace(R(z) R(z^q) ... R(z^{q^{n-1}})) at the
(q^n - 1)-st roots of unity other than 1, for a user-supplied 2x2 matrix
of rational functions R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, Degenerate
from .ff import FieldDesc, build_dlog, embed, extend_field
from .hecke import field_for_q

CHARSUM_BUDGET = 3000


def _x_n_histogram(F: FieldDesc, x_index: int, skip: int, literal: bool) -> np.ndarray:
    """h[a] = #{y : y(1-xy)/(1-y) = g^a} over the summation range."""
    tb = F.tables
    add, mul, neg, inv = tb.add, tb.mul, tb.neg, tb.inv
    dl = build_dlog(F, skip)
    excluded = (0, 1, x_index) if literal else (1,)
    y = np.array([v for v in range(F.size) if v not in excluded], dtype=np.int64)
    one_minus_xy = add[1, neg[mul[x_index, y]]]
    one_minus_y = add[1, neg[y]]
    arg = mul[mul[y, one_minus_xy], inv[one_minus_y]]
    arg = arg[arg != 0]  # chi(0) = 0
    return np.bincount(dl.log[arg], minlength=F.size - 1)


def x_n_by_character(q: int, n: int, x: int, skip: int = 0,
                     budget: int = CHARSUM_BUDGET, literal: bool = False) -> np.ndarray:
    """Array indexed by j = 0..q^n-2 of the sum for chi_j(g^a) = exp(2 pi i j a / (q^n-1)).

    Entry 0 is the trivial character and is not part of X_n.  The default
    range is every y != 1; y = 0 and y = 1/x contribute chi(0) = 0.  With
    ``literal`` the range is y not in {0, 1, x}, which drops the term at
    y = x and leaves chi(x(x+1)) - conj(chi(x(x+1))) as the imaginary part.
    """
    base = field_for_q(q)
    F = extend_field(base, n)
    if F.size > budget:
        raise BudgetExceeded("character-sum field", F.size, budget)
    if F.p == 2:
        raise ValueError("q must be odd")
    xe = base.element(x)
    if xe.index in (0, 1):
        raise ValueError("x must not be 0 or 1")
    h = _x_n_histogram(F, embed(xe, F).index, skip, literal)
    N = F.size - 1
    # sum_a h[a] exp(+2 pi i j a / N) for every j at once
    return np.fft.ifft(h) * N


@dataclass
class CharSumResult:
    q: int
    n: int
    values: list[complex]

    def to_json(self) -> dict:
        vals = sorted(self.values, key=lambda v: (v.real, v.imag))
        return {"q": self.q, "n": self.n, "size": len(vals),
                "values": [[v.real, v.imag] for v in vals]}


def x_n_set(q: int, n: int, x: int, skip: int = 0, literal: bool = False) -> CharSumResult:
    """The multiset X_n (q^n - 2 values); ``skip`` picks a later generator."""
    vals = x_n_by_character(q, n, x, skip, literal=literal)[1:]
    return CharSumResult(q, n, [complex(v) for v in vals])


@dataclass
class MatrixFunction:
    """2x2 matrix of rational functions; entries are (numerator, denominator)
    coefficient lists, lowest degree first, complex coefficients allowed."""

    entries: list[list[tuple[list, list]]]

    def __post_init__(self):
        if len(self.entries) != 2 or any(len(r) != 2 for r in self.entries):
            raise ValueError("matrix function must be 2x2")

    @classmethod
    def constant(cls, M) -> MatrixFunction:
        return cls([[([complex(M[i][j])], [1]) for j in range(2)] for i in range(2)])

    @classmethod
    def from_json(cls, data) -> MatrixFunction:
        def coeffs(lst):
            return [complex(*c) if isinstance(c, (list, tuple)) else complex(c) for c in lst]
        return cls([[(coeffs(e["num"]), coeffs(e.get("den", [1]))) for e in row] for row in data["entries"]])

    def __call__(self, z: complex, pole_tol: float = 1e-12) -> np.ndarray:
        out = np.empty((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                num, den = self.entries[i][j]
                d = np.polyval(list(reversed(den)), z)
                if abs(d) < pole_tol:
                    raise Degenerate(f"pole of R at z = {z}")
                out[i, j] = np.polyval(list(reversed(num)), z) / d
        return out


def xprime_n_set(R: MatrixFunction, q: int, n: int, budget: int = CHARSUM_BUDGET) -> CharSumResult:
    """Trace(R(z) R(z^q) ... R(z^{q^{n-1}})) over z^(q^n - 1) = 1, z != 1."""
    N = q**n - 1
    if N + 1 > budget:
        raise BudgetExceeded("root-of-unity count", N + 1, budget)
    vals = []
    for k in range(1, N):
        P = np.eye(2, dtype=complex)
        e = k
        for _ in range(n):
            # z^{q^i} computed from the exact exponent, not by repeated powering
            P = P @ R(np.exp(2j * math.pi * e / N))
            e = (e * q) % N
        vals.append(complex(np.trace(P)))
    return CharSumResult(q, n, vals)


@dataclass
class MatchReport:
    passed: bool
    max_discrepancy: float
    witness: complex | None
    pairs: list[tuple[complex, complex]]

    def to_json(self) -> dict:
        w = None if self.witness is None else [self.witness.real, self.witness.imag]
        return {"passed": self.passed, "max_discrepancy": self.max_discrepancy, "witness": w}


def compare_multisets(a, b, tol: float) -> MatchReport:
    """Greedy nearest matching of two equal-size multisets of complex numbers."""
    a = [complex(v) for v in a]
    b = [complex(v) for v in b]
    if len(a) != len(b):
        raise ValueError(f"multiset sizes differ: {len(a)} vs {len(b)}")
    free = np.ones(len(b), dtype=bool)
    barr = np.array(b, dtype=complex)
    worst, witness, pairs = 0.0, None, []
    for v in sorted(a, key=lambda c: (c.real, c.imag)):
        d = np.where(free, np.abs(barr - v), np.inf)
        j = int(np.argmin(d))
        free[j] = False
        pairs.append((v, b[j]))
        if d[j] > worst:
            worst, witness = float(d[j]), v
    return MatchReport(worst <= tol, worst, witness, pairs)
