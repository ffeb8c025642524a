"""Weighted spans of affine constructible sets over F_q and their point counts.

A span [A -> X x Y] between equation-defined sets becomes, at level n, the
integer matrix phi_n whose (x, y) entry counts the F_{q^n}-points of A over
(x, y).  Composition is the fibered product, and phi_n turns it into the
matrix product (M N)_{x,z} = sum_y M_{x,y} N_{y,z}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import exactlin
from .errors import BudgetExceeded, Degenerate, FieldMismatch
from .ff import FieldDesc, extend_field, make_field, sqrt_count
from .hecke import f_t_eval, field_for_q

POINT_BUDGET = 10**7
_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# polynomials over F_q
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """Multivariate polynomial over a base field; coefficients are field indices."""

    field: FieldDesc
    nvars: int
    terms: tuple[tuple[tuple[int, ...], int], ...] = ()

    @classmethod
    def make(cls, F: FieldDesc, nvars: int, terms) -> Poly:
        acc: dict[tuple[int, ...], int] = {}
        for exps, c in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError("exponent vector has the wrong length")
            acc[exps] = F.add(acc.get(exps, 0), int(c))
        return cls(F, nvars, tuple(sorted((e, c) for e, c in acc.items() if c)))

    @classmethod
    def const(cls, F: FieldDesc, nvars: int, c) -> Poly:
        return cls.make(F, nvars, [((0,) * nvars, F(c).index)])

    @classmethod
    def var(cls, F: FieldDesc, nvars: int, i: int) -> Poly:
        e = [0] * nvars
        e[i] = 1
        return cls.make(F, nvars, [(e, 1)])

    def _coerce(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.field != self.field or other.nvars != self.nvars:
                raise FieldMismatch("polynomials over different rings")
            return other
        return Poly.const(self.field, self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        return Poly.make(self.field, self.nvars, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return Poly(F, self.nvars, tuple((e, F.neg(c)) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        F = self.field
        out = []
        for (e1, c1), (e2, c2) in itertools.product(self.terms, other.terms):
            out.append((tuple(a + b for a, b in zip(e1, e2)), F.mul(c1, c2)))
        return Poly.make(F, self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(self.field, self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, offset: int, nvars: int) -> Poly:
        """Rename variable i to i + offset inside a ring with ``nvars`` variables."""
        terms = []
        for e, c in self.terms:
            new = [0] * nvars
            new[offset:offset + self.nvars] = e
            terms.append((new, c))
        return Poly.make(self.field, nvars, terms)

    def evaluate(self, E: FieldDesc, pts: np.ndarray) -> np.ndarray:
        """Values at rows of ``pts`` (indices into the extension E)."""
        n = pts.shape[0]
        tb = E.tables
        dl = E.dlog
        order = E.size - 1
        out = np.zeros(n, dtype=np.int64)
        for exps, c in self.terms:
            term = np.full(n, c, dtype=np.int64)  # base index == extension index
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                col = pts[:, i]
                pw = np.where(col == 0, 0, dl.exp[(dl.log[col] * e) % order])
                term = tb.mul[term, pw]
            out = tb.add[out, term]
        return out

    def to_json(self) -> list:
        return [[list(e), c] for e, c in self.terms]

    @classmethod
    def from_json(cls, F: FieldDesc, nvars: int, data) -> Poly:
        return cls.make(F, nvars, [(e, c) for e, c in data])


# ---------------------------------------------------------------------------
# constructible sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructibleSet:
    """{x in A^nvars : every equation vanishes, every inequation does not}."""

    field: FieldDesc
    nvars: int
    equations: tuple[Poly, ...] = ()
    inequations: tuple[Poly, ...] = ()

    @classmethod
    def affine(cls, F: FieldDesc, nvars: int) -> ConstructibleSet:
        return cls(F, nvars)

    @classmethod
    def point(cls, F: FieldDesc) -> ConstructibleSet:
        return cls(F, 0)

    def variables(self) -> list[Poly]:
        return [Poly.var(self.field, self.nvars, i) for i in range(self.nvars)]

    def with_equation(self, f: Poly) -> ConstructibleSet:
        return ConstructibleSet(self.field, self.nvars, self.equations + (f,), self.inequations)

    def with_inequation(self, f: Poly) -> ConstructibleSet:
        return ConstructibleSet(self.field, self.nvars, self.equations, self.inequations + (f,))

    def product(self, other: ConstructibleSet) -> ConstructibleSet:
        if other.field != self.field:
            raise FieldMismatch("product of sets over different fields")
        k = self.nvars + other.nvars
        eqs = tuple(f.shift(0, k) for f in self.equations) + tuple(f.shift(self.nvars, k) for f in other.equations)
        ins = tuple(f.shift(0, k) for f in self.inequations) + tuple(
            f.shift(self.nvars, k) for f in other.inequations)
        return ConstructibleSet(self.field, k, eqs, ins)

    def to_json(self) -> dict:
        return {"nvars": self.nvars, "equations": [f.to_json() for f in self.equations],
                "inequations": [f.to_json() for f in self.inequations]}

    @classmethod
    def from_json(cls, F: FieldDesc, data) -> ConstructibleSet:
        k = data["nvars"]
        return cls(F, k, tuple(Poly.from_json(F, k, f) for f in data.get("equations", [])),
                   tuple(Poly.from_json(F, k, f) for f in data.get("inequations", [])))


def _candidate_chunks(s: int, k: int):
    total = s**k
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cols = []
        for i in range(k):
            cols.append((codes // s ** (k - 1 - i)) % s)
        yield np.stack(cols, axis=1) if k else np.zeros((len(codes), 0), dtype=np.int64)


def points(X: ConstructibleSet, n: int = 1, budget: int = POINT_BUDGET) -> np.ndarray:
    """F_{q^n}-points as rows of field indices, in lexicographic order."""
    E = extend_field(X.field, n)
    s = E.size
    if s**X.nvars > budget:
        raise BudgetExceeded("point enumeration", s**X.nvars, budget)
    if X.nvars == 0:
        return np.zeros((1, 0), dtype=np.int64)
    keep = []
    for pts in _candidate_chunks(s, X.nvars):
        mask = np.ones(len(pts), dtype=bool)
        for f in X.equations:
            mask &= f.evaluate(E, pts) == 0
        for f in X.inequations:
            mask &= f.evaluate(E, pts) != 0
        keep.append(pts[mask])
    return np.concatenate(keep, axis=0)


def point_count(X: ConstructibleSet, n: int = 1) -> int:
    return len(points(X, n))


def _codes(pts: np.ndarray, s: int) -> np.ndarray:
    code = np.zeros(len(pts), dtype=np.int64)
    for i in range(pts.shape[1]):
        code = code * s + pts[:, i]
    return code


# ---------------------------------------------------------------------------
# spans and correspondences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Span:
    """[A -> X x Y] with polynomial projections and an integer weight."""

    source: ConstructibleSet
    target: ConstructibleSet
    apex: ConstructibleSet
    to_source: tuple[Poly, ...]
    to_target: tuple[Poly, ...]
    weight: int = 1

    def __post_init__(self):
        if len(self.to_source) != self.source.nvars or len(self.to_target) != self.target.nvars:
            raise ValueError("projection length does not match the variable count")
        for f in self.to_source + self.to_target:
            if f.nvars != self.apex.nvars:
                raise ValueError("projection is not a polynomial in the apex variables")

    def scaled(self, w: int) -> Span:
        return Span(self.source, self.target, self.apex, self.to_source, self.to_target, self.weight * w)


@dataclass(frozen=True)
class Correspondence:
    source: ConstructibleSet
    target: ConstructibleSet
    spans: tuple[Span, ...]

    def __post_init__(self):
        for sp in self.spans:
            if sp.source != self.source or sp.target != self.target:
                raise ValueError("span signature differs from the correspondence")

    @classmethod
    def of(cls, *spans: Span) -> Correspondence:
        if not spans:
            raise ValueError("need at least one span")
        return cls(spans[0].source, spans[0].target, tuple(spans))

    def __add__(self, other: Correspondence) -> Correspondence:
        if (other.source, other.target) != (self.source, self.target):
            raise ValueError("signature mismatch")
        return Correspondence(self.source, self.target, self.spans + other.spans)

    def scaled(self, w: int) -> Correspondence:
        return Correspondence(self.source, self.target, tuple(sp.scaled(w) for sp in self.spans))


def correspondence_to_json(c: Correspondence) -> dict:
    F = c.source.field
    return {"field": F.to_json(), "source": c.source.to_json(), "target": c.target.to_json(),
            "spans": [{"apex": sp.apex.to_json(), "to_source": [f.to_json() for f in sp.to_source],
                       "to_target": [f.to_json() for f in sp.to_target], "weight": sp.weight}
                      for sp in c.spans]}


def correspondence_from_json(data) -> Correspondence:
    """Inverse of :func:`correspondence_to_json`; ``field`` may also be a plain q."""
    F = field_for_q(data["field"]) if isinstance(data["field"], int) else FieldDesc.from_json(data["field"])
    X = ConstructibleSet.from_json(F, data["source"])
    Y = ConstructibleSet.from_json(F, data.get("target", data["source"]))
    spans = []
    for sp in data["spans"]:
        A = ConstructibleSet.from_json(F, sp["apex"])
        spans.append(Span(X, Y, A, tuple(Poly.from_json(F, A.nvars, f) for f in sp["to_source"]),
                          tuple(Poly.from_json(F, A.nvars, f) for f in sp["to_target"]), int(sp.get("weight", 1))))
    return Correspondence(X, Y, tuple(spans))


def random_poly(rng: np.random.Generator, F: FieldDesc, nvars: int, degree: int = 2, terms: int = 3) -> Poly:
    out = []
    for _ in range(terms):
        e = [0] * nvars
        for _ in range(int(rng.integers(0, degree + 1))):
            e[int(rng.integers(0, nvars))] += 1
        out.append((e, int(rng.integers(1, F.size))))
    return Poly.make(F, nvars, out)


def random_span(rng: np.random.Generator, F: FieldDesc, X: ConstructibleSet | None = None,
                Y: ConstructibleSet | None = None, apex_vars: int = 2) -> Span:
    """A seeded span between affine lines (by default) through a random curve or plane."""
    X = X or ConstructibleSet.affine(F, 1)
    Y = Y or X
    if X.equations or X.inequations or Y.equations or Y.inequations:
        raise ValueError("random spans need affine source and target")
    A = ConstructibleSet.affine(F, apex_vars)
    if rng.random() < 0.5:
        A = A.with_equation(random_poly(rng, F, apex_vars))
    if rng.random() < 0.3:
        A = A.with_inequation(random_poly(rng, F, apex_vars, 1, 2))
    ps = tuple(random_poly(rng, F, apex_vars) for _ in range(X.nvars))
    pt = tuple(random_poly(rng, F, apex_vars) for _ in range(Y.nvars))
    return Span(X, Y, A, ps, pt, int(rng.choice([-2, -1, 1, 2, 3])))


def _project(E: FieldDesc, polys, pts: np.ndarray) -> np.ndarray:
    if not polys:
        return np.zeros((len(pts), 0), dtype=np.int64)
    return np.stack([f.evaluate(E, pts) for f in polys], axis=1)


def _locate(E: FieldDesc, where: np.ndarray, target_pts: np.ndarray) -> np.ndarray:
    s = E.size
    tcodes = _codes(target_pts, s)
    wcodes = _codes(where, s)
    pos = np.searchsorted(tcodes, wcodes)
    pos = np.minimum(pos, len(tcodes) - 1)
    if len(wcodes) and not np.array_equal(tcodes[pos], wcodes):
        raise ValueError("a projection leaves its declared set")
    return pos


def phi_n(c: Correspondence | Span, n: int = 1, budget: int = POINT_BUDGET) -> np.ndarray:
    """Integer matrix (points of X) x (points of Y) of weighted fiber counts."""
    if isinstance(c, Span):
        c = Correspondence.of(c)
    E = extend_field(c.source.field, n)
    Xp = points(c.source, n, budget)
    Yp = points(c.target, n, budget)
    M = np.zeros((len(Xp), len(Yp)), dtype=object)
    for sp in c.spans:
        A = points(sp.apex, n, budget)
        if not len(A):
            continue
        i = _locate(E, _project(E, sp.to_source, A), Xp)
        j = _locate(E, _project(E, sp.to_target, A), Yp)
        counts = np.zeros((len(Xp), len(Yp)), dtype=np.int64)
        np.add.at(counts, (i, j), 1)
        M = M + counts.astype(object) * sp.weight
    return M


def _compose_spans(s1: Span, s2: Span) -> Span:
    F = s1.apex.field
    ka, kb = s1.apex.nvars, s2.apex.nvars
    k = ka + kb
    eqs = [f.shift(0, k) for f in s1.apex.equations] + [f.shift(ka, k) for f in s2.apex.equations]
    ins = [f.shift(0, k) for f in s1.apex.inequations] + [f.shift(ka, k) for f in s2.apex.inequations]
    # fibered product over Y: the two middle projections agree
    for f, g in zip(s1.to_target, s2.to_source):
        eqs.append(f.shift(0, k) - g.shift(ka, k))
    apex = ConstructibleSet(F, k, tuple(eqs), tuple(ins))
    return Span(s1.source, s2.target, apex, tuple(f.shift(0, k) for f in s1.to_source),
                tuple(g.shift(ka, k) for g in s2.to_target), s1.weight * s2.weight)


def compose(c1: Correspondence, c2: Correspondence) -> Correspondence:
    """c1: X -> Y then c2: Y -> Z, via [A x_Y B -> X x Z]."""
    if c1.target != c2.source:
        raise ValueError("middle signatures do not match")
    spans = tuple(_compose_spans(a, b) for a in c1.spans for b in c2.spans)
    return Correspondence(c1.source, c2.target, spans)


def tensor(c1: Correspondence, c2: Correspondence) -> Correspondence:
    """Exterior product X1 x X2 -> Y1 x Y2."""
    out = []
    for a in c1.spans:
        for b in c2.spans:
            ka, kb = a.apex.nvars, b.apex.nvars
            k = ka + kb
            apex = a.apex.product(b.apex)
            out.append(Span(a.source.product(b.source), a.target.product(b.target), apex,
                            tuple(f.shift(0, k) for f in a.to_source) + tuple(g.shift(ka, k) for g in b.to_source),
                            tuple(f.shift(0, k) for f in a.to_target) + tuple(g.shift(ka, k) for g in b.to_target),
                            a.weight * b.weight))
    return Correspondence(out[0].source, out[0].target, tuple(out))


def graph(X: ConstructibleSet, Y: ConstructibleSet, f: tuple[Poly, ...], weight: int = 1) -> Correspondence:
    """Graph of a polynomial map X -> Y: apex X, projections (id, f)."""
    return Correspondence.of(Span(X, Y, X, tuple(X.variables()), tuple(f), weight))


def identity(X: ConstructibleSet) -> Correspondence:
    """The diagonal X -> X x X."""
    return graph(X, X, tuple(X.variables()))


def frobenius_graph(X: ConstructibleSet) -> Correspondence:
    """Graph of coordinate-wise x -> x^q, q the base field size."""
    q = X.field.size
    return graph(X, X, tuple(v**q for v in X.variables()))


def unit_span(X: ConstructibleSet) -> Correspondence:
    """pt -> X x X through the diagonal."""
    F = X.field
    v = tuple(X.variables())
    return Correspondence.of(Span(ConstructibleSet.point(F), X.product(X), X, (), v + v))


def counit_span(X: ConstructibleSet) -> Correspondence:
    """X x X -> pt through the diagonal."""
    F = X.field
    v = tuple(X.variables())
    return Correspondence.of(Span(X.product(X), ConstructibleSet.point(F), X, v + v, ()))


def duality_check(X: ConstructibleSet, n: int = 1) -> dict:
    """Both zig-zag composites of the diagonal spans equal id_X under phi_n."""
    idX = identity(X)
    eps, delta = unit_span(X), counit_span(X)
    size = point_count(X, n)
    eye = exactlin.identity(size)
    left = phi_n(compose(tensor(eps, idX), tensor(idX, delta)), n)
    right = phi_n(compose(tensor(idX, eps), tensor(delta, idX)), n)
    return {"left": bool(np.array_equal(left, eye)), "right": bool(np.array_equal(right, eye))}


def scissor_check(X: ConstructibleSet, f: Poly, to_base: tuple[Poly, ...], base: ConstructibleSet,
                  n: int = 1) -> bool:
    """[X -> S] = [Z -> S] + [(X minus Z) -> S] for Z = X cut out by f = 0."""
    F = X.field
    pt = ConstructibleSet.point(F)

    def over(A):
        return Correspondence.of(Span(pt, base, A, (), to_base))

    whole = phi_n(over(X), n)
    parts = phi_n(over(X.with_equation(f)), n) + phi_n(over(X.with_inequation(f)), n)
    return bool(np.array_equal(whole, parts))


# ---------------------------------------------------------------------------
# traces along the two-index lattice
# ---------------------------------------------------------------------------

def _mat_power(M: np.ndarray, m: int) -> np.ndarray:
    R = exactlin.identity(M.shape[0])
    for _ in range(m):
        R = R.dot(M)
    return R


def z_table(M: Correspondence, n_max: int, m_max: int) -> list[list[int]]:
    """Z_M(n, m) = Trace(phi_n(M)^m) for 1 <= n <= n_max, 1 <= m <= m_max."""
    table = []
    for n in range(1, n_max + 1):
        P = phi_n(M, n)
        row, R = [], exactlin.identity(P.shape[0])
        for _ in range(m_max):
            R = R.dot(P)
            row.append(int(exactlin.exact_trace(R)))
        table.append(row)
    return table


def z_fibered_oracle(M: Correspondence | Span, n: int, m: int) -> int:
    """Points of the cyclic fibered power of a single span, by chain enumeration.

    Counts (a_1, ..., a_m) in the apex with target(a_i) = source(a_{i+1})
    and target(a_m) = source(a_1); the weight enters as w^m.
    """
    sp = M if isinstance(M, Span) else None
    if sp is None:
        if len(M.spans) != 1:
            raise ValueError("the fibered oracle takes a single span")
        sp = M.spans[0]
    if m < 1:
        raise ValueError("m must be positive")
    E = extend_field(sp.apex.field, n)
    A = points(sp.apex, n)
    src = [tuple(r) for r in _project(E, sp.to_source, A)]
    tgt = [tuple(r) for r in _project(E, sp.to_target, A)]
    by_source: dict[tuple, list[int]] = {}
    for i, key in enumerate(src):
        by_source.setdefault(key, []).append(i)
    total = 0
    for a0 in range(len(A)):
        # walk m-1 more steps along fibers, then close the cycle
        frontier = {a0: 1}
        for _ in range(m - 1):
            nxt: dict[int, int] = {}
            for a, cnt in frontier.items():
                for b in by_source.get(tgt[a], ()):
                    nxt[b] = nxt.get(b, 0) + cnt
            frontier = nxt
        total += sum(cnt for a, cnt in frontier.items() if tgt[a] == src[a0])
    return total * sp.weight**m


@dataclass(frozen=True)
class Sublattice2:
    """Lambda_{n,m,k} = Z (n, 0) + Z (k, m)."""

    n: int
    m: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or not 0 <= self.k < self.n:
            raise ValueError("need n, m >= 1 and 0 <= k < n")

    @property
    def index(self) -> int:
        return self.n * self.m

    @classmethod
    def from_basis(cls, v1, v2) -> Sublattice2:
        """Normal form of Z v1 + Z v2 by integer column operations."""
        (a, b), (c, d) = v1, v2
        if a * d - b * c == 0:
            raise Degenerate("basis vectors are dependent")
        g, s, t = _xgcd(b, d)
        # column with second coordinate g, and one with second coordinate 0
        col2 = (s * a + t * c, g)
        col1 = ((d // g) * a - (b // g) * c, 0)
        n = abs(col1[0])
        m = abs(col2[1])
        k = col2[0] * (1 if col2[1] > 0 else -1) % n
        return cls(n, m, k)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def z_lattice(M: Correspondence, lam: Sublattice2, X: ConstructibleSet | None = None) -> int:
    """Trace(phi_n(M)^m phi_n(Fr_X)^k)."""
    X = X or M.source
    P = phi_n(M, lam.n)
    Fr = phi_n(frobenius_graph(X), lam.n)
    return int(exactlin.exact_trace(_mat_power(P, lam.m).dot(_mat_power(Fr, lam.k))))


ROW_BOUND_LIMIT = 32  # largest phi_n for which rows are extended to a proven length


def observation_check(M: Correspondence, n_max: int, m_max: int) -> dict:
    """Withheld-term recurrence checks on the rows and columns of Z_M.

    A row (fixed n) is Trace(P^m) for P = phi_n(M), whose order is at most
    dim P, so it is extended to 2 dim P + 1 terms and checked rigorously.
    Columns (fixed n varying) carry no a priori bound and can only come out
    ``match`` or ``undetermined``.
    """
    table, rows = [], []
    for n in range(1, n_max + 1):
        P = phi_n(M, n)
        s = P.shape[0]
        if s <= ROW_BOUND_LIMIT:
            seq = exactlin.trace_powers(P, max(m_max, 2 * s + 1))
            rows.append(exactlin.withheld_check(seq, s))
        else:
            seq = exactlin.trace_powers(P, m_max)
            rows.append(exactlin.withheld_check(seq))
        table.append([int(v) for v in seq[:m_max]])
    cols = [exactlin.withheld_check(c) for c in zip(*table)]
    checks = rows + cols
    return {"table": table, "rows": rows, "columns": cols,
            "mismatches": sum(c["status"] == "mismatch" for c in checks),
            "undetermined": sum(c["status"] == "undetermined" for c in checks)}


def ray_rationality(M: Correspondence, g1, g2, n_max: int) -> dict:
    """Z_M(Z g1 + Z N g2) for N = 1..n_max with recurrence and exp-sum data."""
    seq, lattices = [], []
    for N in range(1, n_max + 1):
        lam = Sublattice2.from_basis(tuple(g1), (N * g2[0], N * g2[1]))
        lattices.append([lam.n, lam.m, lam.k])
        seq.append(z_lattice(M, lam))
    out = {"sequence": seq, "lattices": lattices, "withheld": exactlin.withheld_check(seq)}
    rec = exactlin.berlekamp_massey(seq) if len(seq) >= 2 else None
    if rec is not None:
        out["recurrence"] = rec.to_json()
        if rec.order:
            out["expsum"] = exactlin.exp_sum_decompose(rec).to_json()
    return out


# ---------------------------------------------------------------------------
# projective plane incidence
# ---------------------------------------------------------------------------

def projective_points(F: FieldDesc, dim: int = 2) -> list[tuple[int, ...]]:
    """Representatives of P^dim(F) with last nonzero coordinate 1."""
    s = F.size
    out = []
    for last in range(dim, -1, -1):
        for head in itertools.product(range(s), repeat=last):
            out.append(tuple(head) + (1,) + (0,) * (dim - last))
    return out


def radon_check(q: int) -> dict:
    """Point-line incidence M of P^2(F_q) satisfies M M^T = q I + J."""
    F = field_for_q(q)
    pts = projective_points(F)
    N = len(pts)
    M = np.zeros((N, N), dtype=np.int64)
    for i, p in enumerate(pts):
        for j, l in enumerate(pts):
            acc = 0
            for a, b in zip(p, l):
                acc = F.add(acc, F.mul(a, b))
            M[i, j] = acc == 0
    G = M @ M.T
    expected = q * np.eye(N, dtype=np.int64) + 1
    return {"q": q, "points": N, "holds": bool(np.array_equal(G, expected)),
            "diagonal": sorted(set(int(v) for v in np.diag(G)))}


# ---------------------------------------------------------------------------
# algebra axioms
# ---------------------------------------------------------------------------

def _float_exact(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    bound = float(np.abs(A).max(initial=0)) * float(np.abs(B).max(initial=0)) * A.shape[-1]
    if bound >= 2.0**53:
        return A.astype(object) @ B.astype(object)
    return np.rint(A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64)


def algebra_axiom_check(c: np.ndarray, unit) -> dict:
    """Commutativity, associativity and the unit law for e_x e_y = sum_z c[x,y,z] e_z."""
    c = np.asarray(c, dtype=np.int64)
    s = c.shape[0]
    u = np.asarray(unit, dtype=np.int64)
    out: dict = {}
    diff = np.argwhere(c != c.transpose(1, 0, 2))
    out["commutative"] = {"holds": not len(diff),
                          "witness": [int(v) for v in diff[0]] if len(diff) else None}
    left_unit = np.einsum("x,xyz->yz", u, c)
    right_unit = np.einsum("y,xyz->xz", u, c)
    eye = np.eye(s, dtype=np.int64)
    out["unital"] = {"holds": bool(np.array_equal(left_unit, eye) and np.array_equal(right_unit, eye))}
    flat = c.reshape(s * s, s)
    witness = None
    for x in range(s):
        # (e_x e_y) e_z versus e_x (e_y e_z), coefficient of e_u
        lhs = _float_exact(c[x], c.reshape(s, s * s)).reshape(s, s, s)
        rhs = _float_exact(flat, c[x]).reshape(s, s, s)
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            witness = [x] + [int(v) for v in bad[0]]
            break
    out["associative"] = {"holds": witness is None, "witness": witness}
    out["holds"] = all(v["holds"] for v in out.values() if isinstance(v, dict))
    return out


def structure_tensor(mult: Correspondence, n: int = 1) -> np.ndarray:
    """c[x, y, z] from a multiplication span X x X -> X."""
    P = phi_n(mult, n)
    s = P.shape[1]
    return np.asarray(P, dtype=np.int64).reshape(s, s, s)


def additive_group_span(F: FieldDesc) -> Correspondence:
    A1 = ConstructibleSet.affine(F, 1)
    A2 = A1.product(A1)
    x, y = A2.variables()
    return Correspondence.of(Span(A2, A1, A2, (x, y), (x + y,)))


def multiplicative_group_span(F: FieldDesc) -> Correspondence:
    Gm = ConstructibleSet.affine(F, 1).with_inequation(Poly.var(F, 1, 0))
    G2 = Gm.product(Gm)
    x, y = G2.variables()
    return Correspondence.of(Span(G2, Gm, G2, (x, y), (x * y,)))


def hecke_structure_check(q: int, t: int) -> dict:
    from .hecke import hecke_family, make_params

    fam = hecke_family(make_params(q, t))
    return algebra_axiom_check(fam.T, np.ones(fam.size, dtype=np.int64))


# ---------------------------------------------------------------------------
# genus-one curve counts
# ---------------------------------------------------------------------------

def _quadratic_in_last(E: FieldDesc, t, a, b) -> tuple[int, int, int]:
    """Coefficients (c0, c1, c2) of y -> f_t(a, b, y) over E, by interpolation at 0, 1, -1."""
    f0 = f_t_eval(t, a, b, E.zero).index
    f1 = f_t_eval(t, a, b, E.one).index
    fm = f_t_eval(t, a, b, -E.one).index
    inv2 = E.inv(2 % E.p)
    c0 = f0
    s = E.add(f1, fm)  # 2 c0 + 2 c2
    c2 = E.sub(E.mul(s, inv2), c0)
    c1 = E.mul(E.sub(f1, fm), inv2)
    return c0, c1, c2


def _genus_one(E: FieldDesc, f, g) -> bool:
    # f_t is symmetric, so f_t(y, c, d) is the quadratic in the last slot of f_t(c, d, .)
    """w1^2 = f(y), w2^2 = g(y) is smooth of genus one iff f, g are coprime separable quadratics."""
    c0, c1, c2 = f
    d0, d1, d2 = g
    if c2 == 0 or d2 == 0:
        return False

    def disc(a0, a1, a2):
        return E.sub(E.mul(a1, a1), E.mul(4 % E.p, E.mul(a0, a2)))

    if disc(c0, c1, c2) == 0 or disc(d0, d1, d2) == 0:
        return False
    # resultant of two quadratics
    M = [[c2, c1, c0, 0], [0, c2, c1, c0], [d2, d1, d0, 0], [0, d2, d1, d0]]
    return _det_field(E, M) != 0


def _det_field(E: FieldDesc, M) -> int:
    M = [list(r) for r in M]
    n = len(M)
    det = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            det = E.neg(det)
        det = E.mul(det, M[k][k])
        inv = E.inv(M[k][k])
        for i in range(k + 1, n):
            f = E.mul(M[i][k], inv)
            M[i] = [E.sub(a, E.mul(f, b)) for a, b in zip(M[i], M[k])]
    return det


def curve_count(q: int, t: int, pairs, n: int = 1) -> int:
    """#{(y, w, w') : f_t(a, b, y) = w^2, f_t(y, c, d) = w'^2} over F_{q^n}."""
    base = field_for_q(q)
    E = extend_field(base, n)
    te = E(base.element(t))
    (a, b), (c, d) = [(E(base.element(u)), E(base.element(v))) for u, v in pairs]
    total = 0
    for yi in range(E.size):
        y = E.element(yi)
        total += sqrt_count(f_t_eval(te, a, b, y)) * sqrt_count(f_t_eval(te, y, c, d))
    return total


def curve_count_bruteforce(q: int, t: int, pairs, n: int = 1) -> int:
    """The same count by enumerating every triple (slow; an oracle for tests)."""
    base = field_for_q(q)
    E = extend_field(base, n)
    te = E(base.element(t))
    (a, b), (c, d) = [(E(base.element(u)), E(base.element(v))) for u, v in pairs]
    sq = [E.mul(w, w) for w in range(E.size)]
    total = 0
    for yi in range(E.size):
        y = E.element(yi)
        f = f_t_eval(te, a, b, y).index
        g = f_t_eval(te, y, c, d).index
        for w1 in range(E.size):
            if sq[w1] != f:
                continue
            total += sum(1 for w2 in range(E.size) if sq[w2] == g)
    return total


def prop1_curve_counts(q: int, t: int, x1: int, x2: int, x3: int, x4: int, levels=(1, 2)) -> dict:
    """Compare the curves from the pairings (x1 x2 | x3 x4) and (x1 x3 | x2 x4).

    Inputs where either system fails to be a smooth genus-one intersection
    are flagged ``degenerate`` and carry no equality claim.
    """
    base = field_for_q(q)
    curves = {"E": ((x1, x2), (x3, x4)), "E_tilde": ((x1, x3), (x2, x4))}
    smooth = _smooth_pair(base, t, (x1, x2, x3, x4))
    report: dict = {"q": q, "t": t, "x": [x1, x2, x3, x4], "degenerate": not smooth, "levels": {}}
    for n in levels:
        cE = curve_count(q, t, curves["E"], n)
        cT = curve_count(q, t, curves["E_tilde"], n)
        report["levels"][str(n)] = {"E": cE, "E_tilde": cT, "equal": cE == cT}
    report["equal"] = all(v["equal"] for v in report["levels"].values())
    report["status"] = "degenerate" if not smooth else ("pass" if report["equal"] else "fail")
    return report


def random_prop1_tuples(q: int, count: int, seed: int, max_tries: int = 10000) -> list[tuple[int, ...]]:
    """Seeded (t, x1, x2, x3, x4) with both curves smooth of genus one."""
    rng = np.random.default_rng(seed)
    base = field_for_q(q)
    out: list[tuple[int, ...]] = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        t = int(rng.integers(2, q))
        xs = tuple(int(v) for v in rng.integers(0, q, size=4))
        if _smooth_pair(base, t, xs):
            out.append((t,) + xs)
    if len(out) < count:
        raise Degenerate(f"only {len(out)} generic tuples found for q = {q}")
    return out


def _smooth_pair(base: FieldDesc, t: int, xs) -> bool:
    te = base.element(t)
    x1, x2, x3, x4 = (base.element(v) for v in xs)
    for (a, b), (c, d) in (((x1, x2), (x3, x4)), ((x1, x3), (x2, x4))):
        if not _genus_one(base, _quadratic_in_last(base, te, a, b), _quadratic_in_last(base, te, c, d)):
            return False
    return True
