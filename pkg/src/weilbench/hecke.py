"""Explicit Hecke matrices T_x for P^1 minus {0, 1, t, oo} over F_{q^n}.

(T_x)_{yz} = #{w : w^2 = f_t(x, y, z)} - 2 + correction, with rows and
columns indexed by the working field in enumeration order.  The
correction adds 1 (x special) or q+1 (x generic) on the row y = x and
subtracts q at three points (t/x, 0), ((t-x)/(1-x), 1), (t(1-x)/(t-x), t).  At extension
level n every q in the correction terms (and in T_tan, D) is read as the
working field size q^n; t and the special points 0, 1, t are embedded
from F_q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import sympy

from . import exactlin
from .errors import BudgetExceeded, FieldMismatch, SingularMatrix
from .ff import FieldDesc, FieldElement, embed, extend_field, make_field, sqrt_count

FAMILY_BUDGET = 400


def field_for_q(q: int) -> FieldDesc:
    fac = sympy.factorint(q)
    if len(fac) != 1:
        raise ValueError(f"{q} is not a prime power")
    (p, e), = fac.items()
    return make_field(p, e)


@dataclass(frozen=True)
class HeckeParams:
    base: FieldDesc
    t: FieldElement
    n: int = 1

    def __post_init__(self):
        if self.base.p == 2:
            raise ValueError("characteristic 2 is not supported")
        if self.t.owner != self.base:
            raise FieldMismatch("t must lie in the base field")
        if self.t.index in (0, 1):
            raise ValueError("t must not be 0 or 1")

    @cached_property
    def field(self) -> FieldDesc:
        return extend_field(self.base, self.n)

    @property
    def q(self) -> int:
        return self.base.size

    @property
    def q_n(self) -> int:
        return self.field.size

    @cached_property
    def t_embedded(self) -> FieldElement:
        return embed(self.t, self.field)

    @property
    def special(self) -> tuple[int, int, int]:
        return (0, 1, self.t_embedded.index)

    def at_level(self, n: int) -> HeckeParams:
        return HeckeParams(self.base, self.t, n)

    def to_json(self) -> dict:
        return {"q": self.q, "t": self.t.index, "n": self.n, "field": self.field.to_json()}


def make_params(q: int, t: int, n: int = 1) -> HeckeParams:
    """Params from integers; t is an index into F_q (its value when q is prime)."""
    F = field_for_q(q)
    return HeckeParams(F, F.element(t), n)


def f_t_eval(t: FieldElement, x: FieldElement, y: FieldElement, z: FieldElement) -> FieldElement:
    """f_t(x,y,z) = (xy+yz+zx-t)^2 + 4xyz(1+t-(x+y+z))."""
    owner = x.owner
    if t.owner != owner:
        t = embed(t, owner)
    for v in (y, z):
        if v.owner != owner:
            raise FieldMismatch("x, y, z must share a field")
    a = x * y + y * z + z * x - t
    return a * a + 4 * x * y * z * (1 + t - (x + y + z))


def _hit(params: HeckeParams, x: FieldElement, y: FieldElement, z: FieldElement) -> bool:
    F = params.field
    t, one = params.t_embedded, F.one
    return (y, z) in ((t / x, F.zero), ((t - x) / (one - x), one), (t * (one - x) / (t - x), t))


def literal_entry(params: HeckeParams, x, y, z) -> int:
    """The two-brace formula taken verbatim.

    2 - #sqrt - (q+1 on x=y special, 1 on x=y generic) + q at the three hits.
    This reading does not sum to the identity; it is kept for comparison.
    """
    F = params.field
    x, y, z = F(x), F(y), F(z)
    qn = params.q_n
    special = x.index in params.special
    val = 2 - sqrt_count(f_t_eval(params.t_embedded, x, y, z))
    if x == y:
        val -= qn + 1 if special else 1
    if not special and _hit(params, x, y, z):
        val += qn
    return val


def hecke_entry(params: HeckeParams, x, y, z, literal: bool = False) -> int:
    """Single matrix entry (T_x)_{yz}, computed with scalar field arithmetic.

    #sqrt - 2 + (1 on x=y special, q+1 on x=y generic) - q at the three hits.
    This is the sign-flipped formula with the two diagonal weights exchanged;
    it is the reading under which the family sums to the identity, squares
    to it on 0, 1, t and closes under multiplication.
    """
    if literal:
        return literal_entry(params, x, y, z)
    F = params.field
    x, y, z = F(x), F(y), F(z)
    qn = params.q_n
    special = x.index in params.special
    val = sqrt_count(f_t_eval(params.t_embedded, x, y, z)) - 2
    if x == y:
        val += 1 if special else qn + 1
    if not special and _hit(params, x, y, z):
        val -= qn
    return val


@dataclass
class HeckeFamily:
    """All T_x at one level; ``T[x]`` is the matrix with rows y, columns z."""

    params: HeckeParams
    T: np.ndarray  # shape (s, s, s), int64
    sign: int = 1  # -1 after negated(): the sum is then -1 and T_0 T_1 = T_t

    def negated(self) -> HeckeFamily:
        return HeckeFamily(self.params, -self.T, -self.sign)

    @property
    def size(self) -> int:
        return self.T.shape[0]

    def __getitem__(self, x) -> np.ndarray:
        return self.T[int(x.index if isinstance(x, FieldElement) else x)]

    def generic_points(self) -> list[int]:
        return [x for x in range(self.size) if x not in self.params.special]


def hecke_family(params: HeckeParams, budget: int = FAMILY_BUDGET) -> HeckeFamily:
    """Assemble every T_x with vectorised table lookups."""
    F = params.field
    s = F.size
    if s > budget:
        raise BudgetExceeded("Hecke family", s, budget)
    tb = F.tables
    add, mul, neg, inv = (a.astype(np.int64) for a in (tb.add, tb.mul, tb.neg, tb.inv))
    sq = tb.sqrt_count.astype(np.int64)
    t = params.t_embedded.index
    four = 4 % F.p
    one_plus_t = add[1, t]
    idx = np.arange(s)
    Y, Z = np.meshgrid(idx, idx, indexing="ij")
    YZ = mul[Y, Z]
    Y_plus_Z = add[Y, Z]
    T = np.empty((s, s, s), dtype=np.int64)
    special = params.special
    for x in range(s):
        xy = mul[x, Y]
        zx = mul[Z, x]
        A = add[add[xy, YZ], zx]
        A = add[A, neg[t]]
        xyz = mul[xy, Z]
        B = add[one_plus_t, neg[add[x, Y_plus_Z]]]
        f = add[mul[A, A], mul[four, mul[xyz, B]]]
        M = sq[f] - 2
        if x in special:
            M[x, :] += 1
        else:
            M[x, :] += s + 1
            one_minus_x = add[1, neg[x]]
            t_minus_x = add[t, neg[x]]
            hits = (
                (mul[t, inv[x]], 0),
                (mul[t_minus_x, inv[one_minus_x]], 1),
                (mul[mul[t, one_minus_x], inv[t_minus_x]], t),
            )
            for yy, zz in hits:
                M[yy, zz] -= s
        T[x] = M
    return HeckeFamily(params, T)


# ---------------------------------------------------------------------------
# property checks
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    status: str  # "pass" | "fail" | "report"
    witness: dict | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"name": self.name, "status": self.status}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.detail:
            d["detail"] = self.detail
        return d


def check_sum_identity(fam: HeckeFamily) -> Check:
    total = fam.T.sum(axis=0)
    diff = total - np.eye(fam.size, dtype=np.int64)
    if diff.any():
        y, z = map(int, np.argwhere(diff)[0])
        return Check("sum_identity", "fail", {"y": y, "z": z, "value": int(total[y, z])})
    return Check("sum_identity", "pass")


def check_commutativity(fam: HeckeFamily) -> Check:
    s = fam.size
    T = fam.T
    for a in range(s):
        # T_a T_b - T_b T_a for all b at once
        left = np.einsum("ij,bjk->bik", T[a], T)
        right = np.einsum("bij,jk->bik", T, T[a])
        bad = np.argwhere((left != right).any(axis=(1, 2)))
        if bad.size:
            return Check("commutativity", "fail", {"x1": a, "x2": int(bad[0, 0])})
    return Check("commutativity", "pass")


def check_klein_group(fam: HeckeFamily) -> Check:
    """T_0, T_1, T_t are involutions generating a Klein four-group.

    The product of any two of them is the third up to a global sign, which
    is reported.  With the family normalised to sum to the identity the
    sign is -1, i.e. the group is {1, T_0, T_1, -T_t}.
    """
    s = fam.size
    eye = np.eye(s, dtype=np.int64)
    a, b, c = fam.params.special
    T = fam.T
    for x in (a, b, c):
        if not np.array_equal(T[x] @ T[x], eye):
            return Check("klein_group", "fail", {"square_not_identity": x})
    prod = T[a] @ T[b]
    if np.array_equal(prod, T[c]):
        sign = 1
    elif np.array_equal(prod, -T[c]):
        sign = -1
    else:
        return Check("klein_group", "fail", {"product": [a, b], "expected": c})
    for x, y, z in ((b, c, a), (a, c, b)):
        if not np.array_equal(T[x] @ T[y], sign * T[z]):
            return Check("klein_group", "fail", {"product": [x, y], "expected": z, "sign": sign})
    elems = [eye, T[a], T[b], prod]
    for i in range(4):
        for j in range(i + 1, 4):
            if np.array_equal(elems[i], elems[j]):
                return Check("klein_group", "fail", {"coincident": [i, j]})
    return Check("klein_group", "pass", detail={"sign": sign})


def check_closure(fam: HeckeFamily) -> Check:
    """T_x T_y = sum_z (T_x)_{yz} T_z for all x, y."""
    s = fam.size
    T = fam.T
    flat = T.reshape(s, s * s)
    for x in range(s):
        prods = np.einsum("ij,bjk->bik", T[x], T).reshape(s, s * s)  # row y: T_x T_y
        combos = T[x] @ flat  # row y: sum_z (T_x)_{yz} T_z
        bad = np.argwhere((prods != combos).any(axis=1))
        if bad.size:
            return Check("closure", "fail", {"x": x, "y": int(bad[0, 0])})
    return Check("closure", "pass")


def _bound_ok(roots, bound, tol):
    worst_imag = max((abs(r.imag) for r in roots), default=0.0)
    worst_abs = max((abs(r.real) for r in roots), default=0.0)
    return worst_imag <= tol and worst_abs <= bound + tol, worst_imag, worst_abs


def spectrum(M: np.ndarray, tol: float = 1e-9) -> list[complex]:
    """Eigenvalues with multiplicity, from the exact characteristic polynomial."""
    return exactlin.numeric_roots(exactlin.charpoly(M), tol=tol).all_roots()


def check_spectral_bound(fam: HeckeFamily, tol: float = 1e-9) -> tuple[Check, dict[int, list[complex]]]:
    bound = 2 * math.sqrt(fam.params.q_n)
    spectra = {}
    worst = {"imag": 0.0, "abs": 0.0}
    for x in fam.generic_points():
        roots = spectrum(fam.T[x], tol)
        spectra[x] = roots
        ok, wi, wa = _bound_ok(roots, bound, tol)
        worst["imag"] = max(worst["imag"], wi)
        worst["abs"] = max(worst["abs"], wa)
        if not ok:
            return Check("spectral_bound", "fail", {"x": x, "max_imag": wi, "max_abs": wa, "bound": bound}), spectra
    return Check("spectral_bound", "pass", detail={"bound": bound, **worst}), spectra


def weil_lift(xi: complex, n: int, q: int) -> complex:
    """lambda^n + conj(lambda)^n from xi = lambda + conj(lambda), |lambda|^2 = q."""
    s_prev, s = 2, xi
    if n == 0:
        return 2
    for _ in range(n - 1):
        s_prev, s = s, xi * s - q * s_prev
    return s


def match_multiset_into(values, target, tol):
    """Greedy check that every value is within tol of some target element (with repetition)."""
    worst = 0.0
    witness = None
    targ = np.array(target, dtype=complex)
    for v in values:
        d = float(np.min(np.abs(targ - v))) if targ.size else math.inf
        if d > worst:
            worst = d
            witness = v
    return worst <= tol, worst, witness


def check_weil_lift(fam: HeckeFamily, n: int, spectra=None, tol: float = 1e-6,
                    ext_family: HeckeFamily | None = None) -> Check:
    """Every lifted eigenvalue of T_x lies in spec(T_x^{(n)}), x in F_q minus {0,1,t}.

    For the normalised family an eigenvalue is xi = -(lambda + conj(lambda))
    and the lift is -s_n(-xi).  For the negated family (``fam.sign == -1``)
    xi = lambda + conj(lambda) and the lift is s_n(xi) directly.
    """
    params = fam.params
    if params.n != 1:
        raise ValueError("the lift starts from the base level")
    ext = ext_family or hecke_family(params.at_level(n))
    if fam.sign != ext.sign:
        ext = ext.negated()
    eps = -fam.sign
    q = params.q
    worst_all = 0.0
    for x in fam.generic_points():
        base_spec = spectra[x] if spectra and x in spectra else spectrum(fam.T[x])
        lifted = [eps * weil_lift(eps * xi, n, q) for xi in base_spec]
        ext_spec = spectrum(ext.T[x])
        ok, worst, wit = match_multiset_into(lifted, ext_spec, tol)
        worst_all = max(worst_all, worst)
        if not ok:
            return Check(f"weil_lift_n{n}", "fail", {"x": x, "lifted": [wit.real, wit.imag], "distance": worst})
    return Check(f"weil_lift_n{n}", "pass", detail={"max_distance": worst_all})


@dataclass
class VerificationReport:
    params: HeckeParams
    checks: list[Check]
    traces: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "checks": [c.to_json() for c in self.checks], "traces": self.traces}


def verify_properties(fam: HeckeFamily, lift_levels=(), spectral: bool = True,
                      tol_spec: float = 1e-9, tol_lift: float = 1e-6) -> VerificationReport:
    checks = [check_commutativity(fam), check_sum_identity(fam), check_klein_group(fam), check_closure(fam)]
    spectra = None
    if spectral:
        c, spectra = check_spectral_bound(fam, tol_spec)
        checks.append(c)
    for n in lift_levels:
        checks.append(check_weil_lift(fam, n, spectra, tol_lift))
    return VerificationReport(fam.params, checks)


def degeneracy_histogram(M: np.ndarray, tol: float = 1e-6) -> dict[int, int]:
    """Multiplicity histogram of the spectrum (how many eigenvalues occur k times)."""
    clusters = exactlin.cluster_roots(spectrum(M), tol)
    hist: dict[int, int] = {}
    for _, k in clusters:
        hist[k] = hist.get(k, 0) + 1
    return dict(sorted(hist.items()))


def charpoly_degree_pattern(M: np.ndarray) -> list[tuple[int, int]]:
    """[(degree, multiplicity)] of the squarefree decomposition of charpoly(M)."""
    return [(g.degree, m) for g, m in exactlin.charpoly(M).squarefree_decomposition()]


# ---------------------------------------------------------------------------
# T_tan and D
# ---------------------------------------------------------------------------

def _exact_float_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # BLAS product, exact while every partial sum stays below 2^53
    bound = float(np.abs(A).max()) * float(np.abs(B).max()) * A.shape[1]
    if bound >= 2.0**53:
        return A.astype(object) @ B.astype(object)
    return np.rint(A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64)


def sum_of_squares(fam: HeckeFamily) -> np.ndarray:
    """sum_x T_x^2 as an integer matrix."""
    T = fam.T
    acc = np.zeros((fam.size, fam.size), dtype=np.int64)
    for x in range(fam.size):
        acc += _exact_float_matmul(T[x], T[x])
    return acc


def t_tan_scaled(fam: HeckeFamily) -> np.ndarray:
    """q^n * T_tan as an integer matrix: -sum_x T_x^2 + (q^n(q^n-3) - 1) I."""
    qn = fam.params.q_n
    return -sum_of_squares(fam) + (qn * (qn - 3) - 1) * np.eye(fam.size, dtype=np.int64)


def t_tan(fam: HeckeFamily) -> np.ndarray:
    """T_tan = -(1/q) sum_x T_x^2 + (q - 3 - 1/q) id, exact rationals (object array)."""
    qn = fam.params.q_n
    S = t_tan_scaled(fam)
    out = np.empty(S.shape, dtype=object)
    for idx, v in np.ndenumerate(S):
        out[idx] = exactlin._norm(Fraction(int(v), qn))
    return out


def d_operator(t_tan_matrix, q_n: int) -> np.ndarray:
    """D = (q_n + 1 - T_tan)^{-1}, exactly."""
    M = exactlin.to_object(t_tan_matrix)
    n = M.shape[0]
    A = exactlin.identity(n) * (q_n + 1) - M
    try:
        return exactlin.rat_inverse(A)
    except SingularMatrix as exc:
        raise SingularMatrix("q^n + 1 is an eigenvalue of T_tan (spectral bound violated)") from exc


def d_coordinates(fam: HeckeFamily) -> list[Fraction]:
    """Coordinates d_y with D = sum_y d_y T_y.

    By closure the matrix of right multiplication by any element of the
    algebra, in the basis T_y, is that element's own matrix.  With
    A = q^n+1-T_tan and the identity equal to sum_z T_z, D is found from
    A^T d = (1, ..., 1): one exact solve instead of an inverse.
    """
    if fam.sign < 0:
        return [-v for v in d_coordinates(fam.negated())]
    qn = fam.params.q_n
    # q^n A = q^n(q^n+1) I - q^n T_tan, integral
    A = qn * (qn + 1) * np.eye(fam.size, dtype=np.int64) - t_tan_scaled(fam)
    ones = [qn] * fam.size
    return exactlin.solve_exact(A.T.astype(object), ones)


def trace_gram(fam: HeckeFamily) -> np.ndarray:
    """G[w, y] = Trace(T_w T_y)."""
    s = fam.size
    T = fam.T
    left = T.reshape(s, s * s)
    right = T.transpose(0, 2, 1).reshape(s, s * s).T
    return _exact_float_matmul(left, right)


def product_coordinates(fam: HeckeFamily, xs) -> list[int]:
    """Coordinates of T_{x_1} ... T_{x_k} in the basis T_y (closure)."""
    s = fam.size
    if not xs:
        return [1] * s
    a = [0] * s
    a[int(xs[0])] = 1
    for y in xs[1:]:
        rows = fam.T[:, int(y), :].astype(object)
        a = list(np.array(a, dtype=object) @ rows)
    return [int(v) for v in a]


def trace_with_d(fam: HeckeFamily, xs, d: list[Fraction] | None = None,
                 gram: np.ndarray | None = None) -> Fraction:
    """Trace(T_{x_1} ... T_{x_k} D), exactly, via algebra coordinates."""
    if d is None:
        d = d_coordinates(fam)
    if gram is None:
        gram = trace_gram(fam)
    a = product_coordinates(fam, list(xs))
    tr = np.array(a, dtype=object) @ gram.astype(object)
    return sum((dy * int(v) for dy, v in zip(d, tr)), Fraction(0))


def trace_d(fam: HeckeFamily, d: list[Fraction] | None = None,
            gram: np.ndarray | None = None) -> Fraction:
    return trace_with_d(fam, [], d, gram)


def expected_trace_td(q_n: int) -> Fraction:
    return Fraction(q_n, (q_n - 1) ** 2)


def expected_trace_d(q_n: int) -> Fraction:
    return Fraction(q_n**2 * (q_n - 2), (q_n - 1) ** 2 * (q_n + 1))


def check_trace_identities(fam: HeckeFamily) -> Check:
    """Trace(T_x D) = q^n/(q^n-1)^2 for generic x and the closed form of Trace(D)."""
    q_n = fam.params.q_n
    d = d_coordinates(fam)
    gram = trace_gram(fam)
    td = trace_d(fam, d, gram)
    detail = {"trace_d": str(td), "expected_trace_d": str(expected_trace_d(q_n)),
              "expected_trace_td": str(expected_trace_td(q_n))}
    if td != expected_trace_d(q_n):
        return Check("trace_identities", "fail", {"x": None, "got": str(td)}, detail)
    for x in fam.generic_points():
        v = trace_with_d(fam, [x], d, gram)
        if v != expected_trace_td(q_n):
            return Check("trace_identities", "fail", {"x": x, "got": str(v)}, detail)
    return Check("trace_identities", "pass", detail=detail)
