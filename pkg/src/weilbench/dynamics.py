"""Fixed-point counts for two algebraic dynamical systems.

Torus endomorphisms dual to integer matrices A, where the fixed points of
the n-th iterate number |det(A^n - I)|, and the coordinate-wise map
x -> T_q(x) on A^3 with T_q(l + 1/l) = l^q + l^-q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from . import exactlin
from .errors import BudgetExceeded, Degenerate
from .exactlin import RatPoly

CHEB_BUDGET = 10**5


def chebyshev_poly(a: int) -> RatPoly:
    """P_a with P_0 = 2, P_1 = x, P_{k+1} = x P_k - P_{k-1}."""
    if a < 0:
        raise ValueError("degree must be non-negative")
    x = RatPoly.x()
    prev, cur = RatPoly([2]), x
    if a == 0:
        return prev
    for _ in range(a - 1):
        prev, cur = cur, x * cur - prev
    return cur


def cheb_semigroup_check(a: int, b: int) -> bool:
    """Exact identity T_a(T_b(x)) = T_{ab}(x)."""
    if a < 0 or b < 0:
        raise ValueError("need a, b >= 0")
    return chebyshev_poly(a).compose(chebyshev_poly(b)) == chebyshev_poly(a * b)


# -- fixed points of T_N(x) = x -------------------------------------------------

def _cheb_eval(N: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """T_N(x) and T_N'(x) by binary doubling on the pair (T_k, T_{k+1}).

    T_{2k} = T_k^2 - 2 and T_{2k+1} = T_k T_{k+1} - x, with derivatives
    carried alongside.  Stable on [-2, 2], where every T_k is bounded by 2.
    """
    a, da = np.full_like(x, 2.0), np.zeros_like(x)  # T_0
    b, db = x.copy(), np.ones_like(x)  # T_1
    for bit in bin(N)[2:]:
        # (T_k, T_{k+1}) -> (T_2k, T_2k+1) or (T_2k+1, T_2k+2)
        t2k, dt2k = a * a - 2, 2 * a * da
        t2k1, dt2k1 = a * b - x, da * b + a * db - 1
        t2k2, dt2k2 = b * b - 2, 2 * b * db
        if bit == "0":
            a, da, b, db = t2k, dt2k, t2k1, dt2k1
        else:
            a, da, b, db = t2k1, dt2k1, t2k2, dt2k2
    return a, da


def _bisect(fun, lo: np.ndarray, hi: np.ndarray, iters: int = 64) -> np.ndarray:
    flo = fun(lo)
    for _ in range(iters):
        mid = (lo + hi) / 2
        fm = fun(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return (lo + hi) / 2


def numeric_cheb_roots(N: int, oversample: int = 16) -> np.ndarray:
    """Real roots of T_N(x) - x found numerically in x = 2 cos(theta).

    Every root lies in [-2, 2], where the map above is a bijection from
    [0, pi].  A grid finer than the spacing of critical points catches
    simple sign changes; a cell whose derivative changes sign without g
    changing sign is probed at its extremum, which separates near-double
    root pairs.
    """
    def g(th):
        x = 2 * np.cos(th)
        return _cheb_eval(N, x)[0] - x

    def h(th):
        x = 2 * np.cos(th)
        return _cheb_eval(N, x)[1] - 1

    M = oversample * (N + 1)
    # interior nodes at an irrational offset so no root falls on a node;
    # the endpoints, where roots are exact, are nodes themselves
    offset = (3 - math.sqrt(5)) / 2
    th = np.concatenate([[0.0], (np.arange(M) + offset) * (math.pi / M), [math.pi]])
    gv = g(th)
    roots = list(th[gv == 0.0])
    lo, hi = th[:-1], th[1:]
    glo, ghi = gv[:-1], gv[1:]
    inner = (glo != 0) & (ghi != 0)
    change = inner & (np.sign(glo) != np.sign(ghi))
    roots.extend(_bisect(g, lo[change], hi[change]))
    hv = h(th)
    turn = inner & ~change & (np.sign(hv[:-1]) != np.sign(hv[1:]))
    if turn.any():
        ext = _bisect(h, lo[turn], hi[turn])
        gext = g(ext)
        two = np.sign(gext) != np.sign(glo[turn])
        roots.extend(_bisect(g, lo[turn][two], ext[two]))
        roots.extend(_bisect(g, ext[two], hi[turn][two]))
    return np.sort(2 * np.cos(np.array(roots, dtype=float)))


def _unit_orbit_angles(m: int) -> list[Fraction]:
    """Angles k/m (in turns) of m-th roots of unity up to inversion."""
    return [Fraction(k, m) for k in range(m // 2 + 1)]


@dataclass
class ChebFixedPoints:
    q: int
    n: int
    values: list[float]  # one coordinate, ascending
    count_1d: int
    count_3d: int
    count_3d_interior: int  # all coordinates different from +-2
    numeric_count: int
    max_deviation: float
    agree: bool

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("q", "n", "count_1d", "count_3d", "count_3d_interior",
                                              "numeric_count", "max_deviation", "agree")}


def cheb_fixed_points(q: int, n: int, tol: float = 1e-8, numeric: bool = True) -> ChebFixedPoints:
    """Fixed points of the n-th iterate, i.e. T_{q^n}(x) = x per coordinate.

    Exact side: x = z + 1/z with z^(N-1) = 1 or z^(N+1) = 1, N = q^n,
    identified by their angle in turns so overlaps (z = +-1) dedupe exactly.
    """
    N = q**n
    if N > CHEB_BUDGET:
        raise BudgetExceeded("Chebyshev degree", N, CHEB_BUDGET)
    angles = sorted(set(_unit_orbit_angles(N - 1)) | set(_unit_orbit_angles(N + 1)))
    values = sorted(2 * math.cos(2 * math.pi * float(a)) for a in angles)
    count = len(angles)
    boundary = sum(1 for a in angles if a in (0, Fraction(1, 2)))
    dev, num_count = 0.0, -1
    if numeric:
        found = numeric_cheb_roots(N)
        num_count = len(found)
        if num_count == count:
            dev = float(np.max(np.abs(found - np.array(values)))) if count else 0.0
        else:
            dev = math.inf
    agree = (not numeric) or (num_count == count and dev <= tol)
    return ChebFixedPoints(q, n, values, count, count**3, (count - boundary) ** 3, num_count, dev, agree)


# -- torus endomorphisms ---------------------------------------------------------

def standard_j(dim: int) -> np.ndarray:
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]."""
    if dim % 2:
        raise ValueError("symplectic form needs even dimension")
    J = np.zeros((dim, dim), dtype=object)
    for i in range(0, dim, 2):
        J[i, i + 1] = 1
        J[i + 1, i] = -1
    return J


@dataclass
class TorusEndo:
    A: np.ndarray  # integer object matrix, 2g x 2g
    q: int | None = None
    traces: list[int] = field(default_factory=list)  # a_i of the 2x2 blocks
    symplectic_unverified: bool = False

    def __post_init__(self):
        self.A = exactlin.to_object(self.A)
        r, c = self.A.shape
        if r != c or r % 2:
            raise ValueError("torus endomorphism needs an even square matrix")

    @property
    def g(self) -> int:
        return self.A.shape[0] // 2

    def to_json(self) -> dict:
        return {"A": [[int(v) for v in row] for row in self.A], "q": self.q, "traces": self.traces,
                "symplectic_unverified": self.symplectic_unverified}


def _block(a: int, q: int) -> np.ndarray:
    return np.array([[0, -q], [1, a]], dtype=object)


def _direct_sum(blocks) -> np.ndarray:
    d = sum(b.shape[0] for b in blocks)
    A = np.zeros((d, d), dtype=object)
    i = 0
    for b in blocks:
        k = b.shape[0]
        A[i:i + k, i:i + k] = b
        i += k
    return A


def _companion(p: RatPoly) -> np.ndarray:
    d = p.degree
    C = np.zeros((d, d), dtype=object)
    for i in range(1, d):
        C[i, i - 1] = 1
    for i in range(d):
        C[i, d - 1] = -int(p.coeffs[i])
    return C


def torus_from_weil_poly(p: RatPoly) -> TorusEndo:
    """Direct sum of blocks [[0,-q],[1,a]] when p splits into x^2 - a x + q factors.

    Falls back to the companion matrix (flagged) otherwise.
    """
    if not p.is_integral():
        raise ValueError("Weil polynomial must have integer coefficients")
    d = p.degree
    if d <= 0 or d % 2:
        raise ValueError("Weil polynomial must have even positive degree")
    if p.lc != 1:
        raise ValueError("Weil polynomial must be monic")
    g = d // 2
    c0 = int(p.coeffs[0])
    q = None
    if c0 > 0:
        r = round(c0 ** (1.0 / g))
        for cand in (r - 1, r, r + 1):
            if cand >= 1 and cand**g == c0:
                q = cand
    traces: list[int] = []
    rest = p
    if q is not None:
        bound = math.isqrt(4 * q)
        progress = True
        while rest.degree > 0 and progress:
            progress = False
            for a in range(-bound, bound + 1):
                quo, rem = rest.divmod(RatPoly([q, -a, 1]))
                if rem.is_zero():
                    traces.append(a)
                    rest = quo
                    progress = True
                    break
    if q is not None and rest.degree == 0:
        traces.sort()
        return TorusEndo(_direct_sum([_block(a, q) for a in traces]), q, traces)
    return TorusEndo(_companion(p), q, [], symplectic_unverified=True)


def _mat_pow(A: np.ndarray, n: int) -> np.ndarray:
    R = exactlin.identity(A.shape[0])
    for _ in range(n):
        R = R @ A
    return R


def det_power_minus_one(e: TorusEndo, n: int) -> int:
    """det(A^n - I), exactly."""
    M = _mat_pow(e.A, n) - exactlin.identity(e.A.shape[0])
    return int(sympy.Matrix(M.tolist()).det(method="bareiss"))


def torus_fixed_count(e: TorusEndo, n: int) -> int:
    """|det(A^n - I)|, the number of fixed points of the n-th iterate."""
    if n < 1:
        raise ValueError("n must be positive")
    d = det_power_minus_one(e, n)
    if d == 0:
        raise Degenerate(f"det(A^{n} - I) = 0: fixed points are not isolated")
    return abs(d)


def resultant_count(e: TorusEndo, n: int) -> int:
    """|Res(charpoly(A), x^n - 1)|, equal to |det(A^n - I)|."""
    x = sympy.Symbol("x")
    cp = exactlin.charpoly(e.A)
    poly = sum(sympy.Rational(c.numerator, c.denominator) * x**i for i, c in enumerate(cp.coeffs))
    return abs(int(sympy.resultant(poly, x**n - 1, x)))


def weil_block_count(q: int, traces, n: int) -> int:
    """prod over blocks of q^n + 1 - s_n(a), with s_0=2, s_1=a, s_{k+1}=a s_k - q s_{k-1}."""
    out = 1
    for a in traces:
        s_prev, s = 2, a
        for _ in range(n - 1):
            s_prev, s = s, a * s - q * s_prev
        out *= q**n + 1 - s
    return out


def symplectic_scaling_check(e: TorusEndo | np.ndarray, q: int) -> bool:
    """A^T J A == q J for the standard block form J."""
    A = e.A if isinstance(e, TorusEndo) else exactlin.to_object(e)
    J = standard_j(A.shape[0])
    return bool(np.array_equal(A.T @ J @ A, q * J))
