"""Exact dense linear algebra over Z and Q, plus rationality detection.

Matrices are numpy arrays: ``int64`` where the entries are known to be small,
``object`` arrays of ``int``/``Fraction`` otherwise.  Nested lists are
accepted everywhere a matrix is expected.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .errors import SingularMatrix


# Above this size charpoly switches from exact Berkowitz to the modular path.
BERKOWITZ_MAX = 40
_MOD_PRIME_START = 2**26


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------

class RatPoly:
    """Univariate polynomial with exact rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def x(cls) -> RatPoly:
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots) -> RatPoly:
        out = cls([1])
        for r in roots:
            out = out * cls([-r, 1])
        return out

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "RatPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" + ("" if k == 0 else "*x" if k == 1 else f"*x^{k}"))
        return "RatPoly(" + " + ".join(reversed(terms)) + ")"

    def __eq__(self, other):
        if isinstance(other, RatPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == RatPoly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def _coerce(self, other) -> RatPoly:
        return other if isinstance(other, RatPoly) else RatPoly([other])

    def __add__(self, other):
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = o.coeffs + (Fraction(0),) * (n - len(o.coeffs))
        return RatPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return RatPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return RatPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RatPoly([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: RatPoly) -> RatPoly:
        acc = RatPoly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def derivative(self) -> RatPoly:
        return RatPoly(k * c for k, c in enumerate(self.coeffs) if k)

    def monic(self) -> RatPoly:
        if not self.coeffs:
            return self
        lc = self.lc
        return RatPoly(c / lc for c in self.coeffs)

    def divmod(self, other: RatPoly) -> tuple[RatPoly, RatPoly]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = other.degree
        quo = [Fraction(0)] * max(len(rem) - d, 0)
        inv_lc = 1 / other.lc
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k] * inv_lc
            if c:
                quo[k - d] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - d + j] -= c * b
        return RatPoly(quo), RatPoly(rem[:d] if d > 0 else [])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def gcd(self, other: RatPoly) -> RatPoly:
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def squarefree_decomposition(self) -> list[tuple[RatPoly, int]]:
        """Yun's algorithm: [(g_i, i)] with self = lc * prod g_i^i, g_i squarefree and coprime."""
        if self.degree < 1:
            return []
        f = self.monic()
        out = []
        a = f.gcd(f.derivative())
        b = f // a
        c = f.derivative() // a
        d = c - b.derivative()
        i = 1
        while b.degree > 0:
            g = b.gcd(d)
            b = b // g
            c = d
            d = b.derivative()
            if g.degree > 0:
                out.append((g, i))
            d = (c // g) - b.derivative()
            i += 1
        return out

    def eval_matrix(self, M) -> np.ndarray:
        """p(M) by Horner, exactly (object dtype)."""
        M = to_object(M)
        n = M.shape[0]
        eye = identity(n)
        acc = np.zeros((n, n), dtype=object)
        acc[:] = 0
        for c in reversed(self.coeffs):
            acc = acc @ M + eye * c
        return acc

    def to_json(self) -> list[str]:
        return [_q_to_str(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data) -> RatPoly:
        return cls(Fraction(s) for s in data)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

def _q_to_str(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_object(M) -> np.ndarray:
    """Copy as an object array of exact Python ints/Fractions."""
    A = np.array(M, dtype=object)
    if A.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        if isinstance(v, Fraction):
            out[idx] = v if v.denominator != 1 else v.numerator
        elif isinstance(v, float):
            raise TypeError("floating point entry in exact matrix")
        else:
            out[idx] = int(v)
    return out


def identity(n: int) -> np.ndarray:
    eye = np.zeros((n, n), dtype=object)
    eye[:] = 0
    for i in range(n):
        eye[i, i] = 1
    return eye


def matrix_to_json(M) -> list[list[str]]:
    return [[_q_to_str(v) for v in row] for row in np.asarray(M, dtype=object)]


def matrix_from_json(rows) -> np.ndarray:
    return to_object([[Fraction(v) for v in row] for row in rows])


def exact_trace(M):
    return sum((M[i, i] for i in range(M.shape[0])), Fraction(0))


def _common_denominator(M: np.ndarray) -> int:
    d = 1
    for v in M.flat:
        if isinstance(v, Fraction):
            d = math.lcm(d, v.denominator)
    return d


def clear_denominators(M) -> tuple[np.ndarray, int]:
    """(N, d) with N integral and M = N / d."""
    M = to_object(M)
    d = _common_denominator(M)
    N = np.empty(M.shape, dtype=object)
    for idx, v in np.ndenumerate(M):
        N[idx] = int(v * d)
    return N, d


def _require_square(M) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M.shape[0]


def berkowitz(A) -> list[int]:
    """Division-free characteristic polynomial of an integer matrix.

    Returns det(xI - A) coefficients, highest degree first.
    """
    A = [[int(v) for v in row] for row in np.asarray(A, dtype=object)]
    n = len(A)
    poly = [1]
    for k in range(n):
        a = A[k][k]
        if k == 0:
            poly = [1, -a]
            continue
        R = A[k][:k]
        C = [A[i][k] for i in range(k)]
        t = [1, -a]
        v = C
        for _ in range(k):
            t.append(-sum(r * c for r, c in zip(R, v)))
            v = [sum(A[i][j] * v[j] for j in range(k)) for i in range(k)]
        new = []
        for i in range(k + 2):
            s = 0
            for j in range(max(0, i - len(t) + 1), min(i, k) + 1):
                s += t[i - j] * poly[j]
            new.append(s)
        poly = new
    return poly


def _hessenberg_charpoly_mod(A: np.ndarray, p: int) -> np.ndarray:
    """det(xI - A) mod p via Hessenberg reduction; coefficients lowest first."""
    H = np.array(A, dtype=np.int64) % p
    n = H.shape[0]
    for j in range(n - 2):
        piv = None
        for i in range(j + 1, n):
            if H[i, j]:
                piv = i
                break
        if piv is None:
            continue
        if piv != j + 1:
            H[[piv, j + 1], :] = H[[j + 1, piv], :]
            H[:, [piv, j + 1]] = H[:, [j + 1, piv]]
        inv = pow(int(H[j + 1, j]), -1, p)
        u = (H[j + 2:, j] * inv) % p
        if not u.any():
            continue
        H[j + 2:, :] = (H[j + 2:, :] - (u[:, None] * H[j + 1, :][None, :]) % p) % p
        H[:, j + 1] = (H[:, j + 1] + (H[:, j + 2:] @ u) % p) % p
    # p_k = (x - h_kk) p_{k-1} - sum_i h_ik (prod_{m=i+1..k} h_{m,m-1}) p_{i-1}
    polys = np.zeros((n + 1, n + 1), dtype=np.int64)
    polys[0, 0] = 1
    for k in range(1, n + 1):
        acc = np.zeros(n + 1, dtype=np.int64)
        acc[1:] = polys[k - 1, :-1]
        acc = (acc - H[k - 1, k - 1] * polys[k - 1]) % p
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = prod * int(H[i, i - 1]) % p
            if prod == 0:
                break
            coef = int(H[i - 1, k - 1]) * prod % p
            if coef:
                acc = (acc - coef * polys[i - 1]) % p
        polys[k] = acc
    return polys[n]


def _charpoly_coeff_bound(A: np.ndarray) -> int:
    n = A.shape[0]
    absA = np.abs(np.array(A, dtype=object))
    rows = max(sum(r) for r in absA) if n else 0
    cols = max(sum(c) for c in absA.T) if n else 0
    R = int(min(rows, cols))
    return max(math.comb(n, k) * R**k for k in range(n + 1))


def _primes_below(start: int):
    p = start
    while True:
        p = sympy.prevprime(p)
        yield p


def charpoly_modular(A) -> list[int]:
    """Integer charpoly via Hessenberg mod primes + CRT (coefficient bound from the matrix norm).

    Returns coefficients lowest degree first.
    """
    A = np.array(A, dtype=object)
    n = _require_square(A)
    bound = _charpoly_coeff_bound(A)
    if max((abs(int(v)) for v in A.flat), default=0) >= 2**62:
        raise OverflowError("entries too large for the modular path")
    A64 = A.astype(np.int64)
    residues = None
    modulus = 1
    for p in _primes_below(_MOD_PRIME_START):
        cp = [int(v) for v in _hessenberg_charpoly_mod(A64, p)]
        if residues is None:
            residues = cp
        else:
            inv = pow(modulus, -1, p)
            residues = [r + modulus * (((c - r) * inv) % p) for r, c in zip(residues, cp)]
        modulus *= p
        if modulus > 2 * bound:
            break
    half = modulus // 2
    return [r - modulus if r > half else r for r in residues][: n + 1]


def charpoly(M) -> RatPoly:
    """Exact det(xI - M) for an integer or rational square matrix."""
    M = to_object(M)
    n = _require_square(M)
    N, d = clear_denominators(M)
    if n <= BERKOWITZ_MAX:
        coeffs = list(reversed(berkowitz(N)))
    else:
        coeffs = charpoly_modular(N)
    # det(xI - N/d) = d^{-n} det((dx) I - N)
    return RatPoly(Fraction(c * d**k, d**n) for k, c in enumerate(coeffs))


def _bareiss_forward(aug: list[list[int]], n: int) -> tuple[list[list[int]], int]:
    sign = 1
    prev = 1
    width = len(aug[0])
    for k in range(n):
        if aug[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if aug[i][k] != 0), None)
            if swap is None:
                raise SingularMatrix("matrix is singular")
            aug[k], aug[swap] = aug[swap], aug[k]
            sign = -sign
        pk = aug[k][k]
        rowk = aug[k]
        for i in range(k + 1, n):
            rowi = aug[i]
            aik = rowi[k]
            for j in range(k + 1, width):
                rowi[j] = (pk * rowi[j] - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = pk
    return aug, sign


def bareiss_solve(A, B) -> tuple[np.ndarray, int]:
    """Fraction-free solve of A X = B over Z: returns (adj(A) B, det(A)).

    A is n x n integral and nonsingular, B is n x m integral.
    """
    A = np.array(A, dtype=object)
    B = np.array(B, dtype=object)
    n = _require_square(A)
    if B.ndim == 1:
        B = B.reshape(n, 1)
    m = B.shape[1]
    aug = [[int(v) for v in A[i]] + [int(v) for v in B[i]] for i in range(n)]
    U, sign = _bareiss_forward(aug, n)
    last = U[n - 1][n - 1]  # det of the row-permuted matrix
    X = [[0] * m for _ in range(n)]
    # back substitution; last * A^{-1} B is integral so every division is exact
    for c in range(m):
        for i in range(n - 1, -1, -1):
            s = last * U[i][n + c]
            row = U[i]
            for j in range(i + 1, n):
                s -= row[j] * X[j][c]
            X[i][c] = s // row[i]
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for c in range(m):
            out[i, c] = sign * X[i][c]
    return out, sign * last


def rat_inverse(M) -> np.ndarray:
    """Exact inverse of a nonsingular rational matrix (object array of Fractions)."""
    M = to_object(M)
    n = _require_square(M)
    N, d = clear_denominators(M)
    adjB, det = bareiss_solve(N, identity(n))
    if det == 0:
        raise SingularMatrix("matrix is singular")
    out = np.empty((n, n), dtype=object)
    for idx, v in np.ndenumerate(adjB):
        out[idx] = _norm(Fraction(v * d, det))
    return out


def _norm(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


# -- modular solving with exact certification ---------------------------------

def _rational_reconstruct(a: int, m: int) -> Fraction | None:
    bound = math.isqrt(m // 2)
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 > bound:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def solve_exact(A, b) -> list[Fraction]:
    """Exact solution of A x = b for integral nonsingular A, integral b.

    Large systems use p-adic lifting with rational reconstruction, and the
    candidate is certified by exact integer multiplication.  Small systems,
    or entries too large for word arithmetic, go through Bareiss.
    """
    A = np.array(A, dtype=object)
    b = np.array(b, dtype=object).reshape(-1)
    n = _require_square(A)
    big = max(abs(int(v)) for v in itertools.chain(A.flat, b)) >= 2**40
    if n > 60 and not big and int(np.abs(A.astype(np.int64)).max()) * n * 2**21 < 2**62:
        return _dixon_solve(A, b)
    X, det = bareiss_solve(A, b.reshape(n, 1))
    if det == 0:
        raise SingularMatrix("matrix is singular")
    return [Fraction(int(X[i, 0]), det) for i in range(n)]


def _inverse_mod(A64: np.ndarray, p: int) -> np.ndarray | None:
    n = A64.shape[0]
    M = np.concatenate([A64 % p, np.eye(n, dtype=np.int64)], axis=1)
    for k in range(n):
        nz = np.nonzero(M[k:, k])[0]
        if nz.size == 0:
            return None
        piv = k + int(nz[0])
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
        M[k] = (M[k] * pow(int(M[k, k]), -1, p)) % p
        f = M[:, k].copy()
        f[k] = 0
        M = (M - (f[:, None] * M[k][None, :]) % p) % p
    return M[:, n:]


def _dixon_solve(A, b) -> list[Fraction]:
    """p-adic lifting: one inverse mod p, then cheap lifting steps.

    The prime is kept below 2^21 so every int64 product is exact.
    Candidates come from rational reconstruction and are certified exactly.
    """
    n = A.shape[0]
    A64 = A.astype(np.int64)
    Aint = [[int(v) for v in row] for row in A]
    bint = [int(v) for v in b]
    for p in itertools.islice(_primes_below(2**21), 12):
        Ainv = _inverse_mod(A64, p)
        if Ainv is not None:
            break
    else:
        raise SingularMatrix("matrix is singular modulo every tried prime")
    r = np.array(bint, dtype=np.int64)
    acc = [0] * n
    pk = 1
    step = 0
    while True:
        xi = (Ainv @ (r % p)) % p
        r = (r - A64 @ xi) // p
        acc = [a + pk * int(v) for a, v in zip(acc, xi)]
        pk *= p
        step += 1
        if step % 8:
            continue
        cand = [_rational_reconstruct(v, pk) for v in acc]
        if all(c is not None for c in cand):
            den = reduce(math.lcm, (c.denominator for c in cand), 1)
            num = [c.numerator * (den // c.denominator) for c in cand]
            if all(sum(a * x for a, x in zip(row, num)) == den * bi for row, bi in zip(Aint, bint)):
                return cand
        if step > 200000:  # pragma: no cover
            raise SingularMatrix("lifting did not converge")


# ---------------------------------------------------------------------------
# numeric roots
# ---------------------------------------------------------------------------

@dataclass
class RootReport:
    roots: list[complex]
    multiplicities: list[int]
    residuals: list[float]

    def all_roots(self) -> list[complex]:
        out = []
        for r, m in zip(self.roots, self.multiplicities):
            out.extend([r] * m)
        return out


class RootFindingError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def _aberth_numpy(coeffs_hi: np.ndarray, maxiter: int = 500) -> np.ndarray | None:
    """Aberth-Ehrlich iteration in complex128; coeffs highest first, monic-ish, roots in |z|<~1."""
    d = len(coeffs_hi) - 1
    dcoeffs = coeffs_hi[:-1] * np.arange(d, 0, -1)
    ang = 2 * np.pi * np.arange(d) / d + 0.4
    z = 0.9 * np.exp(1j * ang)
    for _ in range(maxiter):
        pz = np.polyval(coeffs_hi, z)
        dpz = np.polyval(dcoeffs, z)
        with np.errstate(all="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1 - ratio * s)
        if not np.all(np.isfinite(w)):
            return None
        z = z - w
        if np.max(np.abs(w)) < 1e-14:
            return z
    return z


def _aberth_mp(coeffs_hi, z0, tol, maxiter: int = 200):
    d = len(coeffs_hi) - 1
    dco = [c * (d - k) for k, c in enumerate(coeffs_hi[:-1])]
    z = [mpmath.mpc(v) for v in z0]
    for it in range(maxiter):
        biggest = mpmath.mpf(0)
        new = []
        for k in range(d):
            pz = mpmath.polyval(coeffs_hi, z[k])
            dpz = mpmath.polyval(dco, z[k])
            if dpz == 0:
                dpz = mpmath.mpf(10) ** (-mpmath.mp.dps)
            ratio = pz / dpz
            s = mpmath.fsum(1 / (z[k] - z[j]) for j in range(d) if j != k and z[k] != z[j])
            w = ratio / (1 - ratio * s)
            new.append(z[k] - w)
            biggest = max(biggest, abs(w))
        z = new
        if biggest < tol:
            return z, it
    return z, maxiter


def _squarefree_roots(f: RatPoly, tol: float, dps: int) -> list:
    d = f.degree
    if d == 1:
        return [mpmath.mpf(-f.coeffs[0].numerator) / f.coeffs[0].denominator / (mpmath.mpf(f.coeffs[1].numerator) / f.coeffs[1].denominator)]
    with mpmath.workdps(dps):
        co = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(f.coeffs)]
        lc = co[0]
        co = [c / lc for c in co]
        # scale x = R y so roots satisfy |y| <= 1 (Fujiwara bound)
        R = 2 * max(abs(co[k]) ** (mpmath.mpf(1) / k) for k in range(1, d + 1) if co[k] != 0) if any(co[1:]) else mpmath.mpf(1)
        R = max(R, mpmath.mpf(1))
        sc = [co[k] / R**k for k in range(d + 1)]
        z0 = None
        try:
            arr = np.array([complex(c) for c in sc])
            if np.all(np.isfinite(arr)):
                z0 = _aberth_numpy(arr)
        except (OverflowError, ValueError):
            z0 = None
        if z0 is None:
            z0 = [0.9 * mpmath.expjpi(2 * mpmath.mpf(k) / d + 0.13) for k in range(d)]
        z, _ = _aberth_mp(sc, list(z0), mpmath.mpf(10) ** (-(dps // 2)))
        return [v * R for v in z]


def numeric_roots(p: RatPoly, tol: float = 1e-9, dps: int | None = None) -> RootReport:
    """All complex roots with multiplicity.

    Repeated roots are separated exactly first (squarefree decomposition);
    each squarefree factor is solved by simultaneous Aberth iteration,
    seeded in double precision and finished in multiprecision.  Roots with
    |imag| < tol are snapped to the real axis.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no finite root set")
    if dps is None:
        size = max(len(str(c.numerator)) + len(str(c.denominator)) for c in p.coeffs)
        dps = max(40, size + 2 * p.degree // 3 + 20)
    roots: list = []
    mults: list[int] = []
    for g, m in p.squarefree_decomposition():
        for r in _squarefree_roots(g, tol, dps):
            roots.append(r)
            mults.append(m)
    residuals = []
    with mpmath.workdps(dps):
        co = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(p.coeffs)]
        norm = mpmath.sqrt(mpmath.fsum(c * c for c in co))
        for r, m in zip(roots, mults):
            # backward error of the squarefree root on the full polynomial
            residuals.append(float(abs(mpmath.polyval(co, r)) / (norm * max(1, abs(r)) ** p.degree)))
    out = []
    for r in roots:
        c = complex(r)
        if abs(c.imag) < tol:
            c = complex(c.real, 0.0)
        out.append(c)
    bad = [res for res in residuals if not res < tol]
    if bad:
        raise RootFindingError(f"{len(bad)} roots failed the residual check", residuals)
    order = sorted(range(len(out)), key=lambda i: (out[i].real, out[i].imag))
    return RootReport([out[i] for i in order], [mults[i] for i in order], [residuals[i] for i in order])


def cluster_roots(roots: Sequence[complex], tol: float) -> list[tuple[complex, int]]:
    """Group numerically coincident values: [(representative, count)]."""
    out: list[list] = []
    for r in sorted(roots, key=lambda c: (c.real, c.imag)):
        for entry in out:
            if abs(entry[0] - r) <= tol:
                entry[1] += 1
                break
        else:
            out.append([r, 1])
    return [(c, n) for c, n in out]


# ---------------------------------------------------------------------------
# linear recurrences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Recurrence:
    """a_{n+r} = sum_i c_i a_{n+r-i}, fitted on ``prefix``."""

    order: int
    coeffs: tuple[Fraction, ...]
    prefix: tuple[Fraction, ...]

    def predict(self, count: int) -> list[Fraction]:
        seq = list(self.prefix)
        r = self.order
        for _ in range(count):
            if r == 0:
                seq.append(Fraction(0))
            else:
                seq.append(sum(c * seq[-i] for i, c in enumerate(self.coeffs, start=1)))
        return seq[len(self.prefix):]

    def characteristic_polynomial(self) -> RatPoly:
        # x^r - c_1 x^{r-1} - ... - c_r
        return RatPoly([-c for c in reversed(self.coeffs)] + [1])

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [_q_to_str(c) for c in self.coeffs]}


def berlekamp_massey(seq: Sequence) -> Recurrence | None:
    """Minimal linear recurrence of an exact rational sequence.

    Returns None when the minimal order exceeds len(seq) // 2, i.e. the
    prefix is too short to pin down any recurrence.
    """
    s = [Fraction(v) for v in seq]
    if len(s) < 2:
        raise ValueError("need at least two terms")
    C = [Fraction(1)]
    B = [Fraction(1)]
    L, m, b = 0, 1, Fraction(1)
    for n in range(len(s)):
        d = s[n] + sum(C[i] * s[n - i] for i in range(1, L + 1))
        if d == 0:
            m += 1
            continue
        coef = d / b
        T = list(C)
        if len(C) < len(B) + m:
            C += [Fraction(0)] * (len(B) + m - len(C))
        for i, bi in enumerate(B):
            C[i + m] -= coef * bi
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    if L > len(s) // 2:
        return None
    C += [Fraction(0)] * (L + 1 - len(C))
    return Recurrence(L, tuple(-C[i] for i in range(1, L + 1)), tuple(s))


def trace_powers(M, count: int) -> list[Fraction]:
    """Trace(M^m) for m = 1..count, exactly; denominators are cleared once."""
    N, d = clear_denominators(M)
    out, P = [], None
    for m in range(1, count + 1):
        P = N if P is None else P.dot(N)
        out.append(Fraction(int(sum(P[i, i] for i in range(P.shape[0]))), d**m))
    return out


def withheld_check(seq: Sequence, order_bound: int | None = None) -> dict:
    """Fit a recurrence on all but the last term and predict the last one.

    With a proven bound r on the recurrence order and at least 2r terms
    before the withheld one, the fit is the true recurrence, so a wrong
    prediction is a genuine ``mismatch``.  Without
    such a bound a wrong prediction only means the sequence is too short
    (``undetermined``).
    """
    seq = [Fraction(v) for v in seq]
    out: dict = {"length": len(seq), "order_bound": order_bound}
    rigorous = order_bound is not None and len(seq) - 1 >= 2 * order_bound
    out["rigorous"] = rigorous
    fit = berlekamp_massey(seq[:-1]) if len(seq) >= 3 else None
    if fit is not None:
        pred = fit.predict(1)[0]
        out.update(order=fit.order, predicted=_q_to_str(pred), actual=_q_to_str(seq[-1]))
        if pred == seq[-1]:
            out["status"] = "match"
            return out
    out["status"] = "mismatch" if rigorous else "undetermined"
    return out


@dataclass
class ExpSumDecomposition:
    terms: list[tuple[complex, int]]
    raw_multiplicities: list[complex]
    reconstruction_error: float
    condition: float
    ok: bool
    note: str = ""

    def to_json(self) -> dict:
        return {
            "terms": [{"lambda": [t.real, t.imag], "multiplicity": m} for t, m in self.terms],
            "reconstruction_error": self.reconstruction_error,
            "condition": self.condition,
            "ok": self.ok,
            "note": self.note,
        }


def exp_sum_decompose(rec: Recurrence, prefix: Sequence | None = None, start: int = 0,
                      tol: float = 1e-6, cond_limit: float = 1e12) -> ExpSumDecomposition:
    """Write the sequence as sum_i m_i lambda_i^n with integer m_i.

    ``start`` is the index n of the first prefix term.  Roots come from the
    recurrence's characteristic polynomial; multiplicities from a Vandermonde
    least-squares solve, rounded to integers and checked against the prefix.
    """
    seq = [Fraction(v) for v in (prefix if prefix is not None else rec.prefix)]
    if rec.order == 0:
        err = max((abs(float(v)) for v in seq), default=0.0)
        return ExpSumDecomposition([], [], err, 1.0, err <= tol)
    cp = rec.characteristic_polynomial()
    report = numeric_roots(cp, tol=1e-9)
    if any(m > 1 for m in report.multiplicities):
        return ExpSumDecomposition([], [], math.inf, math.inf, False,
                                   "repeated characteristic root: not a pure exponential sum")
    lams = report.roots
    if any(abs(l) < 1e-12 for l in lams):
        return ExpSumDecomposition([], [], math.inf, math.inf, False,
                                   "zero characteristic root: sequence is not an exponential sum from the start")
    ns = np.arange(start, start + len(seq))
    V = np.array([[l**n for l in lams] for n in ns], dtype=complex)
    target = np.array([float(v) for v in seq], dtype=complex)
    scale = np.max(np.abs(V), axis=0)
    Vs = V / scale
    cond = float(np.linalg.cond(Vs))
    sol, *_ = np.linalg.lstsq(Vs, target, rcond=None)
    raw = sol / scale
    rounded = [int(round(c.real)) for c in raw]
    recon = V @ np.array(rounded, dtype=complex)
    denom = max(1.0, float(np.max(np.abs(target))))
    err = float(np.max(np.abs(recon - target))) / denom
    frac = max(abs(c - r) for c, r in zip(raw, rounded))
    ok = err <= tol and frac <= 1e-4 and cond <= cond_limit
    note = "" if ok else ("ill-conditioned Vandermonde" if cond > cond_limit else "non-integral multiplicities" if frac > 1e-4 else "reconstruction mismatch")
    terms = [(l, m) for l, m in zip(lams, rounded) if m != 0]
    return ExpSumDecomposition(terms, list(raw), err, cond, ok, note)


# ---------------------------------------------------------------------------
# power series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSeries:
    """a_0 + a_1 t + ... + a_N t^N  (mod t^{N+1})."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs, order: int | None = None):
        cs = [Fraction(c) for c in coeffs]
        if order is not None:
            cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def _common(self, other: PowerSeries) -> int:
        return min(self.order, other.order)

    def __add__(self, other):
        N = self._common(other)
        return PowerSeries([a + b for a, b in zip(self.coeffs[: N + 1], other.coeffs[: N + 1])])

    def __sub__(self, other):
        N = self._common(other)
        return PowerSeries([a - b for a, b in zip(self.coeffs[: N + 1], other.coeffs[: N + 1])])

    def __neg__(self):
        return PowerSeries([-a for a in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return PowerSeries([a * other for a in self.coeffs])
        N = self._common(other)
        a, b = self.coeffs, other.coeffs
        return PowerSeries([sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(N + 1)])

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, PowerSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def exp(self) -> PowerSeries:
        a = self.coeffs
        if a[0] != 0:
            raise ValueError("exp needs zero constant term")
        b = [Fraction(1)]
        for k in range(1, len(a)):
            b.append(sum(j * a[j] * b[k - j] for j in range(1, k + 1)) / k)
        return PowerSeries(b)

    def log(self) -> PowerSeries:
        a = self.coeffs
        if a[0] != 1:
            raise ValueError("log needs constant term 1")
        lg = [Fraction(0)]
        for k in range(1, len(a)):
            s = k * a[k] - sum(j * lg[j] * a[k - j] for j in range(1, k))
            lg.append(s / k)
        return PowerSeries(lg)

    def inverse(self) -> PowerSeries:
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        b = [1 / a[0]]
        for k in range(1, len(a)):
            b.append(-sum(a[j] * b[k - j] for j in range(1, k + 1)) / a[0])
        return PowerSeries(b)

    def to_json(self) -> list[str]:
        return [_q_to_str(c) for c in self.coeffs]


def series_op(op: str, a: PowerSeries, b: PowerSeries | None = None) -> PowerSeries:
    """Dispatch by name: add, sub, mul (binary) or exp, log (unary)."""
    if op in ("exp", "log"):
        return getattr(a, op)()
    if b is None:
        raise ValueError(f"{op} needs two operands")
    return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__}[op](b)


def _rref_solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """A particular solution of an (over/under-determined) system, or None if inconsistent."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = M[i][n]
    return x


def pade(s: PowerSeries, num_deg: int, den_deg: int) -> tuple[RatPoly, RatPoly] | None:
    """P/Q with deg P <= num_deg, deg Q <= den_deg, Q(0) = 1 and Q s - P = O(t^{N+1}).

    The match is required through the whole truncation order N, so a
    truncated non-rational series gets a definite None.
    """
    N = s.order
    if num_deg + den_deg + 1 > N + 1:
        raise ValueError("num_deg + den_deg + 1 exceeds the available coefficients")
    a = s.coeffs
    rows, rhs = [], []
    for k in range(num_deg + 1, N + 1):
        rows.append([a[k - j] if k - j >= 0 else Fraction(0) for j in range(1, den_deg + 1)])
        rhs.append(-a[k])
    if den_deg == 0:
        if any(v != 0 for v in rhs):
            return None
        sol = []
    else:
        sol = _rref_solve(rows, rhs) if rows else [Fraction(0)] * den_deg
        if sol is None:
            return None
    Qp = RatPoly([1] + sol)
    qc = list(Qp.coeffs) + [Fraction(0)] * (den_deg + 1)
    P = RatPoly([sum(qc[j] * a[k - j] for j in range(0, min(k, den_deg) + 1)) for k in range(num_deg + 1)])
    return P, Qp


def zeta_from_traces(traces: Sequence) -> PowerSeries:
    """exp(-sum_{n>=1} a_n t^n / n) to order len(traces)."""
    N = len(traces)
    if N < 1:
        raise ValueError("need at least one trace")
    lg = PowerSeries([0] + [-Fraction(a) / n for n, a in enumerate(traces, start=1)])
    return lg.exp()
