"""Finite fields F_{p^e} and towers F_q ⊂ F_{q^n}.

Elements are identified with their enumeration index: the coefficient
vector (c_0, ..., c_{n-1}) over the immediate base field, with c_i itself
an index into the base, is read as the integer sum(c_i * Q**i) where Q is
the base size.  So index 0 is zero, indices below Q are the embedded base
constants, and the order is lexicographic with the top coefficient most
significant.  All matrices in the package are indexed by this order.

Small fields (size <= TABLE_LIMIT) additionally carry dense numpy
addition/multiplication tables for vectorised kernels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from itertools import product

import numpy as np
import sympy

from .errors import BudgetExceeded, FieldMismatch

ENUM_BUDGET = 10**6
DLOG_BUDGET = 10**5
TABLE_LIMIT = 4096


def _factor_primes(n: int) -> list[int]:
    return sorted(sympy.factorint(n))


@dataclass(frozen=True, eq=False)
class FieldDesc:
    """A finite field given as base[u]/(rel_modulus(u)).

    ``base`` is None for a prime field Z/p (then ``n == 1`` and
    ``rel_modulus == (0, 1)``).  ``rel_modulus`` lists coefficients lowest
    degree first, as indices into the base field; it is monic.
    """

    p: int
    base: FieldDesc | None
    n: int
    rel_modulus: tuple[int, ...]
    _key: tuple = dc_field(init=False, repr=False)

    def __post_init__(self):
        key = (self.p, None if self.base is None else self.base._key, self.n, self.rel_modulus)
        object.__setattr__(self, "_key", key)

    def __eq__(self, other):
        return isinstance(other, FieldDesc) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.base is None:
            return f"F_{self.p}"
        return f"F_{self.size}[over {self.base!r}, mod {list(self.rel_modulus)}]"

    # -- sizes -------------------------------------------------------------
    @property
    def is_prime_field(self) -> bool:
        return self.base is None

    @cached_property
    def base_size(self) -> int:
        return self.p if self.base is None else self.base.size

    @cached_property
    def size(self) -> int:
        return self.p if self.base is None else self.base.size**self.n

    @cached_property
    def e(self) -> int:
        """Absolute degree over the prime field."""
        return 1 if self.base is None else self.base.e * self.n

    @property
    def is_tower(self) -> bool:
        """True when built over a non-prime subfield F_q (q = base size)."""
        return self.base is not None and not self.base.is_prime_field

    @cached_property
    def prime_field(self) -> FieldDesc:
        f = self
        while f.base is not None:
            f = f.base
        return f

    @cached_property
    def root(self) -> FieldDesc:
        """The bottom-most non-tower level (F_{p^e} built over Z/p)."""
        f = self
        while f.is_tower:
            f = f.base
        return f

    # -- element construction ----------------------------------------------
    def __call__(self, value) -> FieldElement:
        """Element from an int (prime-field constant), a coefficient list, or an element.

        Integer entries of a coefficient list are indices into the base field.
        """
        if isinstance(value, FieldElement):
            if value.owner == self:
                return value
            return embed(value, self)
        if isinstance(value, (int, np.integer)):
            return FieldElement(self, int(value) % self.p)
        coeffs = list(value)
        if len(coeffs) > self.n:
            raise ValueError(f"too many coefficients for degree {self.n}")
        coeffs += [0] * (self.n - len(coeffs))
        if self.base is None:
            return FieldElement(self, coeffs[0] % self.p)
        digits = []
        for c in coeffs:
            if isinstance(c, (int, np.integer)):
                if not 0 <= c < self.base.size:
                    raise ValueError(f"base index {c} out of range")
                digits.append(int(c))
            else:
                digits.append(self.base(c).index)
        return FieldElement(self, self.from_digits(digits))

    def element(self, index: int) -> FieldElement:
        if not 0 <= index < self.size:
            raise IndexError(index)
        return FieldElement(self, index)

    @cached_property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @cached_property
    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    # -- index arithmetic --------------------------------------------------
    def digits(self, i: int) -> list[int]:
        if self.base is None:
            return [i]
        Q = self.base.size
        out = []
        for _ in range(self.n):
            i, r = divmod(i, Q)
            out.append(r)
        return out

    def from_digits(self, digits) -> int:
        if self.base is None:
            return digits[0] % self.p
        Q = self.base.size
        i = 0
        for d in reversed(digits):
            i = i * Q + d
        return i

    def add(self, a: int, b: int) -> int:
        if self.base is None:
            return (a + b) % self.p
        t = self._tables_if_built()
        if t is not None:
            return int(t.add[a, b])
        B = self.base
        return self.from_digits([B.add(x, y) for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a: int) -> int:
        if self.base is None:
            return -a % self.p
        B = self.base
        return self.from_digits([B.neg(x) for x in self.digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.base is None:
            return a * b % self.p
        t = self._tables_if_built()
        if t is not None:
            return int(t.mul[a, b])
        if a == 0 or b == 0:
            return 0
        B = self.base
        prod = _poly_mul(B, self.digits(a), self.digits(b))
        return self.from_digits(_poly_rem_monic(B, prod, self.rel_modulus))

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a = self.inv(a)
            k = -k
        result = 1
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in finite field")
        if self.base is None:
            return pow(a, -1, self.p)
        return self.pow(a, self.size - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # -- dense tables ------------------------------------------------------
    def _tables_if_built(self):
        return self.__dict__.get("tables")

    @cached_property
    def tables(self) -> FieldTables:
        if self.size > TABLE_LIMIT:
            raise BudgetExceeded("dense field tables", self.size, TABLE_LIMIT)
        return FieldTables.build(self)

    @cached_property
    def dlog(self) -> DlogTable:
        return build_dlog(self)

    # -- serialisation -----------------------------------------------------
    @cached_property
    def modulus(self) -> tuple[int, ...]:
        """Modulus of the root level F_{p^e} over Z/p (``(0, 1)`` for prime fields)."""
        return self.root.rel_modulus

    def to_json(self) -> dict:
        d = {"p": self.p, "e": self.root.e, "modulus": list(self.modulus)}
        if self.is_tower:
            d["tower"] = {"n": self.n, "rel_modulus": list(self.rel_modulus), "base": self.base.to_json()}
        return d

    @classmethod
    def from_json(cls, d: dict | str) -> FieldDesc:
        if isinstance(d, str):
            d = json.loads(d)
        if "tower" in d:
            base = cls.from_json(d["tower"]["base"])
            return _make_extension(base, d["tower"]["n"], tuple(d["tower"]["rel_modulus"]))
        prime = make_field(d["p"], 1)
        if d["e"] == 1:
            return prime
        return _make_extension(prime, d["e"], tuple(d["modulus"]))


@dataclass(frozen=True)
class FieldTables:
    add: np.ndarray
    mul: np.ndarray
    neg: np.ndarray
    inv: np.ndarray  # inv[0] = 0 as a sentinel
    sqrt_count: np.ndarray

    @classmethod
    def build(cls, F: FieldDesc) -> FieldTables:
        s = F.size
        idx = np.arange(s, dtype=np.int64)
        if F.base is None:
            add = (idx[:, None] + idx[None, :]) % s
            mul = (idx[:, None] * idx[None, :]) % s
            neg = (-idx) % s
        else:
            B = F.base.tables
            Q = F.base.size
            digits = np.stack([(idx // Q**k) % Q for k in range(F.n)], axis=1)
            weights = Q ** np.arange(F.n, dtype=np.int64)
            add = np.zeros((s, s), dtype=np.int64)
            for k in range(F.n):
                add += B.add[digits[:, k][:, None], digits[:, k][None, :]] * weights[k]
            neg = (B.neg[digits] * weights).sum(axis=1)
            g = _first_generator(F)
            exp = np.empty(s - 1, dtype=np.int64)
            log = np.zeros(s, dtype=np.int64)
            x = 1
            for k in range(s - 1):
                exp[k] = x
                log[x] = k
                x = F.mul(x, g)
            lg = log[1:]
            mul = np.zeros((s, s), dtype=np.int64)
            mul[1:, 1:] = exp[(lg[:, None] + lg[None, :]) % (s - 1)]
        dtype = np.int16 if s < 2**15 else np.int32
        inv = np.zeros(s, dtype=np.int64)
        nz = np.nonzero(mul == 1)
        inv[nz[0]] = nz[1]
        sq = np.zeros(s, dtype=np.int64)
        np.add.at(sq, mul[idx, idx], 1)
        return cls(add.astype(dtype), mul.astype(dtype), neg.astype(dtype), inv.astype(dtype), sq.astype(np.int8))


# -- polynomials over a field, as lists of indices (lowest degree first) --

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mul(F: FieldDesc, a, b) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] = F.add(out[i + j], F.mul(x, y))
    return out


def _poly_rem_monic(F: FieldDesc, a, m) -> list[int]:
    a = list(a)
    d = len(m) - 1
    for k in range(len(a) - 1, d - 1, -1):
        c = a[k]
        if c == 0:
            continue
        a[k] = 0
        for j in range(d):
            if m[j]:
                a[k - d + j] = F.sub(a[k - d + j], F.mul(c, m[j]))
    return (a + [0] * d)[:d]


def _poly_divides(F: FieldDesc, divisor, a) -> bool:
    return not any(_poly_rem_monic(F, a, divisor))


def _is_irreducible(F: FieldDesc, f: tuple[int, ...]) -> bool:
    """Exhaustive search for monic factors of degree <= deg/2."""
    n = len(f) - 1
    if n <= 1:
        return n == 1
    if f[0] == 0:
        return False
    Q = F.size
    if Q ** (n // 2) > ENUM_BUDGET:
        raise BudgetExceeded("irreducibility search", Q ** (n // 2), ENUM_BUDGET)
    for d in range(1, n // 2 + 1):
        for low in product(range(Q), repeat=d):
            if _poly_divides(F, list(low) + [1], f):
                return False
    return True


def _smallest_irreducible(F: FieldDesc, n: int) -> tuple[int, ...]:
    Q = F.size
    for code in range(1, Q**n):
        low = [(code // Q**k) % Q for k in range(n)]
        f = tuple(low) + (1,)
        if _is_irreducible(F, f):
            return f
    raise RuntimeError(f"no irreducible polynomial of degree {n} over {F!r}")


# -- constructors ----------------------------------------------------------

_PRIME_FIELDS: dict[int, FieldDesc] = {}


def _make_extension(base: FieldDesc, n: int, rel_modulus: tuple[int, ...]) -> FieldDesc:
    if len(rel_modulus) != n + 1 or rel_modulus[-1] != 1:
        raise ValueError("relative modulus must be monic of degree n")
    if not _is_irreducible(base, rel_modulus):
        raise ValueError(f"{list(rel_modulus)} is reducible over {base!r}")
    return FieldDesc(base.p, base, n, tuple(rel_modulus))


@lru_cache(maxsize=None)
def make_field(p: int, e: int = 1) -> FieldDesc:
    """F_{p^e} with the lexicographically smallest monic irreducible modulus."""
    if p < 2 or not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    if e < 1:
        raise ValueError("extension degree must be >= 1")
    if p**e > ENUM_BUDGET:
        raise BudgetExceeded("field size", p**e, ENUM_BUDGET)
    if p not in _PRIME_FIELDS:
        _PRIME_FIELDS[p] = FieldDesc(p, None, 1, (0, 1))
    prime = _PRIME_FIELDS[p]
    if e == 1:
        return prime
    return FieldDesc(p, prime, e, _smallest_irreducible(prime, e))


@lru_cache(maxsize=None)
def extend_field(base: FieldDesc, n: int) -> FieldDesc:
    """F_{q^n} built directly over ``base`` = F_q (constants embed canonically)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return base
    if base.size**n > ENUM_BUDGET:
        raise BudgetExceeded("field size", base.size**n, ENUM_BUDGET)
    return FieldDesc(base.p, base, n, _smallest_irreducible(base, n))


def is_subfield_of(sub: FieldDesc, ext: FieldDesc) -> bool:
    f = ext
    while f is not None:
        if f == sub:
            return True
        f = f.base
    return False


def embed(x: FieldElement, ext: FieldDesc) -> FieldElement:
    """Constant-coefficient embedding F_q -> F_{q^n} (through any number of tower levels)."""
    if not is_subfield_of(x.owner, ext):
        raise FieldMismatch(f"{ext!r} is not an extension of {x.owner!r}")
    # constants occupy the first indices at every level, so the index is unchanged
    return FieldElement(ext, x.index)


# -- elements --------------------------------------------------------------

@dataclass(frozen=True)
class FieldElement:
    owner: FieldDesc
    index: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        """Coefficients over the immediate base (base indices), lowest degree first."""
        return tuple(self.owner.digits(self.index))

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.owner != self.owner:
                raise FieldMismatch(f"{self.owner!r} vs {other.owner!r}")
            return other.index
        if isinstance(other, (int, np.integer)):
            return int(other) % self.owner.p
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.add(self.index, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.sub(self.index, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.sub(o, self.index))

    def __mul__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.mul(self.index, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.div(self.index, o))

    def __rtruediv__(self, other):
        o = self._other(other)
        return FieldElement(self.owner, self.owner.div(o, self.index))

    def __neg__(self):
        return FieldElement(self.owner, self.owner.neg(self.index))

    def __pow__(self, k: int):
        return FieldElement(self.owner, self.owner.pow(self.index, k))

    def __bool__(self):
        return self.index != 0

    def __int__(self):
        return self.index

    def __repr__(self):
        if self.owner.is_prime_field:
            return str(self.index)
        return f"{self.owner.size}:{list(self.coeffs)}"

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.owner == other.owner and self.index == other.index
        if isinstance(other, (int, np.integer)):
            return self.index == int(other) % self.owner.p
        return NotImplemented

    def __hash__(self):
        return hash((self.owner, self.index))

    def inverse(self) -> FieldElement:
        return FieldElement(self.owner, self.owner.inv(self.index))


def field_op(a: FieldElement, b, op: str) -> FieldElement:
    """Binary operation by name: add, sub, mul, div or pow (``b`` an int for pow)."""
    if op == "pow":
        return a**b
    if isinstance(b, FieldElement) and b.owner != a.owner:
        raise FieldMismatch(f"{a.owner!r} vs {b.owner!r}")
    ops = {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}
    if op not in ops:
        raise ValueError(f"unknown field op {op!r}")
    return ops[op](b)


def frobenius(x: FieldElement, q: int | None = None) -> FieldElement:
    """x -> x^q, q defaulting to the size of the immediate base (p for root fields)."""
    if q is None:
        q = x.owner.base_size if x.owner.is_tower else x.owner.p
    return x**q


def quadratic_character(a: FieldElement) -> int:
    F = a.owner
    if F.p == 2:
        raise ValueError("quadratic character needs odd characteristic")
    if a.index == 0:
        return 0
    return 1 if F.pow(a.index, (F.size - 1) // 2) == 1 else -1


def sqrt_count(a: FieldElement) -> int:
    """Number of w in the field with w^2 = a."""
    if a.owner.p == 2:
        raise ValueError("sqrt_count is only supported in odd characteristic")
    return 1 + quadratic_character(a)


def enumerate_field(F: FieldDesc) -> list[FieldElement]:
    if F.size > ENUM_BUDGET:
        raise BudgetExceeded("field enumeration", F.size, ENUM_BUDGET)
    return [FieldElement(F, i) for i in range(F.size)]


# -- discrete logarithms ---------------------------------------------------

def _is_primitive(F: FieldDesc, g: int, primes: list[int]) -> bool:
    if g == 0:
        return False
    m = F.size - 1
    return all(F.pow(g, m // r) != 1 for r in primes)


def primitive_elements(F: FieldDesc):
    """Primitive elements in enumeration order (generator)."""
    primes = _factor_primes(F.size - 1) if F.size > 2 else []
    for g in range(1, F.size):
        if _is_primitive(F, g, primes):
            yield g


def _first_generator(F: FieldDesc) -> int:
    return next(primitive_elements(F))


@dataclass(frozen=True, eq=False)
class DlogTable:
    owner: FieldDesc
    generator: FieldElement
    exp: np.ndarray  # exp[k] = index of g^k
    log: np.ndarray  # log[index] = k, log[0] = -1

    def __getitem__(self, x: FieldElement) -> int:
        if x.owner != self.owner:
            raise FieldMismatch("element from another field")
        if x.index == 0:
            raise ValueError("discrete log of zero")
        return int(self.log[x.index])

    def __len__(self):
        return self.owner.size - 1

    def table(self) -> dict[FieldElement, int]:
        return {FieldElement(self.owner, int(i)): k for k, i in enumerate(self.exp)}


def build_dlog(F: FieldDesc, skip: int = 0) -> DlogTable:
    """Full log table w.r.t. the smallest primitive element (or the ``skip``-th next one)."""
    if F.size > DLOG_BUDGET:
        raise BudgetExceeded("discrete log table", F.size, DLOG_BUDGET)
    gens = primitive_elements(F)
    for _ in range(skip):
        next(gens)
    g = next(gens)
    s = F.size
    exp = np.empty(s - 1, dtype=np.int64)
    log = np.full(s, -1, dtype=np.int64)
    t = F._tables_if_built()
    x = 1
    for k in range(s - 1):
        exp[k] = x
        log[x] = k
        x = int(t.mul[x, g]) if t is not None else F.mul(x, g)
    return DlogTable(F, FieldElement(F, g), exp, log)
