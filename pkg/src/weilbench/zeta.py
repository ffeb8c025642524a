"""Ruelle-zeta experiments: the Corr(n, k) correction, the corrected trace
sequence for products of Hecke operators against D, and the exact
infinite-product identity for exp(-sum t^n/n * q^n/(q^n-1)^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import exactlin, hecke
from .errors import BudgetExceeded, Degenerate
from .exactlin import PowerSeries

CONJ4_BUDGET = 400


def corr(n: int, k: int, q: int) -> Fraction:
    """Corr(n, k) = -(-1-q^n)^k / ((1 - q^-n)(1 - q^2n))."""
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    qn = Fraction(q) ** n
    return -((-1 - qn) ** k) / ((1 - 1 / qn) * (1 - qn**2))


@dataclass(frozen=True)
class Conj4Config:
    """Points and t are indices into F_q (their values when q is prime)."""

    q: int
    t: int
    points: tuple[int, ...]
    n_max: int = 3

    def __post_init__(self):
        if not self.points:
            raise ValueError("need at least one point")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")

    def to_json(self) -> dict:
        return {"q": self.q, "t": self.t, "points": list(self.points), "n_max": self.n_max}


@lru_cache(maxsize=16)
def _level_data(q: int, t, n: int):
    """Family, D-coordinates and trace Gram matrix at level n, cached across runs."""
    params = hecke.make_params(q, t, n)
    fam = hecke.hecke_family(params, budget=CONJ4_BUDGET)
    return fam, hecke.d_coordinates(fam), hecke.trace_gram(fam)


def _point_indices(cfg: Conj4Config) -> list[int]:
    params = hecke.make_params(cfg.q, cfg.t)
    idx = []
    for p in cfg.points:
        e = params.base.element(p)
        if e.index in params.special:
            raise Degenerate(f"point {p} lies in {{0, 1, t}}")
        idx.append(e.index)
    return idx


def raw_traces(cfg: Conj4Config) -> list[Fraction]:
    """Trace(T_{x_1}^{(n)} ... T_{x_k}^{(n)} D^{(n)}) for n = 1..n_max."""
    if cfg.q**cfg.n_max > CONJ4_BUDGET:
        raise BudgetExceeded("corrected-trace level", cfg.q**cfg.n_max, CONJ4_BUDGET)
    xs = _point_indices(cfg)
    out = []
    for n in range(1, cfg.n_max + 1):
        fam, d, gram = _level_data(cfg.q, cfg.t, n)
        # embedding keeps indices, so the same x labels the level-n operator
        out.append(hecke.trace_with_d(fam, xs, d, gram))
    return out


def conjecture4_sequence(cfg: Conj4Config) -> list[Fraction]:
    k = len(cfg.points)
    return [tr + corr(n, k, cfg.q) for n, tr in enumerate(raw_traces(cfg), start=1)]


def weil_signature(lambdas, q: int, tol: float = 1e-4) -> list[dict]:
    """For each lambda, whether |lambda| is a half-integral power of q."""
    out = []
    for lam in lambdas:
        a = abs(complex(lam))
        if a == 0:
            out.append({"lambda": [0.0, 0.0], "weight": None, "weil": False})
            continue
        w = 2 * math.log(a) / math.log(q)
        ok = abs(w - round(w)) * math.log(q) / 2 < tol
        out.append({"lambda": [complex(lam).real, complex(lam).imag],
                    "weight": round(w) if ok else w, "weil": ok})
    return out


def conjecture4_experiment(cfg: Conj4Config) -> dict:
    """Report-only run: sequence, recurrence fit, withheld-term check, exp-sum data."""
    seq = conjecture4_sequence(cfg)
    report: dict = {"config": cfg.to_json(), "sequence": [str(v) for v in seq],
                    "identically_zero": all(v == 0 for v in seq)}
    rec = exactlin.berlekamp_massey(seq) if len(seq) >= 2 else None
    if rec is not None:
        report["recurrence"] = rec.to_json()
        if rec.order > 0:
            dec = exactlin.exp_sum_decompose(rec)
            report["expsum"] = dec.to_json()
            report["weil_signature"] = weil_signature([lam for lam, _ in dec.terms], cfg.q)
    # fit on all but the last term and predict it, when the prefix allows
    if len(seq) >= 3:
        fit = exactlin.berlekamp_massey(seq[:-1])
        if fit is not None:
            pred = fit.predict(1)[0]
            report["withheld"] = {"order": fit.order, "predicted": str(pred),
                                  "actual": str(seq[-1]), "match": pred == seq[-1]}
    return report


def product_coefficients(q: int, order: int) -> list[Fraction]:
    """Exact coefficients of prod_{m>=1} (1 - u^m t)^m, u = 1/q, through t^order.

    Every coefficient involves all m, so no finite truncation is exact.
    Writing P(t) for the product, P(t) / P(ut) = prod_m (1 - u^m t) = E(t),
    and E has Euler's closed form e_i = (-1)^i u^{i(i+1)/2} / prod_{j<=i} (1 - u^j).
    Comparing t^k in P(t) = E(t) P(ut) gives p_k (1 - u^k) = sum_{i>=1} e_i u^{k-i} p_{k-i}.
    """
    u = Fraction(1, q)
    e = [Fraction(1)]
    for i in range(1, order + 1):
        e.append(-e[-1] * u**i / (1 - u**i))
    p = [Fraction(1)]
    for k in range(1, order + 1):
        acc = sum(e[i] * u ** (k - i) * p[k - i] for i in range(1, k + 1))
        p.append(acc / (1 - u**k))
    return p


def truncated_product(q: int, order: int, factors: int, dps: int = 60) -> list:
    """High-precision coefficients of prod_{m<=factors} (1 - q^-m t)^m."""
    import mpmath

    with mpmath.workdps(dps):
        c = [mpmath.mpf(1)] + [mpmath.mpf(0)] * order
        for m in range(1, factors + 1):
            a = mpmath.mpf(1) / mpmath.mpf(q) ** m
            for _ in range(m):
                for k in range(order, 0, -1):
                    c[k] -= a * c[k - 1]
        return c


def product_formula_check(q: int, order: int) -> dict:
    """Compare exp(-sum_n t^n/n q^n/(q^n-1)^2) with prod_m (1 - q^-m t)^m to t^order.

    The left side is expanded from its logarithm; the right side from the
    functional equation of the product.  Both are exact rationals.
    """
    if q < 2 or order < 0:
        raise ValueError("need q >= 2 and order >= 0")
    N = order + 1
    log_coeffs = [Fraction(0)] + [-Fraction(q**n, n * (q**n - 1) ** 2) for n in range(1, N)]
    lhs = PowerSeries(log_coeffs, order).exp()
    rhs = product_coefficients(q, order)
    mismatch = [i for i in range(N) if lhs[i] != rhs[i]]
    return {
        "q": q,
        "order": order,
        "equal": not mismatch,
        "first_mismatch": mismatch[0] if mismatch else None,
        "lhs": [str(lhs[i]) for i in range(N)],
        "rhs": [str(rhs[i]) for i in range(N)],
    }
