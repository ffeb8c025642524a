"""Command-line front end.

    weilbench list
    weilbench run <experiment> [key=value ...] [--config FILE] [--out FILE] [--seed N] [--budget-points N] [--csv FILE]
    weilbench <family> <command> [--key value ...]     e.g. weilbench span radon --q 3

Every invocation prints one JSON document.  Exit codes: 0 for pass or
report-only, 1 for fail or an exceeded budget, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, charsums, dynamics, hecke, lattice, spans, zeta
from .errors import BudgetExceeded, Degenerate, WeilbenchError
from .exactlin import RatPoly


class UsageError(Exception):
    pass


# -- parameter parsing -----------------------------------------------------------

def _int_list(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    if isinstance(v, int):
        return [v]
    v = str(v).strip()
    return [int(x) for x in v.split(",") if x.strip()] if v else []


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v}")


_PARSERS: dict[str, Callable] = {"int": int, "ints": _int_list, "str": str, "bool": _bool, "path": str}


@dataclass
class Param:
    kind: str
    default: object = None
    help: str = ""


@dataclass
class Experiment:
    name: str
    topic: str
    params: dict[str, Param]
    run: Callable[[dict, int, int | None], tuple[str, dict]]
    family: str
    command: str

    def catalog_entry(self) -> dict:
        return {"name": self.name, "topic": self.topic, "command": f"{self.family} {self.command}",
                "params": {k: {"type": p.kind, "default": p.default, "help": p.help}
                           for k, p in self.params.items()}}


REGISTRY: dict[str, Experiment] = {}


def experiment(name: str, topic: str, family: str, command: str, **params: Param):
    def deco(fn):
        REGISTRY[name] = Experiment(name, topic, params, fn, family, command)
        return fn
    return deco


def list_experiments() -> list[dict]:
    return [REGISTRY[k].catalog_entry() for k in sorted(REGISTRY)]


def _resolve(exp: Experiment, raw: dict) -> dict:
    unknown = sorted(set(raw) - set(exp.params))
    if unknown:
        raise UsageError(f"unknown parameter(s) for {exp.name}: {', '.join(unknown)}")
    out = {}
    for key, p in exp.params.items():
        if key in raw and raw[key] is not None:
            try:
                out[key] = _PARSERS[p.kind](raw[key])
            except (TypeError, ValueError) as e:
                raise UsageError(f"bad value for {key}: {raw[key]!r} ({e})") from None
        elif p.default is None:
            raise UsageError(f"missing required parameter {key} for {exp.name}")
        else:
            out[key] = p.default
    return out


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from None


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# -- hecke -----------------------------------------------------------------------

@experiment("hecke-verify", "Hecke operators: commutativity, sum, Klein group, closure, spectra, lifts",
            "hecke", "verify", q=Param("int", help="odd prime power"), t=Param("int", help="index of t in F_q"),
            lift=Param("ints", [], "extension levels for the eigenvalue lift"),
            literal=Param("bool", False, "use the formula exactly as first written"))
def _hecke_verify(p, seed, budget):
    params = hecke.make_params(p["q"], p["t"])
    fam = hecke.hecke_family(params, budget or hecke.FAMILY_BUDGET)
    if p["literal"]:
        F = params.field
        T = np.array([[[hecke.literal_entry(params, F.element(x), F.element(y), F.element(z))
                        for z in range(F.size)] for y in range(F.size)] for x in range(F.size)], dtype=np.int64)
        fam = hecke.HeckeFamily(params, T)
    rep = hecke.verify_properties(fam, lift_levels=p["lift"])
    return _status(rep.passed), rep.to_json()


@experiment("hecke-traces", "Tangent operator T_tan and denominator D: exact trace identities",
            "hecke", "traces", q=Param("int"), t=Param("int"), n=Param("int", 1, "extension level"))
def _hecke_traces(p, seed, budget):
    fam = hecke.hecke_family(hecke.make_params(p["q"], p["t"], p["n"]), budget or hecke.FAMILY_BUDGET)
    c = hecke.check_trace_identities(fam)
    return c.status, c.to_json()


# -- zeta ------------------------------------------------------------------------

@experiment("zeta-conj4", "Corrected Ruelle-zeta trace sequences (conjectural; report only)",
            "zeta", "conj4", q=Param("int"), t=Param("int"), points=Param("ints", help="x_1..x_k"),
            n_max=Param("int", 3))
def _zeta_conj4(p, seed, budget):
    cfg = zeta.Conj4Config(p["q"], p["t"], tuple(p["points"]), p["n_max"])
    return "report-only", zeta.conjecture4_experiment(cfg)


@experiment("zeta-product", "Non-rational zeta: exp series against the infinite product",
            "zeta", "product", q=Param("int"), order=Param("int", 12))
def _zeta_product(p, seed, budget):
    r = zeta.product_formula_check(p["q"], p["order"])
    return _status(r["equal"]), r


# -- dynamics --------------------------------------------------------------------

@experiment("dyn-cheb", "Chebyshev dynamics on A^3: periodic points", "dyn", "cheb",
            q=Param("int"), n=Param("int", 1), numeric=Param("bool", True))
def _dyn_cheb(p, seed, budget):
    r = dynamics.cheb_fixed_points(p["q"], p["n"], numeric=p["numeric"])
    return _status(r.agree), r.to_json()


@experiment("dyn-torus", "Torus endomorphisms from Weil polynomials: fixed-point counts", "dyn", "torus",
            poly=Param("ints", help="Weil polynomial coefficients, highest degree first"),
            n_max=Param("int", 5))
def _dyn_torus(p, seed, budget):
    poly = RatPoly(list(reversed(p["poly"])))
    e = dynamics.torus_from_weil_poly(poly)
    rows, ok = [], True
    for n in range(1, p["n_max"] + 1):
        try:
            c = dynamics.torus_fixed_count(e, n)
        except Degenerate as err:
            rows.append({"n": n, "degenerate": str(err)})
            continue
        r = dynamics.resultant_count(e, n)
        row = {"n": n, "det": c, "resultant": r}
        agree = c == r
        if e.q is not None and not e.symplectic_unverified:
            row["weil_blocks"] = dynamics.weil_block_count(e.q, e.traces, n)
            agree &= row["weil_blocks"] == c
        row["agree"] = agree
        ok &= agree
        rows.append(row)
    out = {"torus": e.to_json(), "counts": rows}
    if e.q is not None and not e.symplectic_unverified:
        out["symplectic_scaling"] = dynamics.symplectic_scaling_check(e, e.q)
        ok &= out["symplectic_scaling"]
    return _status(ok), out


# -- spans -----------------------------------------------------------------------

def _model(p, seed) -> spans.Correspondence:
    if p.get("file"):
        return spans.correspondence_from_json(_load_json(p["file"]))
    F = hecke.field_for_q(p["q"])
    X = spans.ConstructibleSet.affine(F, 1)
    (x,) = X.variables()
    name = p["model"]
    if name == "frobenius":
        return spans.frobenius_graph(X)
    if name == "identity":
        return spans.identity(X)
    if name == "square":
        return spans.graph(X, X, (x**2,))
    if name == "random":
        return spans.Correspondence.of(spans.random_span(np.random.default_rng(seed), F))
    raise UsageError(f"unknown model {name!r} (frobenius, identity, square, random, or file=...)")


_MODEL_PARAMS = dict(q=Param("int", 2), model=Param("str", "frobenius", "frobenius|identity|square|random"),
                     file=Param("path", "", "correspondence JSON file"))


@experiment("span-zm", "Two-index trace tables Z_M(n, m) and their recurrences", "span", "zm",
            n_max=Param("int", 3), m_max=Param("int", 4), **_MODEL_PARAMS)
def _span_zm(p, seed, budget):
    M = _model(p, seed)
    obs = spans.observation_check(M, p["n_max"], p["m_max"])
    table = obs.pop("table")
    out = {"table": table, "observations": obs}
    ok = obs["mismatches"] == 0
    if len(M.spans) == 1:
        oracle = [[spans.z_fibered_oracle(M, n, m) for m in range(1, p["m_max"] + 1)]
                  for n in range(1, p["n_max"] + 1)]
        out["oracle_agrees"] = oracle == table
        ok &= oracle == table
    return _status(ok), out


@experiment("span-ray", "Sublattice traces along a ray and their rationality", "span", "ray",
            g1=Param("ints", [1, 0]), g2=Param("ints", [0, 1]), n_max=Param("int", 6), **_MODEL_PARAMS)
def _span_ray(p, seed, budget):
    if len(p["g1"]) != 2 or len(p["g2"]) != 2:
        raise UsageError("g1 and g2 must be pairs a,b")
    r = spans.ray_rationality(_model(p, seed), p["g1"], p["g2"], p["n_max"])
    return _status(r["withheld"]["status"] != "mismatch"), r


@experiment("span-radon", "Radon transform on the projective plane", "span", "radon", q=Param("int"))
def _span_radon(p, seed, budget):
    r = spans.radon_check(p["q"])
    return _status(r["holds"]), r


@experiment("span-prop1", "Paired genus-one curves from f_t: equal point counts", "span", "prop1",
            q=Param("int"), t=Param("int", 0, "0 means draw seeded tuples"),
            x=Param("ints", [], "x1,x2,x3,x4"), samples=Param("int", 10))
def _span_prop1(p, seed, budget):
    if p["t"]:
        if len(p["x"]) != 4:
            raise UsageError("x needs four values")
        r = spans.prop1_curve_counts(p["q"], p["t"], *p["x"])
        return ("report-only" if r["degenerate"] else r["status"]), r
    reports = [spans.prop1_curve_counts(p["q"], *tup) for tup in spans.random_prop1_tuples(p["q"], p["samples"], seed)]
    ok = all(r["equal"] for r in reports)
    return _status(ok), {"tuples": reports}


@experiment("span-algebra", "Algebra axioms for structure tensors (Hecke, G_a, G_m)", "span", "algebra",
            kind=Param("str", "hecke", "hecke|additive|multiplicative"), q=Param("int", 5), t=Param("int", 2))
def _span_algebra(p, seed, budget):
    kind = p["kind"]
    if kind == "hecke":
        r = spans.hecke_structure_check(p["q"], p["t"])
    elif kind in ("additive", "multiplicative"):
        F = hecke.field_for_q(p["q"])
        mult = spans.additive_group_span(F) if kind == "additive" else spans.multiplicative_group_span(F)
        c = spans.structure_tensor(mult)
        unit = np.zeros(c.shape[0], dtype=np.int64)
        unit[0] = 1  # 0 for G_a; the first point of G_m is 1
        r = spans.algebra_axiom_check(c, unit)
    else:
        raise UsageError(f"unknown algebra kind {kind!r}")
    return _status(r["holds"]), r


# -- lattice ---------------------------------------------------------------------

def _boltzmann(p, seed) -> lattice.BoltzmannData:
    if p.get("model"):
        return lattice.BoltzmannData.from_json(_load_json(p["model"]))
    return lattice.random_boltzmann(np.random.default_rng(seed), p["dims"])


_LATTICE_MODEL = dict(model=Param("path", "", "Boltzmann data JSON"),
                      dims=Param("ints", [2, 2], "space sizes for seeded random data"))


@experiment("lattice-partition", "Partition function on a sheared sublattice", "lattice", "partition",
            lattice=Param("ints", [2, 2, 0], "n,m,k"), **_LATTICE_MODEL)
def _lattice_partition(p, seed, budget):
    B = _boltzmann(p, seed)
    if B.d != 2 or len(p["lattice"]) != 3:
        raise UsageError("partition needs d = 2 data and lattice=n,m,k")
    n, m, k = p["lattice"]
    lam = lattice.SublatticeD.nmk(n, m, k % n)
    g = lattice.partition_lattice(B, lam)
    t = lattice.partition_transfer(B, n, m, k)
    return _status(g == t), {"graph": str(g), "transfer": str(t), "lattice": [n, m, k % n]}


@experiment("lattice-transfer-check", "Transfer matrices against graph contraction", "lattice", "check",
            n_max=Param("int", 3), m_max=Param("int", 3), **_LATTICE_MODEL)
def _lattice_transfer_check(p, seed, budget):
    B = _boltzmann(p, seed)
    if B.d != 2:
        raise UsageError("transfer check needs d = 2 data")
    mism = []
    for n in range(1, p["n_max"] + 1):
        for m in range(1, p["m_max"] + 1):
            g = lattice.partition_lattice(B, lattice.SublatticeD.nmk(n, m, 0))
            if g != lattice.partition_transfer_vertical(B, n, m):
                mism.append({"n": n, "m": m, "k": 0, "orientation": "vertical"})
            for k in range(n):
                g = lattice.partition_lattice(B, lattice.SublatticeD.nmk(n, m, k))
                if g != lattice.partition_transfer(B, n, m, k):
                    mism.append({"n": n, "m": m, "k": k, "orientation": "horizontal"})
    obs = lattice.observation_check(B, p["n_max"], p["m_max"])
    out = {"mismatches": mism, "table": obs.pop("table"), "observations": obs}
    return _status(not mism and obs["mismatches"] == 0 and obs["orientations_agree"]), out


@experiment("lattice-reduce", "Dimensional reduction identity", "lattice", "reduce",
            n=Param("int", 2), lattice=Param("ints", [2], "diagonal periods of the reduced lattice"),
            **_LATTICE_MODEL)
def _lattice_reduce(p, seed, budget):
    B = _boltzmann(p, seed)
    if len(p["lattice"]) != B.d - 1:
        raise UsageError(f"lattice needs {B.d - 1} periods")
    r = lattice.reduction_check(B, p["n"], lattice.SublatticeD.rect(*p["lattice"]))
    return _status(r["equal"]), r


# -- character sums --------------------------------------------------------------

@experiment("charsum-xn", "Character-sum multisets X_n", "charsum", "xn",
            q=Param("int"), n=Param("int", 1), x=Param("int"),
            literal=Param("bool", False, "restrict y to the range excluding 0, 1, x"))
def _charsum_xn(p, seed, budget):
    r = charsums.x_n_set(p["q"], p["n"], p["x"], literal=p["literal"])
    vals = np.array(r.values)
    bound = 2 * p["q"] ** (p["n"] / 2)
    checks = {"size": len(vals) == p["q"] ** p["n"] - 2,
              "real": bool(np.all(np.abs(vals.imag) <= 1e-9)),
              "bound": bool(np.all(np.abs(vals) <= bound + 1e-9))}
    status = "report-only" if p["literal"] else _status(all(checks.values()))
    return status, {"checks": checks, **r.to_json()}


@experiment("charsum-xprime", "Frobenius-twisted trace multisets X'_n (report only)", "charsum", "xprime",
            q=Param("int"), n=Param("int", 1), matrix_file=Param("path", help="matrix function JSON"),
            x=Param("int", 0, "also compare against X_n for this x"), tol=Param("str", "1e-6"))
def _charsum_xprime(p, seed, budget):
    R = charsums.MatrixFunction.from_json(_load_json(p["matrix_file"]))
    r = charsums.xprime_n_set(R, p["q"], p["n"])
    out = r.to_json()
    if p["x"]:
        xs = charsums.x_n_set(p["q"], p["n"], p["x"])
        out["comparison"] = charsums.compare_multisets(xs.values, r.values, float(p["tol"])).to_json()
    return "report-only", out


# -- driver ----------------------------------------------------------------------

def run(name: str, raw: dict, seed: int = 0, budget: int | None = None) -> tuple[dict, int]:
    """Run one experiment; returns the report and the exit code."""
    if name not in REGISTRY:
        raise UsageError(f"unknown experiment {name!r}; see 'weilbench list'")
    exp = REGISTRY[name]
    params = _resolve(exp, raw)
    if budget is not None and budget <= 0:
        raise UsageError("budget must be positive")
    report = {"experiment": name, "topic": exp.topic, "params": params, "seed": seed,
              "versions": {"weilbench": __version__, "python": platform.python_version(),
                           "numpy": np.__version__}}
    start = time.perf_counter()
    try:
        status, results = exp.run(params, seed, budget)
        report.update(status=status, results=results)
    except BudgetExceeded as e:
        report.update(status="fail", error={"type": "budget", "what": e.what, "size": e.size,
                                            "budget": e.budget, "message": str(e)})
    except (Degenerate, WeilbenchError) as e:
        report.update(status="fail", error={"type": type(e).__name__, "message": str(e)})
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return report, 0 if report["status"] in ("pass", "report-only") else 1


def _kv(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip().replace("-", "_")] = v
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of parameters")
    p.add_argument("--out", help="write the report here as well")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-points", type=int, dest="budget_points")
    p.add_argument("--csv", help="write the result table, if any, as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weilbench", description="Exact-arithmetic experiment runner.")
    sub = parser.add_subparsers(dest="family", required=True)
    sub.add_parser("list", help="catalog of experiments")
    rp = sub.add_parser("run", help="run a named experiment")
    rp.add_argument("experiment")
    rp.add_argument("overrides", nargs="*", help="key=value")
    _add_common(rp)
    families: dict[str, argparse._SubParsersAction] = {}
    for exp in sorted(REGISTRY.values(), key=lambda e: e.name):
        if exp.family not in families:
            fp = sub.add_parser(exp.family, help=f"{exp.family} experiments")
            families[exp.family] = fp.add_subparsers(dest="command", required=True)
        cp = families[exp.family].add_parser(exp.command, help=exp.topic)
        for key, prm in exp.params.items():
            cp.add_argument(f"--{key.replace('_', '-')}", dest=key, help=prm.help or prm.kind)
        _add_common(cp)
        cp.set_defaults(experiment=exp.name)
    return parser


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, default=str)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _write_csv(report: dict, path: str) -> None:
    table = report.get("results", {}).get("table")
    if not isinstance(table, list):
        raise UsageError(f"experiment {report['experiment']!r} produces no table")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n"] + [f"m={m}" for m in range(1, len(table[0]) + 1)] if table else ["n"])
        for n, row in enumerate(table, start=1):
            w.writerow([n] + [str(v) for v in row])


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if extra and (args.family != "run" or not all("=" in tok for tok in extra)):
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as e:
        return int(e.code or 0)
    if args.family == "list":
        _emit({"experiments": list_experiments()}, None)
        return 0
    try:
        raw: dict = {}
        if args.config:
            cfg = _load_json(args.config)
            if not isinstance(cfg, dict):
                raise UsageError("config must be a JSON object")
            raw.update(cfg.get("params", cfg) if "experiment" in cfg else cfg)
        if args.family == "run":
            raw.update(_kv(args.overrides + extra))
        else:
            raw.update({k: getattr(args, k) for k in REGISTRY[args.experiment].params
                        if getattr(args, k, None) is not None})
        report, code = run(args.experiment, raw, args.seed, args.budget_points)
        if args.csv:
            _write_csv(report, args.csv)
    except UsageError as e:
        print(json.dumps({"status": "usage-error", "error": str(e)}), file=sys.stderr)
        return 2
    _emit(report, args.out)
    return code


def deterministic_view(report: dict) -> dict:
    """The report without timing, for reproducibility comparisons."""
    return {k: v for k, v in report.items() if k != "timing"}


__all__ = ["main", "run", "list_experiments", "deterministic_view", "REGISTRY"]
