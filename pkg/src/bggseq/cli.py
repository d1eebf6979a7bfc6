"""Command line front end: run JSON scenarios, verification suites and the catalog."""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bgg import (GradeMismatch, bgg_operator, closed_form_residual, complex_residual, im_t_residual,
                  measured_displacement, normality_check, operator_catalog, operator_order,
                  projective_divergence_closed_form, projective_hessian_closed_form, scalar_section,
                  section_form, splitting_operator, splitting_properties, std_ops_closed_form,
                  uniqueness_margin)
from .geometry import (CATALOG_NAMES, EXACT, GeometryError, MetricJet, bianchi_residual, connection_of,
                       curvature_package, geometry_catalog, ricci_symmetry_residual, schouten_formula_residual,
                       valid_norm, weyl_reassembly_residual, weyl_trace_residual)
from .graded_lie import (AlgebraError, build_graded_algebra, grade_additivity_residual, grading_element_residual,
                         jacobi_residual, membership_residuals)
from .hodge import (HodgeError, commutant_dimension, complementarity, equivariance_residuals, euler_characteristic,
                    harmonic_structure, hodge_split, identity_residuals, inner_product_agreement,
                    is_irreducible)
from .reps import RepError, duality_residual, equivariance_residual, parse_rep
from .twisted import (OrderBudgetError, TwistedContext, action_connection_curvature_residual,
                      leibniz_action_residual, riemann_action_residual, twisted_curvature_residual)

CHECKS = ("algebra_suite", "hodge_suite", "curvature_suite", "twisted_curvature", "complex_residual",
          "closed_form_match", "named_operator", "normality")

DEFAULT_TOL = {
    "algebra_suite": 1e-12,
    "hodge_suite": 1e-11,
    "curvature_suite": 1e-10,
    "twisted_curvature": 1e-8,
    "complex_residual": 1e-8,
    "closed_form_match": 1e-9,
    "named_operator": 0.0,
    "normality": 1e-8,
}

# geometries whose model is (conformally or projectively) flat
FLAT_GEOMETRIES = {"flat", "sphere", "hyperbolic", "conformal", "flat_affine"}

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_BUDGET = 0, 1, 2, 3


class SchemaError(ValueError):
    pass


# -- scenario ---------------------------------------------------------------

@dataclass
class Scenario:
    flavor: str
    geometry: dict
    rep: str = "std"
    degrees: list | None = None
    jet_order: int = 5
    trials: int = 3
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.geometry["n"])


_KEYS = {"flavor", "geometry", "rep", "degrees", "jet_order", "trials", "seed", "tolerances", "checks"}


def _int(value, name, lo=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{name} must be an integer")
    if lo is not None and value < lo:
        raise SchemaError(f"{name} must be >= {lo}")
    return value


def validate_config(cfg) -> Scenario:
    if not isinstance(cfg, dict):
        raise SchemaError("config must be a JSON object")
    unknown = set(cfg) - _KEYS
    if unknown:
        raise SchemaError(f"unknown keys: {sorted(unknown)}")
    flavor = cfg.get("flavor")
    if flavor not in ("conformal", "projective"):
        raise SchemaError("flavor must be 'conformal' or 'projective'")
    geom = cfg.get("geometry")
    if not isinstance(geom, dict) or "name" not in geom or "n" not in geom:
        raise SchemaError("geometry must be an object with 'name' and 'n'")
    if geom["name"] not in CATALOG_NAMES:
        raise SchemaError(f"unknown geometry {geom['name']!r}; choose from {list(CATALOG_NAMES)}")
    n = _int(geom["n"], "geometry.n", 2)
    is_affine = geom["name"] in ("flat_affine", "random_affine")
    if flavor == "conformal" and is_affine:
        raise SchemaError("conformal scenarios need a metric geometry")
    if flavor == "conformal" and n < 3:
        raise SchemaError("conformal curvature needs n >= 3")
    order = cfg.get("jet_order", geom.get("order", 5))
    order = _int(order, "jet_order", 0)
    rep = cfg.get("rep", "std")
    if not isinstance(rep, str):
        raise SchemaError("rep must be a string expression")
    degrees = cfg.get("degrees")
    if degrees is not None:
        if not isinstance(degrees, list):
            raise SchemaError("degrees must be a list")
        degrees = [_int(d, "degrees[]", 0) for d in degrees]
        if any(d > n for d in degrees):
            raise SchemaError("degrees must not exceed n")
    checks = cfg.get("checks", [])
    if not isinstance(checks, list) or any(c not in CHECKS for c in checks):
        raise SchemaError(f"checks must be a list drawn from {list(CHECKS)}")
    tol = cfg.get("tolerances", {})
    if not isinstance(tol, dict) or any(k not in CHECKS for k in tol):
        raise SchemaError("tolerances must map check names to numbers")
    for k, v in tol.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v < 0:
            raise SchemaError(f"tolerance for {k} must be a non-negative number")
    trials = _int(cfg.get("trials", 3), "trials", 1)
    seed = _int(cfg.get("seed", 0), "seed")
    return Scenario(flavor, dict(geom), rep, degrees, order, trials, seed, dict(tol), list(checks))


class ScenarioContext:
    """Lazily built objects shared by the checks of one scenario."""

    def __init__(self, scn: Scenario):
        self.scn = scn
        try:
            self.alg = build_graded_algebra(scn.flavor, scn.n)
            self.rep = parse_rep(self.alg, scn.rep)
        except (AlgebraError, RepError) as err:
            raise SchemaError(str(err)) from err
        self._hodge = None
        self._pkg = None
        self._twisted = None
        self.geom = None

    @property
    def hodge(self):
        if self._hodge is None:
            self._hodge = hodge_split(self.rep)
        return self._hodge

    @property
    def pkg(self):
        if self._pkg is None:
            scn = self.scn
            params = {k: v for k, v in scn.geometry.items() if k not in ("name", "n", "order")}
            params.setdefault("seed", scn.seed)
            try:
                self.geom = geometry_catalog(scn.geometry["name"], scn.n, scn.jet_order, **params)
            except TypeError as err:
                raise SchemaError(f"bad geometry parameters: {err}") from err
            metric = self.geom if isinstance(self.geom, MetricJet) else None
            self._pkg = curvature_package(connection_of(self.geom), scn.flavor, metric)
        return self._pkg

    @property
    def twisted(self) -> TwistedContext:
        if self._twisted is None:
            self._twisted = TwistedContext(self.rep, self.pkg, hodge=self.hodge)
        return self._twisted

    @property
    def flat_model(self) -> bool:
        return self.scn.geometry["name"] in FLAT_GEOMETRIES

    def degrees(self, upper: int) -> list[int]:
        ks = self.scn.degrees if self.scn.degrees is not None else list(range(upper + 1))
        return [k for k in ks if 0 <= k <= upper]


# -- order budget -----------------------------------------------------------

def _operator_orders(h) -> list[int]:
    out = []
    for k in range(h.n):
        a, b = h.harmonic_grade_set(k), h.harmonic_grade_set(k + 1)
        out.append(max(b) - min(a) + 1 if a and b else 0)
    return out


def required_order(check: str, sc: ScenarioContext) -> int:
    """Smallest jet order at which the check still has coefficients to compare."""
    if check in ("algebra_suite", "hodge_suite"):
        return 0
    if check in ("curvature_suite", "twisted_curvature"):
        return 3
    orders = _operator_orders(sc.hodge)
    top = max(orders) if orders else 1
    if check == "complex_residual":
        pair = max((orders[k] + orders[k + 1] for k in range(len(orders) - 1)), default=top)
        return pair + 2
    if check == "named_operator":
        return top + 3
    return top + 2


# -- checks -------------------------------------------------------------------

def _algebra_suite(sc: ScenarioContext) -> dict:
    alg = sc.alg
    rep = sc.rep
    res = {"jacobi": jacobi_residual(alg), "grade_additivity": grade_additivity_residual(alg),
           "grading_element": grading_element_residual(alg), "membership": membership_residuals(alg)}
    for key, val in equivariance_residual(rep).items():
        res[f"rep_{key}"] = val
    res["rep_duality"] = duality_residual(rep)
    return {"residuals": res}


def _hodge_suite(sc: ScenarioContext) -> dict:
    h = sc.hodge
    res = dict(identity_residuals(h))
    for key, val in equivariance_residuals(h).items():
        res[f"equivariance_{key}"] = val
    comp = complementarity(h)
    res["complementarity_failures"] = float(sum(not v for v in comp.values()))
    chi = euler_characteristic(h)
    res["euler_mismatch"] = float(abs(chi[0] - chi[1]))
    res["h0_vs_lowest_grade"] = float(abs(h.cohomology[0] - sc.rep.grade_dims()[0]))
    if sc.alg.kind == "conformal":
        res["inner_product_agreement"] = inner_product_agreement(h)
    for k, hk in enumerate(h.cohomology):
        res[f"info_h{k}"] = float(hk)
    return {"residuals": res}


def _curvature_suite(sc: ScenarioContext) -> dict:
    pkg = sc.pkg
    res = {"bianchi": bianchi_residual(pkg), "weyl_trace": weyl_trace_residual(pkg),
           "weyl_reassembly": weyl_reassembly_residual(pkg), "ricci_symmetry": ricci_symmetry_residual(pkg)}
    if pkg.flavor == "conformal":
        res["schouten_formula"] = schouten_formula_residual(pkg)
    sp = pkg.space
    name = sc.scn.geometry["name"]
    if name in ("flat", "flat_affine"):
        res["flat_curvature"] = valid_norm(sp, pkg.R, pkg.valid["R"])
    # conformal-factor metrics are conformally flat but not projectively flat
    flat_names = ("sphere", "hyperbolic", "flat") + (("conformal",) if pkg.flavor == "conformal" else ())
    if name in flat_names:
        res["weyl_vanishes"] = valid_norm(sp, pkg.W, pkg.valid["W"])
        res["cotton_york_vanishes"] = valid_norm(sp, pkg.Y, pkg.valid["Y"])
    if name == "sphere":
        n, g = pkg.n, pkg.metric.g
        if pkg.flavor == "conformal":
            res["scalar_curvature"] = valid_norm(sp, pkg.sc - sp.constant(n * (n - 1.0)), pkg.valid["P"])
            res["schouten_half_metric"] = valid_norm(sp, pkg.P - 0.5 * g, pkg.valid["P"])
        else:
            res["ricci_einstein"] = valid_norm(sp, pkg.ric - (n - 1.0) * g, pkg.valid["ric"])
            res["schouten_metric"] = valid_norm(sp, pkg.P - g, pkg.valid["P"])
    res["info_weyl_norm"] = valid_norm(sp, pkg.W, pkg.valid["W"])
    res["info_cotton_york_norm"] = valid_norm(sp, pkg.Y, pkg.valid["Y"])
    return {"residuals": res, "surviving": max(pkg.valid["Y"], 0)}


def _twisted_curvature(sc: ScenarioContext) -> dict:
    ctx = sc.twisted
    scn = sc.scn
    r = twisted_curvature_residual(ctx, scn.trials, scn.seed)
    res = {
        "weyl_plus_cotton_york": r["residual_w_plus_y"],
        "grade_minus2": r["grade_minus2"],
        "grade_plus2": r["grade_plus2"],
        "grade_minus1": r["grade_minus1"],
        "grade_plus1_vs_cotton_york": r["grade_plus1_vs_y"],
        "riemann_action": riemann_action_residual(ctx, 1, scn.seed),
        "action_connection_curvature": action_connection_curvature_residual(ctx, 1, scn.seed),
        "leibniz": leibniz_action_residual(ctx, 1, scn.seed),
        "info_weyl_minus_cotton_york": r["residual_w_minus_y"],
        "info_grade_plus1_vs_minus_cotton_york": r["grade_plus1_vs_minus_y"],
        "info_curvature_norm": r["curvature_norm"],
    }
    return {"residuals": res, "surviving": int(r["surviving_order"])}


def _complex_residual(sc: ScenarioContext) -> dict:
    ctx = sc.twisted
    scn = sc.scn
    res = {}
    for k in sc.degrees(scn.n - 2):
        r = complex_residual(ctx, k, scn.trials, scn.seed + k)
        res[f"dd_k{k}"] = r["dd_relative"]
        prefix = "" if sc.flat_model else "info_"
        res[f"{prefix}chain_map_k{k}"] = r["chain_map"]
        res[f"info_twisted_dd_k{k}"] = r["dd_twisted_relative"]
    return {"residuals": res}


def _closed_form_match(sc: ScenarioContext) -> dict:
    ctx = sc.twisted
    scn = sc.scn
    res = {}
    for k in sc.degrees(scn.n - 1):
        try:
            res[f"closed_form_k{k}"] = closed_form_residual(ctx, k, scn.trials, scn.seed + k)
        except GradeMismatch as err:
            res[f"info_not_applicable_k{k}"] = float(err.actual_order)
    res.update(_named_formulas(sc))
    return {"residuals": res}


def _named_formulas(sc: ScenarioContext) -> dict:
    ctx = sc.twisted
    sp = ctx.space
    rng = np.random.default_rng(sc.scn.seed)
    rep, n = sc.rep, sc.scn.n
    res = {}
    if sc.scn.flavor == "conformal" and sc.scn.rep == "std":
        f = sp.random(rng)
        alpha = scalar_section(ctx, f, sp.order)
        s, d = splitting_operator(ctx, alpha), bgg_operator(ctx, alpha)
        (f0, grad, top), dref = std_ops_closed_form(ctx, f)
        res["std_ops_splitting"] = max(valid_norm(sp, s.c[0, 0] - f0, s.valid[0]),
                                       valid_norm(sp, s.c[0, 1:n + 1] - grad, s.valid[1]),
                                       valid_norm(sp, s.c[0, n + 1] - top, s.valid[2]))
        res["std_ops_operator"] = valid_norm(sp, d.c[:, 1:n + 1] - dref, d.valid[1])
    if sc.scn.flavor == "projective" and sc.scn.rep == "dual(std)":
        f = sp.random(rng)
        alpha = scalar_section(ctx, f, sp.order)
        s, d = splitting_operator(ctx, alpha), bgg_operator(ctx, alpha)
        (f0, df), dref = projective_hessian_closed_form(ctx, f)
        res["hessian_splitting"] = max(valid_norm(sp, s.c[0, 0] - f0, s.valid[0]),
                                       valid_norm(sp, s.c[0, 1:] - df, s.valid[1]))
        res["hessian_operator"] = valid_norm(sp, d.c[:, 1:] - dref, d.valid[1])
    if sc.scn.flavor == "projective" and sc.scn.rep == "std":
        eta = sp.random(rng, (n,))
        d = bgg_operator(ctx, section_form(ctx, {0: eta}, sp.order))
        res["divergence_operator"] = valid_norm(sp, d.c[:, :n] - projective_divergence_closed_form(ctx, eta),
                                                d.valid[0])
    return res


def _named_operator(sc: ScenarioContext) -> dict:
    ctx = sc.twisted
    scn = sc.scn
    h = sc.hodge
    res = {}
    for k in sc.degrees(scn.n - 1):
        measured = operator_order(ctx, k, max_order=min(4, scn.jet_order), seed=scn.seed + k)
        worst = 0
        for (gin, gout), order in measured.items():
            worst = max(worst, abs(order - (gout - gin + 1)))
            res[f"info_order_k{k}_g{gin}_to_g{gout}"] = float(order)
        res[f"order_mismatch_k{k}"] = float(worst)
        res[f"info_target_dim_k{k + 1}"] = float(h.harmonic[k + 1].shape[1])
    margins = uniqueness_margin(ctx)
    res["uniqueness_margin_defect"] = max(0.0, 0.5 - min(margins))
    return {"residuals": res}


def _normality_candidate(sc: ScenarioContext):
    sp = sc.twisted.space
    name = sc.scn.geometry["name"]
    x = [sp.coordinate(i) for i in range(sc.scn.n)]
    r2 = sum(sp.mul(xi, xi) for xi in x)
    one = sp.constant(1.0)
    if sc.scn.flavor == "conformal" and sc.scn.rep == "std":
        if name == "sphere":
            return sp.mul(one - r2, sp.reciprocal(one + r2)), sp.order
        if name == "hyperbolic":
            return sp.mul(one + r2, sp.reciprocal(one - r2)), sp.order
        if name == "flat":
            return one + r2, EXACT
    if sc.scn.flavor == "projective" and sc.scn.rep == "dual(std)" and name == "flat_affine":
        return one + x[0], EXACT
    return None


def _normality(sc: ScenarioContext) -> dict:
    cand = _normality_candidate(sc)
    if cand is None:
        return {"residuals": {}, "skipped": True}
    f, valid = cand
    sol, normal = normality_check(sc.twisted, scalar_section(sc.twisted, f, valid))
    return {"residuals": {"solution": sol, "normal": normal}}


_CHECK_FUNCS = {
    "algebra_suite": _algebra_suite,
    "hodge_suite": _hodge_suite,
    "curvature_suite": _curvature_suite,
    "twisted_curvature": _twisted_curvature,
    "complex_residual": _complex_residual,
    "closed_form_match": _closed_form_match,
    "named_operator": _named_operator,
    "normality": _normality,
}


def _status(residuals: dict, tol: float) -> str:
    asserted = [v for k, v in residuals.items() if not k.startswith("info_")]
    return "pass" if all(v <= tol for v in asserted) else "fail"


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def run_check(name: str, sc: ScenarioContext) -> dict:
    tol = float(sc.scn.tolerances.get(name, DEFAULT_TOL[name]))
    start = time.perf_counter()
    entry = {"name": name, "status": "pass", "residuals": {}, "tolerance": tol,
             "jet_order_surviving": sc.scn.jet_order, "ms": 0.0, "detail": ""}
    try:
        out = _CHECK_FUNCS[name](sc)
        entry["residuals"] = {k: _clean(float(v)) for k, v in sorted(out["residuals"].items())}
        if out.get("skipped"):
            entry["status"] = "skipped"
            entry["detail"] = "no known candidate for this geometry and representation"
        else:
            entry["status"] = _status(out["residuals"], tol)
        if "surviving" in out:
            entry["jet_order_surviving"] = int(min(out["surviving"], sc.scn.jet_order))
    except OrderBudgetError as err:
        entry["status"] = "fail"
        entry["detail"] = f"order budget: {err}"
        entry["budget"] = True
    entry["ms"] = round(1000 * (time.perf_counter() - start), 3)
    return entry


def run_scenario(cfg, seed: int | None = None) -> tuple[dict, int]:
    """Validate and run one scenario; returns (report, exit code)."""
    if seed is not None and isinstance(cfg, dict):
        cfg = dict(cfg, seed=seed)
    scn = validate_config(cfg)
    sc = ScenarioContext(scn)
    for check in scn.checks:
        need = required_order(check, sc)
        if scn.jet_order < need:
            raise OrderBudgetError(f"check {check} needs jet order >= {need}, got {scn.jet_order}")
    checks = [run_check(name, sc) for name in sorted(set(scn.checks))]
    report = {"version": __version__, "config": cfg, "seed": scn.seed, "checks": checks}
    return report, _exit_code(checks)


def _exit_code(checks) -> int:
    if any(c.pop("budget", False) for c in checks):
        return EXIT_BUDGET
    return EXIT_FAIL if any(c["status"] == "fail" for c in checks) else EXIT_OK


# -- verification suite -------------------------------------------------------

def _suite_reps(kind: str, level: str) -> list[str]:
    if level == "quick":
        return ["std", "dual(std)", "adjoint"]
    sym = "sym0(2,std)" if kind == "conformal" else "sym(2,std)"
    sym_dual = "sym0(2,dual(std))" if kind == "conformal" else "sym(2,dual(std))"
    return ["std", "dual(std)", sym, sym_dual, "alt(2,dual(std))", "alt(3,dual(std))", "adjoint"]


def _named(entry: dict, label: str) -> dict:
    entry["name"] = f"{label}/{entry['name']}"
    return entry


def verify_suite(level: str = "quick", seed: int = 0) -> tuple[dict, int]:
    if level not in ("quick", "full"):
        raise SchemaError("level must be quick or full")
    dims = {"quick": (2, 3), "full": (2, 3, 4, 5)}[level]
    checks = []
    for kind in ("conformal", "projective"):
        for n in dims:
            for rep in _suite_reps(kind, level):
                if rep.startswith("alt(3") and n < 3:
                    continue
                geo = "flat" if kind == "conformal" else "flat_affine"
                sc = ScenarioContext(Scenario(kind, {"name": geo, "n": n}, rep, jet_order=0, seed=seed))
                label = f"{kind}/n={n}/{rep}"
                checks.append(_named(run_check("algebra_suite", sc), label))
                checks.append(_named(run_check("hodge_suite", sc), label))
                checks.append(_named(_kostant_check(sc, n), label))
    geo_dims = (3,) if level == "quick" else (3, 4)
    scenarios = []
    for n in geo_dims:
        scenarios += [
            ("conformal", "sphere", n, "std"), ("conformal", "conformal", n, "std"),
            ("conformal", "conformal", n, "adjoint"), ("conformal", "random_metric", n, "std"),
            ("projective", "flat_affine", n, "std"), ("projective", "flat_affine", n, "dual(std)"),
            ("projective", "random_affine", n, "dual(std)"),
        ]
    for kind, geo, n, rep in scenarios:
        order = 5 if n == 3 else 4
        cfg = {"flavor": kind, "geometry": {"name": geo, "n": n}, "rep": rep, "jet_order": order,
               "trials": 1, "seed": seed}
        flat = geo in FLAT_GEOMETRIES
        names = ["curvature_suite", "closed_form_match", "named_operator"]
        if flat:
            names += ["complex_residual", "normality", "twisted_curvature"]
        scn = validate_config(cfg)
        sc = ScenarioContext(scn)
        label = f"{kind}/n={n}/{geo}/{rep}"
        for name in names:
            if scn.jet_order < required_order(name, sc):
                continue
            if name == "normality" and _normality_candidate(sc) is None:
                continue
            checks.append(_named(run_check(name, sc), label))
    checks.sort(key=lambda c: c["name"])
    report = {"version": __version__, "config": {"level": level}, "seed": seed, "checks": checks}
    return report, _exit_code(checks)


def _kostant_check(sc: ScenarioContext, n: int) -> dict:
    """Harmonic spaces are single-grade and g_0-irreducible away from the middle degree."""
    start = time.perf_counter()
    if not is_irreducible(list(sc.rep.action)):
        # the statement is about irreducible representations of the whole algebra
        return {"name": "kostant_irreducibility", "status": "skipped",
                "residuals": {"info_commutant_dim": float(commutant_dimension(list(sc.rep.action)))},
                "tolerance": 0.0, "jet_order_surviving": 0,
                "ms": round(1000 * (time.perf_counter() - start), 3),
                "detail": "representation is reducible under the full algebra"}
    h = sc.hodge
    bad = 0.0
    res = {}
    for k in range(n + 1):
        if 2 * k == n:
            continue
        parts = harmonic_structure(h, k)
        res[f"info_h{k}"] = float(h.cohomology[k])
        if len(parts) > 1 or not all(p["irreducible"] for p in parts):
            bad += 1
    res["reducible_degrees"] = bad
    return {"name": "kostant_irreducibility", "status": "pass" if bad == 0 else "fail", "residuals": res,
            "tolerance": 0.0, "jet_order_surviving": 0, "ms": round(1000 * (time.perf_counter() - start), 3),
            "detail": ""}


# -- output -------------------------------------------------------------------

def catalog_report() -> dict:
    entries = []
    for e in operator_catalog():
        d = asdict(e)
        d["sequence_orders"] = list(e.sequence_orders)
        entries.append(d)
    return {"version": __version__, "catalog": entries}


def emit_report(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"bggseq {report.get('version', '')}  seed={report.get('seed', '')}"]
    if "catalog" in report:
        for e in report["catalog"]:
            lines.append(f"  {e['name']:<45} {e['flavor']:<10} rep={e['rep']:<18} n={e['n']} "
                         f"k={e['degree']} order={e['expected_order']}  target: {e['target']}")
        return "\n".join(lines) + "\n"
    lines.append(f"config: {json.dumps(report.get('config', {}), sort_keys=True)}")
    for c in report.get("checks", []):
        asserted = {k: v for k, v in c["residuals"].items() if not k.startswith("info_")}
        worst = max(asserted.values(), default=0.0)
        lines.append(f"  {c['status']:<7} {c['name']:<60} max={worst:.3e} tol={c['tolerance']:.1e} "
                     f"order={c['jet_order_surviving']} {c['ms']:.0f}ms {c.get('detail', '')}".rstrip())
    counts = {s: sum(c["status"] == s for c in report.get("checks", [])) for s in ("pass", "fail", "skipped")}
    lines.append(f"summary: {counts['pass']} pass, {counts['fail']} fail, {counts['skipped']} skipped")
    return "\n".join(lines) + "\n"


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bggseq", description="BGG sequence verification on jets")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--out", default=None, help="write the report to this path")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one JSON scenario (path or '-' for stdin)")
    run.add_argument("config")
    ver = sub.add_parser("verify", help="run the built-in verification suite")
    ver.add_argument("--level", choices=("quick", "full"), default="quick")
    sub.add_parser("catalog", help="print the named-operator catalog")
    return parser


def _load_config(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise SchemaError(f"invalid JSON: {err}") from err


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            _write(emit_report(catalog_report(), args.format), args.out)
            return EXIT_OK
        if args.command == "verify":
            report, code = verify_suite(args.level, args.seed or 0)
        else:
            report, code = run_scenario(_load_config(args.config), args.seed)
    except (SchemaError, GeometryError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    except OrderBudgetError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_SCHEMA
    _write(emit_report(report, args.format), args.out)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
