"""Acceptance criteria, one test each.

Every test prints a single "criterion N ... PASS/FAIL" line with the measured
residuals, and the terminal summary repeats them.  Tolerances are the stated
ones; a criterion that does not hold is left failing.
"""
import time

import numpy as np
import pytest

from action_tables import (adjoint_table_residual, consistent_f2_coeff, lk_table_residual, printed_f2_coeff,
                           s2_table_residual, std_table_residual)
from bggseq.bgg import (GradeMismatch, bgg_operator, catalog_context, closed_form_residual, complex_residual,
                        defect_formula_residual, normality_check, operator_catalog, operator_order,
                        projective_divergence_closed_form, projective_hessian_closed_form, scalar_section,
                        section_form, splitting_operator, std_ops_closed_form)
from bggseq.geometry import (EXACT, bianchi_residual, christoffel_from_metric, curvature_package, geometry_catalog,
                             projective_curvature_package, valid_norm, weyl_trace_residual)
from bggseq.graded_lie import (build_graded_algebra, grade_additivity_residual, grading_element_residual,
                               jacobi_residual)
from bggseq.hodge import complementarity, equivariance_residuals, hodge_split, identity_residuals
from bggseq.reps import duality_residual, equivariance_residual, parse_rep
from bggseq.twisted import twisted_curvature_residual
from helpers import make_context, make_package, radial_square

RESULTS: dict[int, str] = {}

REP_CATALOG = {
    "conformal": ["std", "dual(std)", "sym0(2, std)", "sym0(2, dual(std))", "alt(2, dual(std))",
                  "alt(3, dual(std))", "adjoint"],
    "projective": ["std", "dual(std)", "sym(2, std)", "sym(2, dual(std))", "alt(2, dual(std))",
                   "alt(3, dual(std))", "adjoint"],
}
REP_DIMS = {"conformal": (3, 4), "projective": (2, 3)}


def catalog_reps():
    for kind, dims in REP_DIMS.items():
        for n in dims:
            for text in REP_CATALOG[kind]:
                if text.startswith("alt(3") and n < 3:
                    continue
                yield kind, n, text


def report(num, title, ok, detail):
    line = f"criterion {num} {title}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


def fmt(values):
    return ", ".join(f"{k}={v:.2e}" if isinstance(v, float) else f"{k}={v}" for k, v in values.items())


def test_criterion_1_algebra():
    start = time.perf_counter()
    worst = {"jacobi": 0.0, "grade_additivity": 0.0, "grading_element": 0.0}
    for kind, dims in (("conformal", (3, 4, 5)), ("projective", (2, 3, 4))):
        for n in dims:
            alg = build_graded_algebra(kind, n)
            worst["jacobi"] = max(worst["jacobi"], jacobi_residual(alg))
            worst["grade_additivity"] = max(worst["grade_additivity"], grade_additivity_residual(alg))
            worst["grading_element"] = max(worst["grading_element"], grading_element_residual(alg))
    elapsed = time.perf_counter() - start
    ok = max(worst.values()) <= 1e-12 and elapsed < 5.0
    report(1, "algebra suite", ok, f"{fmt(worst)}, seconds={elapsed:.2f}")


def test_criterion_2_representations():
    worst_eq = 0.0
    worst_dual = 0.0
    for kind, n, text in catalog_reps():
        rep = parse_rep(build_graded_algebra(kind, n), text)
        worst_eq = max(worst_eq, max(equivariance_residual(rep).values()))
        worst_dual = max(worst_dual, duality_residual(rep))
    tables = {
        "std": max(std_table_residual(n, 20, n) for n in (3, 4, 5)),
        "alt": max(lk_table_residual(n, k, 20, 10 * n + k) for n, k in ((3, 2), (4, 2), (4, 3), (5, 3))),
        "adjoint": max(adjoint_table_residual(n, 20, n) for n in (3, 4, 5)),
        "sym0_as_printed": max(s2_table_residual(n, 20, n, printed_f2_coeff(n)) for n in (3, 4, 5)),
    }
    info = max(s2_table_residual(n, 20, n, consistent_f2_coeff(n)) for n in (3, 4, 5))
    ok = worst_eq <= 1e-11 and worst_dual <= 1e-11 and max(tables.values()) <= 1e-11
    report(2, "representation suite", ok,
           f"equivariance={worst_eq:.2e}, duality={worst_dual:.2e}, {fmt(tables)}, "
           f"info_sym0_tensor_coefficient={info:.2e}")


def test_criterion_3_hodge():
    worst = {"dd": 0.0, "dstar_dstar": 0.0, "T_identities": 0.0, "equivariance": 0.0}
    complementary = True
    h0_ok = True
    nonzero = []
    for kind, n, text in catalog_reps():
        h = hodge_split(parse_rep(build_graded_algebra(kind, n), text))
        res = identity_residuals(h)
        if res["dd"] != 0.0 or res["dstar_dstar"] != 0.0:
            nonzero.append(f"{kind}{n}:{text}")
        worst["dd"] = max(worst["dd"], res["dd"])
        worst["dstar_dstar"] = max(worst["dstar_dstar"], res["dstar_dstar"])
        worst["T_identities"] = max(worst["T_identities"], res["TT"], res["TdT"], res["dTd"])
        eq = equivariance_residuals(h)
        worst["equivariance"] = max(worst["equivariance"], eq["dstar"], eq["T"])
        complementary &= all(complementarity(h).values())
        h0_ok &= h.cohomology[0] == h.rep.grade_dims()[0] and h.harmonic_grade_set(0) == [0]
    std3 = hodge_split(parse_rep(build_graded_algebra("conformal", 3), "std")).cohomology
    ok = (worst["dd"] == 0.0 and worst["dstar_dstar"] == 0.0 and worst["T_identities"] <= 1e-12
          and worst["equivariance"] <= 1e-11 and complementary and h0_ok and std3 == [1, 5, 5, 1])
    report(3, "hodge suite", ok,
           f"{fmt(worst)}, complementarity={complementary}, H0_is_lowest_grade={h0_ok}, "
           f"conformal_std_n3={std3}, reps_not_exactly_zero={len(nonzero)}")


def _norm(pkg, key, arr):
    return valid_norm(pkg.space, arr, pkg.valid[key])


def test_criterion_4_curvature():
    vals = {}
    flat_metric = geometry_catalog("flat", 3, 4)
    flat_conf = curvature_package(christoffel_from_metric(flat_metric), "conformal", flat_metric)
    flat_proj = projective_curvature_package(geometry_catalog("flat_affine", 3, 4))
    flat_exact = all(not np.any(arr) for p in (flat_conf, flat_proj) for arr in (p.R, p.ric, p.P, p.W, p.Y))

    sph = make_package("conformal", "sphere", 3, 5)
    vals["sphere_sc"] = _norm(sph, "sc", sph.sc - sph.space.constant(6.0))
    vals["sphere_P"] = _norm(sph, "P", sph.P - 0.5 * sph.metric.g)
    vals["sphere_W_Y"] = max(_norm(sph, "W", sph.W), _norm(sph, "Y", sph.Y))
    psph = make_package("projective", "sphere", 3, 5)
    vals["proj_sphere_ric"] = _norm(psph, "ric", psph.ric - 2.0 * psph.metric.g)
    vals["proj_sphere_P"] = _norm(psph, "P", psph.P - psph.metric.g)
    vals["proj_sphere_W_Y"] = max(_norm(psph, "W", psph.W), _norm(psph, "Y", psph.Y))

    vals["conformal_factor_n4"] = 0.0
    for seed in range(5):
        pkg = make_package("conformal", "conformal", 4, 4, seed=seed)
        vals["conformal_factor_n4"] = max(vals["conformal_factor_n4"], _norm(pkg, "W", pkg.W), _norm(pkg, "Y", pkg.Y))

    vals["bianchi"] = vals["weyl_trace"] = 0.0
    for seed in range(20):
        for pkg in (make_package("conformal", "random_metric", 4, 4, seed=seed),
                    make_package("projective", "random_metric", 4, 4, seed=seed),
                    make_package("projective", "random_affine", 3, 4, seed=seed)):
            vals["bianchi"] = max(vals["bianchi"], bianchi_residual(pkg))
            vals["weyl_trace"] = max(vals["weyl_trace"], weyl_trace_residual(pkg))

    ok = (flat_exact and max(vals[k] for k in ("sphere_sc", "sphere_P", "sphere_W_Y", "proj_sphere_ric",
                                                  "proj_sphere_P", "proj_sphere_W_Y")) <= 1e-9
          and vals["conformal_factor_n4"] <= 1e-8 and vals["bianchi"] <= 1e-10 and vals["weyl_trace"] <= 1e-10)
    report(4, "curvature suite", ok, f"flat_exact={flat_exact}, {fmt(vals)}")


def test_criterion_5_twisted_curvature():
    plus = minus = 0.0
    for flavor, geometry in (("conformal", "random_metric"), ("projective", "random_affine")):
        for rep in ("std", "adjoint"):
            for seed in range(20):
                ctx = make_context(flavor, geometry, 3, rep, 4, seed=seed)
                r = twisted_curvature_residual(ctx, 1, seed)
                plus = max(plus, r["residual_w_plus_y"])
                minus = max(minus, r["residual_w_minus_y"])
    sphere = 0.0
    for rep in ("std", "adjoint"):
        sphere = max(sphere, twisted_curvature_residual(make_context("conformal", "sphere", 3, rep, 5), 1, 0)
                     ["curvature_norm"])
    ok = plus <= 1e-8 and sphere <= 1e-8
    report(5, "twisted curvature", ok,
           f"W_plus_Y={plus:.2e}, sphere_curvature={sphere:.2e}, info_W_minus_Y={minus:.2e}")


def test_criterion_6_complex():
    dd = chain = 0.0
    for rep in ("std", "adjoint"):
        for seed in range(5):
            ctx = make_context("conformal", "conformal", 3, rep, 5, seed=seed)
            for k in range(ctx.n - 1):
                res = complex_residual(ctx, k, 1, seed)
                dd = max(dd, res["dd_relative"])
    for geometry in ("flat_affine", "sphere"):
        for rep in ("std", "dual(std)"):
            ctx = make_context("projective", geometry, 3, rep, 5)
            for k in range(ctx.n - 1):
                dd = max(dd, complex_residual(ctx, k, 1, k)["dd_relative"])
    for flavor, geometry, rep in (("conformal", "flat", "std"), ("conformal", "flat", "adjoint"),
                                  ("projective", "flat_affine", "std"), ("projective", "flat_affine", "dual(std)")):
        ctx = make_context(flavor, geometry, 3, rep, 5)
        for k in range(ctx.n - 1):
            chain = max(chain, complex_residual(ctx, k, 1, k)["chain_map"])
    bad = make_context("conformal", "perturbed", 4, "std", 5, eps=0.1, seed=7)
    counter = complex_residual(bad, 0, 1, 0)["dd_twisted_relative"]
    literal = defect_formula_residual(bad, 0, 2, 0)
    wedge = defect_formula_residual(bad, 0, 2, 0, cotton_sign=-1.0, overall_sign=-1.0)
    ok = dd <= 1e-8 and chain <= 1e-8 and counter > 1e-4 and literal["residual"] <= 1e-8
    report(6, "complex property", ok,
           f"DD_relative={dd:.2e}, chain_map={chain:.2e}, counterexample_dd={counter:.2e}, "
           f"defect_formula={literal['residual']:.2e}, info_wedge_with_curvature={wedge['residual']:.2e}")


def test_criterion_7_closed_forms():
    vals = {"std_ops": 0.0, "catalog": 0.0, "projective_hessian": 0.0, "projective_divergence": 0.0}
    for geometry in ("random_metric", "sphere", "conformal"):
        ctx = make_context("conformal", geometry, 3, "std", 5, seed=2)
        sp, n = ctx.space, ctx.n
        f = sp.random(np.random.default_rng(2))
        alpha = scalar_section(ctx, f, sp.order)
        s, d = splitting_operator(ctx, alpha), bgg_operator(ctx, alpha)
        (f0, grad, top), dref = std_ops_closed_form(ctx, f)
        vals["std_ops"] = max(vals["std_ops"], valid_norm(sp, s.c[0, 0] - f0, s.valid[0]),
                              valid_norm(sp, s.c[0, 1:n + 1] - grad, s.valid[1]),
                              valid_norm(sp, s.c[0, n + 1] - top, s.valid[2]),
                              valid_norm(sp, d.c[:, 1:n + 1] - dref, d.valid[1]))
    checked = 0
    for entry in operator_catalog():
        if entry.expected_order > 2:
            continue
        ctx = catalog_context(entry, 5 if entry.n <= 3 else 4, seed=1)
        try:
            vals["catalog"] = max(vals["catalog"], closed_form_residual(ctx, entry.degree, 2, 1))
            checked += 1
        except GradeMismatch:
            continue
    for geometry in ("random_affine", "flat_affine"):
        ctx = make_context("projective", geometry, 3, "dual(std)", 5, seed=3)
        sp = ctx.space
        f = sp.random(np.random.default_rng(3))
        alpha = scalar_section(ctx, f, sp.order)
        s, d = splitting_operator(ctx, alpha), bgg_operator(ctx, alpha)
        (f0, df), dref = projective_hessian_closed_form(ctx, f)
        vals["projective_hessian"] = max(vals["projective_hessian"], valid_norm(sp, d.c[:, 1:] - dref, d.valid[1]),
                                         valid_norm(sp, s.c[0, 1:] - df, s.valid[1]))
        ctx = make_context("projective", geometry, 3, "std", 5, seed=4)
        n = ctx.n
        eta = sp.random(np.random.default_rng(4), (n,))
        d = bgg_operator(ctx, section_form(ctx, {0: eta}, sp.order))
        vals["projective_divergence"] = max(vals["projective_divergence"], valid_norm(
            sp, d.c[:, :n] - projective_divergence_closed_form(ctx, eta), d.valid[0]))
    ok = (vals["std_ops"] <= 1e-10 and vals["catalog"] <= 1e-9 and checked > 0
          and vals["projective_hessian"] <= 1e-10 and vals["projective_divergence"] <= 1e-10)
    report(7, "closed-form operators", ok, f"{fmt(vals)}, catalog_entries={checked}")


def test_criterion_8_normal_solutions():
    ctx = make_context("conformal", "sphere", 3, "std", 5)
    sp = ctx.space
    one, r2 = sp.constant(1.0), radial_square(sp)
    height = sp.mul(one - r2, sp.reciprocal(one + r2))
    sol, normal = normality_check(ctx, scalar_section(ctx, height, sp.order))
    flat = make_context("conformal", "flat", 3, "std", 4)
    x1 = flat.space.coordinate(0)
    rejected_sol, _ = normality_check(flat, scalar_section(flat, flat.space.mul(x1, x1), EXACT))
    ok = sol <= 1e-8 and normal <= 1e-8 and rejected_sol > 1e-8
    report(8, "normal solutions", ok, f"height_D={sol:.2e}, height_parallel={normal:.2e}, "
                                      f"flat_quadratic_D={rejected_sol:.2e}")


def test_criterion_9_orders():
    mismatches = []
    for entry in operator_catalog():
        ctx = catalog_context(entry, 5 if entry.n <= 3 else 4, seed=0)
        budget = 4 if entry.n <= 3 else 3
        got = max(operator_order(ctx, entry.degree, max_order=budget).values())
        if got != entry.expected_order:
            mismatches.append(f"{entry.name}: {got} != {entry.expected_order}")
        if entry.sequence_orders:
            seq = tuple(max(operator_order(ctx, k, max_order=budget).values()) for k in range(entry.n))
            if seq != entry.sequence_orders:
                mismatches.append(f"{entry.name} sequence: {seq} != {entry.sequence_orders}")
    report(9, "operator orders", not mismatches,
           f"entries={len(operator_catalog())}, mismatches={mismatches or 0}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
