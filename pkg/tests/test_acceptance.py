"""Acceptance criteria, each run at its stated size and tolerance.

Every criterion prints one PASS/FAIL line (collected in the terminal summary).
"""
import json
import math
import random
import time
from fractions import Fraction
from itertools import product

import pytest

import conftest
from conftest import random_lattice, random_T_poly
from singular_ff.cli import main
from singular_ff.contfrac import periodic
from singular_ff.dynamics import (FlowSpec, box_dimension_estimate, dani_scan, measure_Z_profile, phi_pushforward,
                                  trajectory)
from singular_ff.exterior import KMatrix, WedgeVector
from singular_ff.flow import flow_matrix
from singular_ff.gf import FieldSpec
from singular_ff.laurent import LaurentElement, lift_rational
from singular_ff.lattice import (PolyLattice, greedy_minima_oracle, saturate, subspace_intersection, subspace_norm,
                                 subspace_sum, successive_minima)
from singular_ff.margulis import MargulisParams, alpha_tilde
from singular_ff.measure import (ValuationEvent, contraction_integral_U, log_slope, measure, neg_moment,
                                 truncated_neg_moment, verify_bound_E)

F2, F3 = FieldSpec.from_q(2), FieldSpec.from_q(3)


def report(number, title, passed, detail, elapsed, limit):
    within = elapsed < limit
    ok = passed and within
    conftest.ACCEPTANCE_LINES.append(
        f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail} [{elapsed:.1f}s, limit {limit}s]")
    print(conftest.ACCEPTANCE_LINES[-1])
    assert passed, detail
    assert within, f"took {elapsed:.1f}s, limit {limit}s"


def test_01_exact_measure_identities():
    t0 = time.perf_counter()
    bad = []
    for q, F in ((2, F2), (3, F3)):
        for d in range(1, 4):
            for level in range(1, 4):
                if measure(d, 1, ValuationEvent.E(level), F, engine="enumerate") != Fraction(1, q ** (level * d)):
                    bad.append(("ball", q, d, level))
    two_by_two = measure(2, 2, ValuationEvent.E(1), F2, engine="enumerate")
    if two_by_two != Fraction(5, 8):
        bad.append(("E1(2,2)", two_by_two))
    profiles = 0
    for d in range(1, 4):
        for prof in product(range(3), repeat=d):
            mu = measure(d, 1, ValuationEvent.D(prof), F2, engine="enumerate")
            expect = math.prod((Fraction(1, 2 ** n) - Fraction(1, 2 ** (n + 1)) for n in prof), start=Fraction(1))
            profiles += 1
            if mu != expect:
                bad.append(("D", prof, mu, expect))
    report(1, "exact measure identities", not bad,
           f"balls q in (2,3), d<=3, l<=3; mu(E_1(2,2)) = {two_by_two}; {profiles} profiles; mismatches {bad}",
           time.perf_counter() - t0, 60)


def test_02_minor_valuation_exponent():
    t0 = time.perf_counter()
    rows, ok = [], True
    for d, i in ((2, 1), (3, 2), (2, 2), (3, 3)):
        rep = verify_bound_E(d, i, 3, F2)
        base = rep.rows[0][2]
        ok &= all(r[2] <= 4 * base for r in rep.rows)
        rows.append(f"({d},{i}) sup {rep.sup}")
    report(2, "normalised E_l measures bounded by 4x the l=0 value", ok, "; ".join(rows),
           time.perf_counter() - t0, 600)


def test_03_negative_moments():
    t0 = time.perf_counter()
    br = neg_moment(2, 1, 1, 20, F2)
    bracket_ok = br.lower <= 1.5 <= br.upper and br.upper - br.lower < 1e-3
    C2 = br.fitted_C2
    ratios = [truncated_neg_moment(2, 1, k, F2).value / k for k in range(1, 7)]
    trunc_ok = all(r <= Fraction(3, 2) * C2 for r in ratios)
    report(3, "negative moment bracket and truncated moments", bracket_ok and trunc_ok,
           f"bracket [{br.lower:.7f}, {br.upper:.7f}] width {br.upper - br.lower:.2e}; C2 = {C2}; "
           f"max truncated/kappa = {max(ratios)}", time.perf_counter() - t0, 60)


def test_04_hodge_and_jacobi(tmp_path):
    t0 = time.perf_counter()
    code = main(["verify-hodge", "--trials", "10000", "--out", str(tmp_path)])
    checks = {c["name"]: c for c in json.loads((tmp_path / "summary.json").read_text())["checks"]}
    wanted = ["hodge_norm_preserved", "hodge_equivariance", "jacobi_identity", "counterexample_star_not_equivariant"]
    ok = code == 0 and all(checks[w]["pass"] for w in wanted)
    detail = ", ".join(f"{w}={checks[w]['value']}" for w in wanted[:3])
    report(4, "Hodge star and Jacobi identity (10^4 / 10^3 instances)", ok, detail + ", counterexample reproduced",
           time.perf_counter() - t0, 120)


@pytest.mark.xfail(strict=True, reason="the integral is exactly (t+1) 2^-t, whose log-slope over t=1..6 is about "
                                       "-0.65; the [-1.3, -0.7] window is not attainable")
def test_05_single_step_contraction_exponent():
    t0 = time.perf_counter()
    v = WedgeVector.basis(F2, 2, (2,))
    exact1 = contraction_integral_U(1, 1, 1, v, 0, 0, exact=True).value
    ts = list(range(1, 7))
    res = [contraction_integral_U(1, 1, t, v, 10 ** 4, seed=100 + t) for t in ts]
    slope = log_slope(ts, [r.value for r in res], 2)
    t1_ok = exact1 == 1 and abs(res[0].value - 1.0) <= 3 * res[0].stderr
    report(5, "single-step contraction slope", -1.3 <= slope <= -0.7 and t1_ok,
           f"slope {slope:.3f} (window [-1.3, -0.7]); t=1 value {res[0].value:.4f} +- {res[0].stderr:.4f}, "
           f"exact {exact1}", time.perf_counter() - t0, 300)


def random_subspace(x, k, rng):
    coeffs = KMatrix(F2, [[random_T_poly(F2, rng, 2) for _ in range(k)] for _ in range(x.d)])
    return saturate(x, x.basis @ coeffs, allow_dependent=True)


def test_06_lattice_reduction_oracles():
    t0 = time.perf_counter()
    rng = random.Random(6)
    mismatches = det_failures = 0
    for _ in range(1000):
        x = random_lattice(F2, rng.randint(1, 3), 3, rng)
        lam = successive_minima(x)
        mismatches += greedy_minima_oracle(x) != lam
        det_failures += math.prod(lam, start=Fraction(1)) != x.basis.det().abs()
    sub_failures = 0
    for _ in range(1000):
        d = rng.randint(2, 3)
        x = random_lattice(F2, d, 2, rng)
        L1, L2 = (random_subspace(x, rng.randint(1, d), rng) for _ in range(2))
        lhs = subspace_norm(x, subspace_sum(L1, L2)) * subspace_norm(x, subspace_intersection(L1, L2))
        sub_failures += lhs > subspace_norm(x, L1) * subspace_norm(x, L2)
    report(6, "reduction vs brute-force minima, determinant, submodularity",
           mismatches == det_failures == sub_failures == 0,
           f"minima mismatches {mismatches}/1000, determinant failures {det_failures}, "
           f"submodularity failures {sub_failures}/1000", time.perf_counter() - t0, 600)


def test_07_dani_corpus():
    t0 = time.perf_counter()
    T = (0, 1)
    singular = {
        "0": LaurentElement.zero(F2),
        "1/T": lift_rational([1], [0, 1], 64, F2),
        "T/(T+1)": lift_rational([0, 1], [1, 1], 64, F2),
        "(T^2+T+1)/(T+1)": lift_rational([1, 1, 1], [1, 1], 64, F2),
    }
    badly = {
        "[T;T,...]": periodic([T], F2, 64, head=[T]),
        "[T+1;T+1,...]": periodic([(1, 1)], F2, 64, head=[(1, 1)]),
        "[T;T+1,...]": periodic([(1, 1)], F2, 64, head=[T]),
    }
    spec, x0 = FlowSpec(1, 1, 1), PolyLattice.standard(F2, 2)
    agree, notes = 0, []
    for name, s in {**singular, **badly}.items():
        s = KMatrix(F2, [[s]])
        scan = dani_scan(s, -2, 10)
        rec = trajectory(x0, s, spec, 20)
        top_alpha1 = max(float(st.alphas[1]) for st in rec.steps)
        if name in singular:
            ok = all(w.passes for w in scan) and top_alpha1 > 2 ** 10
        else:
            ok = not all(w.passes for w in scan) and rec.max_height() <= 4
        agree += ok
        notes.append(f"{name}: max alpha_1 {top_alpha1:g}, max height {rec.max_height():g}")
    report(7, "Dani correspondence corpus", agree == 7, f"agreement {agree}/7; " + "; ".join(notes),
           time.perf_counter() - t0, 300)


def test_08_combination_map_uniform():
    t0 = time.perf_counter()
    dist = phi_pushforward(FlowSpec(1, 1, 1), 2, 2, F2)
    ok = len(dist) == 4 and len(set(dist.values())) == 1
    report(8, "combination map pushforward uniform mod pi^2", ok, f"counts {sorted(dist.values())}",
           time.perf_counter() - t0, 60)


def test_09_escape_measure_decay():
    t0 = time.perf_counter()
    x = PolyLattice(flow_matrix(FlowSpec(1, 1, 8), F2))
    prof = measure_Z_profile(x, 256, 4, FlowSpec(1, 1, 2), 20000, seed=9)
    Ns = [N for N in range(1, 5) if prof[N].value > 0]
    slope = log_slope(Ns, [prof[N].value for N in Ns], 2) if len(Ns) >= 2 else float("nan")
    report(9, "escape-set measure decay from a deep cusp point", len(Ns) == 4 and slope <= -1,
           f"mu(Z_N) = {[round(prof[N].value, 5) for N in range(1, 5)]}; slope {slope:.3f} (bound -1)",
           time.perf_counter() - t0, 600)


def test_10_box_slopes():
    t0 = time.perf_counter()
    x = PolyLattice.standard(F2, 2)
    ok, notes = True, []
    for t in (1, 2):
        spec = FlowSpec(1, 1, t)
        M = alpha_tilde(x, MargulisParams(1, 1, t))
        reps = {d: box_dimension_estimate(x, d, spec, range(1, 5), M) for d in (0, Fraction(1, 2), 1)}
        ok &= all(s <= 0.85 for s in reps[1].slopes)
        ok &= all(reps[0].slopes[j] >= reps[Fraction(1, 2)].slopes[j] >= reps[1].slopes[j] for j in range(4))
        notes.append(f"t={t}: delta=1 slopes {[round(s, 3) for s in reps[1].slopes]}")
    report(10, "covering slopes for delta-escape sets", ok, "; ".join(notes), time.perf_counter() - t0, 900)


RUNS = {
    "verify-measure": [],
    "verify-hodge": ["--trials", "300"],
    "contraction": ["--trials", "1000", "--N", "3"],
    "trajectory": ["--s", "(T^2+T+1)/(T+1)", "--N", "20"],
    "dani-scan": ["--s", "cf:T;T+1"],
    "covering": ["--N", "3", "--trials", "1000"],
    "dim-estimate": ["--N", "3", "--delta", "1/2"],
}


def test_11_determinism(tmp_path):
    t0 = time.perf_counter()
    differing = []
    for name, args in RUNS.items():
        dirs = []
        for tag, workers in (("a", "1"), ("b", "1"), ("c", "8")):
            out = tmp_path / name / tag
            main([name, *args, "--workers", workers, "--out", str(out)])
            dirs.append(out)
        files = sorted(p.relative_to(dirs[0]) for p in dirs[0].rglob("*") if p.is_file())
        for other in dirs[1:]:
            if files != sorted(p.relative_to(other) for p in other.rglob("*") if p.is_file()):
                differing.append(f"{name}: file sets differ")
            differing += [f"{name}/{f}" for f in files if (dirs[0] / f).read_bytes() != (other / f).read_bytes()]
    report(11, "byte-identical reruns with 1 and 8 workers", not differing,
           f"{len(RUNS)} commands, differing files {differing}", time.perf_counter() - t0, 900)
