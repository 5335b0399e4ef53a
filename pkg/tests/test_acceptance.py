"""Acceptance suite: one test per exit criterion, each printing a pass/fail
line (run with -s to see them for passing tests).

Criterion 2's k = 1 case is implemented exactly as stated and is expected
to fail: the converged shooting oracle puts the first k = 1 root at
x0 = 0.99 at s = 1.5552, i.e. 0.555 above the full-sphere limit s = 1,
so no truncation order can meet the stated 0.3 bound.  The failure is a
property of the problem, not of the solver; see the k = 3 and k = 5 cases
for the regime where the limit is accurate.
"""

import warnings

import numpy as np
import pytest

import sphere_spectra as ss

warnings.simplefilter("ignore", ss.GridTooCoarseWarning)


def report(criterion, passed, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
    assert passed, f"criterion {criterion}: {detail}"


def series_roots(k, eps, x0, M, smax, smin=None, step=0.05):
    params = ss.SpectralParams(k=k, eps=eps, x0=x0, M=M)
    if smin is None:
        smin = step if k == 0 else 0.0
    cfg = ss.ScanConfig(smin, smax, step)
    return ss.scan_real_roots(ss.det_functional(params), cfg)


def test_criterion_1_analytic_spectra_exact():
    worst = 0.0
    for k in range(1, 6):
        for eps in (0.0, 3.0):
            sigma = np.sqrt(k * k + eps * eps / 4)
            spec = ss.spectrum_full_sphere_k(k, eps, 8)
            n = np.arange(9)
            expect = -(sigma + n) * (sigma + n + 1)
            worst = max(worst, np.abs(spec.mu_values - expect).max())
    report(1, worst == 0.0, f"max |mu - formula| = {worst:.1e}")


@pytest.mark.parametrize("k,bound", [(1, 0.3), (3, 0.05), (5, 0.05)])
def test_criterion_2_full_sphere_limit(k, bound):
    roots = series_roots(k, 0.0, 0.99, 150, k + 3.5)
    targets = k + np.arange(3)
    got = np.array([r.s.real for r in roots[:3]])
    gaps = np.abs(got - targets)
    ok = len(got) == 3 and np.all(gaps < bound)
    report(f"2(k={k})", ok,
           f"roots {np.round(got, 4)} vs {targets}, max gap "
           f"{gaps.max() if len(got) else float('nan'):.3f} (bound {bound})")


@pytest.mark.parametrize("k", [1, 5])
def test_criterion_3_truncation_convergence(k):
    smax = k + 8.0
    r125 = [r.s.real for r in series_roots(k, 0.0, 0.9, 125, smax)][:5]
    r150 = [r.s.real for r in series_roots(k, 0.0, 0.9, 150, smax)][:5]
    moves = np.abs(np.array(r125) - np.array(r150))
    ok = len(r125) == len(r150) == 5 and np.all(moves < 1e-6)
    report(f"3(k={k})", ok, f"max |ds| between M=125 and M=150: "
                            f"{moves.max():.2e}")


@pytest.mark.parametrize("x0", [0.5, 0.9])
@pytest.mark.parametrize("eps", [0.0, 1.0, 4.0])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_criterion_4_oracle_equivalence(k, eps, x0):
    M = 100 if k == 0 else 150
    params = ss.SpectralParams(k=k, eps=eps, x0=x0, M=M)
    smin = 0.05 if k == 0 else 0.0
    cfg = ss.ScanConfig(smin, 8.0)
    series = [r.s.real for r in
              ss.scan_real_roots(ss.det_functional(params), cfg)]
    shoot = ss.shoot_functional(params, n_steps=2000)
    found = [r.s.real for r in ss.oracle_roots(shoot, cfg)]
    same = len(series) == len(found)
    gap = (np.abs(np.array(series) - np.array(found)).max()
           if same and series else 0.0)
    ok = same and gap < 1e-6
    report(f"4(k={k},eps={eps},x0={x0})", ok,
           f"{len(series)} series vs {len(found)} oracle roots, "
           f"max |ds| = {gap:.2e}")


def test_criterion_5_coalescence_and_stability_domain():
    merges = 0
    complex_after_merge = 0
    outside = []
    worst_residual = 0.0
    for k in (1, 3):
        fam = lambda e: ss.det_functional(
            ss.SpectralParams(k=k, eps=float(e), x0=0.9, M=150))
        branches = ss.trace_parameter(fam, "eps", np.arange(0, 12.001, 0.25),
                                      ss.ScanConfig(0.0, 8.0),
                                      rescan_every=4)
        events = {(e.param, e.branch_ids)
                  for br in branches for e in br.events}
        if k == 1:
            merges = len(events)
            for br in branches:
                for p, r in br.samples:
                    if br.events and r.kind == "complex-pair" \
                            and p >= min(e.param for e in br.events):
                        complex_after_merge += 1
        for br in branches:
            first_merge = min((e.param for e in br.events), default=None)
            for p, r in br.samples:
                if r.kind == "complex-pair":
                    if not r.stable:
                        outside.append((k, p, r.s))
                    # the |F| < 1e-8 check applies to the continuation just
                    # above the merge, where the determinant has slope
                    if first_merge is not None and p <= first_merge + 2.0:
                        worst_residual = max(worst_residual, r.residual)
    ok = (merges >= 1 and complex_after_merge >= 1 and not outside
          and worst_residual < 1e-8)
    report(5, ok, f"k=1 merges: {merges}, complex continuation samples: "
                  f"{complex_after_merge}, outside stability domain: "
                  f"{len(outside)}, worst complex residual: "
                  f"{worst_residual:.1e}")


def test_criterion_6_k0_negativity_and_integer_trend():
    gaps = {}
    all_negative = True
    for x0 in (0.5, 0.9, 0.95):
        roots = series_roots(0, 1.0, x0, 100, 8.0, smin=-0.44)
        mus = [r.mu.real for r in roots]
        all_negative &= bool(mus) and all(mu < 0 for mu in mus)
        if x0 in (0.9, 0.95):       # the integer-trend clause
            gaps[x0] = np.abs(np.array([r.s.real for r in roots[:3]])
                              - np.arange(1, 4))
    trend = (len(gaps[0.95]) == 3 and len(gaps[0.9]) == 3
             and np.all(gaps[0.95] < gaps[0.9]))
    report(6, all_negative and trend,
           f"all mu < 0: {all_negative}; gaps at x0=0.9 "
           f"{np.round(gaps[0.9], 3)} -> x0=0.95 {np.round(gaps[0.95], 3)}")


def test_criterion_7_chi_regime_split():
    results = {}
    for eps, target in ((1.0, 1.0), (4.0, 2.0)):
        params = ss.SpectralParams(k=0, eps=eps, x0=0.99, M=10)
        shoot = ss.shoot_functional(params, n_steps=2000, which="chi")
        roots = ss.oracle_roots(shoot, ss.ScanConfig(0.05, target + 0.6))
        results[eps] = roots[0].s.real if roots else float("nan")
    ok = (abs(results[1.0] - 1.0) < 0.1 and abs(results[4.0] - 2.0) < 0.1)
    report(7, ok, f"first roots: eps=1 -> {results[1.0]:.4f} (limit 1), "
                  f"eps=4 -> {results[4.0]:.4f} (limit 2)")


def test_criterion_8_structural_invariants():
    problems = []
    rng = np.random.default_rng(11)

    # determinant reflection symmetry
    F = ss.det_functional(ss.SpectralParams(k=2, eps=1.5, x0=0.8, M=100))
    for _ in range(5):
        s = complex(rng.uniform(-0.4, 4), rng.uniform(-2, 2))
        v1, v2 = F(np.array([s]))[0], F(np.array([-1 - s]))[0]
        if abs(v1 - v2) > 1e-12 * abs(v1):
            problems.append(f"F(s) != F(-1-s) at {s}")

    # k-sign symmetry
    for k in (1, 2, 3):
        s = np.array([0.7 + 0.2j, 2.4, 3.1 - 1.0j])
        vp = ss.det_functional(ss.SpectralParams(k=k, eps=2.0, x0=0.8, M=80))(s)
        vm = ss.det_functional(ss.SpectralParams(k=-k, eps=2.0, x0=0.8, M=80))(s)
        if not np.array_equal(vp, vm):
            problems.append(f"F_k != F_-k at k={k}")

    # parity block factorization at eps = 0
    params = ss.SpectralParams(k=2, eps=0.0, x0=0.8, M=80)
    for s in (1.3, 2.6 + 0.4j):
        A = ss.assemble_A_k(params, s).entries
        full = np.linalg.det(A)
        blocks = (np.linalg.det(A[np.ix_([0, 2], [0, 2])])
                  * np.linalg.det(A[np.ix_([1, 3], [1, 3])]))
        if abs(full - blocks) > 1e-10 * abs(full):
            problems.append(f"block factorization fails at s={s}")

    # polynomial constructors against the published closed forms
    for sigma in (0.0, 1.0, 2.0):
        F2 = ss.hypergeom_truncated(2, sigma).coefficients
        ref2 = np.array([-1.0, 0.0, 2 * sigma + 3]) / (2 * (1 + sigma))
        F3 = ss.hypergeom_truncated(3, sigma).coefficients
        ref3 = np.array([0.0, -3.0, 0.0, 5 + 2 * sigma]) / (2 * (1 + sigma))
        G1 = ss.k0_truncated(1, sigma).coefficients
        g1 = np.array([sigma, 1.0]) / (1 + sigma)
        G2 = ss.k0_truncated(2, sigma).coefficients
        g2 = np.array([sigma ** 2 - 1, 3 * sigma, 3.0]) / ((1 + sigma) * (2 + sigma))
        G3 = ss.k0_truncated(3, sigma).coefficients
        g3 = (np.array([sigma * (sigma ** 2 - 4), 6 * sigma ** 2 - 9,
                        15 * sigma, 15.0])
              / ((1 + sigma) * (2 + sigma) * (3 + sigma)))
        for got, ref, name in ((F2, ref2, "F2"), (F3, ref3, "F3"),
                               (G1, g1, "G1"), (G2, g2, "G2"), (G3, g3, "G3")):
            got = np.pad(got, (0, len(ref) - len(got)))
            if np.abs(got - ref).max() > 1e-12:
                problems.append(f"{name} coefficients off at sigma={sigma}")

    # transform-pair residuals on constructed modes
    for eps, n in ((0.0, 1), (0.0, 2), (4.0, 0), (4.0, 1), (6.0, 2)):
        chi, mu = ss.chi_mode(eps, n)
        if ss.darboux_residual(chi, eps, mu) > 1e-10:
            problems.append(f"darboux residual at eps={eps}, n={n}")

    # Green identity on first roots at eps = 0
    for k in (1, 3):
        params = ss.SpectralParams(k=k, eps=0.0, x0=0.9, M=150)
        root = ss.scan_real_roots(ss.det_functional(params),
                                  ss.ScanConfig(0.0, k + 3.0))[0]
        coeffs = ss.eigenfunction_coeffs(params, root.s)
        res = ss.green_identity_residual(coeffs, root.mu.real, params)
        if res > 1e-4:
            problems.append(f"green identity residual {res:.1e} at k={k}")

    report(8, not problems, "; ".join(problems) if problems else
           "reflection, k-sign, parity blocks, polynomials, transform pair, "
           "Green identity all within tolerance")
