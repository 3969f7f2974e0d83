"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a ``PASS``/``FAIL`` line that is printed in the terminal
summary.  Criteria that do not hold are marked ``xfail(strict=True)`` with the
reason; they fail loudly if they ever start passing.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tricrit import elliptic, extremal_fn as ef, nevanlinna as nv, triangle_map as tm, trinet as tn
from tricrit.cli import lemma_report
from tricrit.elliptic import is_inf
from tricrit.enumerate import enumerate_annuli

SQRT3 = math.sqrt(3)
SEED = 20240611


def record(label, ok, detail, seconds=None):
    took = f" [{seconds:.1f}s]" if seconds is not None else ""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}{took}")
    return ok


def loeschian(limit=40):
    return {3 * (a * a + a * b + b * b) for a in range(-limit, limit + 1) for b in range(-limit, limit + 1)}


def test_criterion_01_I_of_one():
    t = time.perf_counter()
    val = ef.integral_I([0, 1])
    dt = time.perf_counter() - t
    rel = abs(val - 2 * math.pi / SQRT3) / (2 * math.pi / SQRT3)
    assert record("1 I(1) = 2pi/sqrt3", rel < 1e-9 and dt < 1, f"rel err {rel:.2e} (tol 1e-9)", dt)


def test_criterion_02_invariants():
    t = time.perf_counter()
    c = elliptic.compute_constants()
    k6 = c.k**6
    e2, e3 = abs(c.g2), abs(c.g3 - k6) / k6
    # independent direct lattice sum
    l2, l3 = elliptic.lattice_sum_invariants(radius=80)
    dt = time.perf_counter() - t
    ok = e2 < 1e-10 and e3 < 1e-8 and abs(l2) < 1e-10 and abs(l3 - k6) / k6 < 1e-6 and dt < 10
    assert record("2 g2 = 0, g3 = k^6", ok,
                  f"|g2| {e2:.1e}, rel g3 {e3:.1e} (tol 1e-10, 1e-8); lattice sum rel g3 {abs(l3 - k6) / k6:.1e}", dt)


def test_criterion_03_rho0_area():
    t = time.perf_counter()
    area = tm.rho0_area()
    dt = time.perf_counter() - t
    rel = abs(area - SQRT3 / 2) / (SQRT3 / 2)
    assert record("3 rho0 area = sqrt3/2", rel < 1e-5 and dt < 30, f"rel err {rel:.2e} (tol 1e-5)", dt)


@pytest.fixture(scope="module")
def f1_counting():
    radii = nv.sample_radii(1e6, 20, r_min=100.0)
    radii = radii[radii >= 100]
    t = time.perf_counter()
    est = nv.pullback_count("f1", nv.SphereMeasure.spherical(), radii, mc_samples=2000, seed=SEED)
    return radii, est, time.perf_counter() - t


@pytest.mark.xfail(strict=True, reason="A - (sqrt3/pi) log r is periodic with an amplitude of about 1; over "
                   "[1e2, 1e6] the fitted slope is 2.5% low")
def test_criterion_04a_f1_slope(f1_counting):
    radii, est, dt = f1_counting
    fit = nv.fit_growth(radii, est.value, "A-linear-in-log")
    rel = fit.c1 / nv.SQRT3_OVER_PI - 1
    assert record("4a f1 A-slope by counting", abs(rel) < 0.02 and dt < 60,
                  f"slope {fit.c1:.5f} vs {nv.SQRT3_OVER_PI:.5f}, rel {rel:+.2%} (tol 2%)", dt)


def test_criterion_04b_estimators_agree(f1_counting):
    radii, est, _ = f1_counting
    sel = radii <= 1e4
    quad = nv.pullback_area("f1", radii[sel])
    worst = float(np.max(np.abs(est.value[sel] / quad - 1)))
    assert record("4b f1 counting vs quadrature on [1e2, 1e4]", worst < 0.03, f"max rel diff {worst:.2%} (tol 3%)")


@pytest.mark.xfail(strict=True, reason="the fitted c2 of T(r, f0) over [1e3, 1e6] is about 0.305, 11% above sqrt3/(2 pi)")
def test_criterion_05_f0_characteristic():
    t = time.perf_counter()
    series = nv.growth_series_quadrature("f0", 1e6)
    dt = time.perf_counter() - t
    fit = nv.fit_series(series, "T-quadratic-in-log", (1e3, 1e6))
    rel = fit.c2 / nv.SQRT3_OVER_2PI - 1
    ok = abs(rel) < 0.10 and dt < 1800 and not series.check_invariants()
    assert record("5 f0 T-series c2 over [1e3, 1e6]", ok,
                  f"c2 {fit.c2:.5f} vs {nv.SQRT3_OVER_2PI:.5f}, rel {rel:+.2%} (tol 10%)", dt)


def test_criterion_06_f0_single_valued():
    rng = np.random.default_rng(SEED)
    t = time.perf_counter()
    worst = 0.0
    n = 0
    while n < 50:
        z = complex(rng.uniform(-4, 4), rng.uniform(0.2, 4))
        if abs(z) < 0.1 or abs(z - 1) < 0.1:
            continue
        lower = rng.random() < 0.5
        # three homotopy classes of paths from 1/2 in C minus {0, 1}
        paths = [
            [0.5, 0.5 + 1j, z],
            [0.5, 0.5 - 0.5j, 2 - 0.5j, 2 + 0.5j, z],
            [0.5, 0.5 - 0.5j, -1 - 0.5j, -1 + 0.5j, z],
        ]
        if lower:
            paths = [[p.conjugate() for p in map(complex, path)] for path in paths]
        vals = [ef.f0(p) for p in paths]
        if any(is_inf(v) for v in vals):
            continue
        scale = max(1.0, max(abs(v) for v in vals))
        worst = max(worst, max(abs(v - vals[0]) for v in vals) / scale)
        n += 1
    dt = time.perf_counter() - t
    assert record("6 f0 single-valued (50 points x 3 classes)", worst < 1e-8 and dt < 60,
                  f"max spread {worst:.1e} (tol 1e-8)", dt)


def test_criterion_07_lemma_exhaustive():
    t = time.perf_counter()
    rep = lemma_report(12, 24)
    dt = time.perf_counter() - t
    fig = rep["figure1_ids"]
    fig_exact = len(fig) == 1 and rep["surfaces"][fig[0]]["exactly_sqrt3"]
    ok = (not rep["inconclusive"] and not rep["below_sqrt3"] and rep["global_min"] >= SQRT3 - 1e-9
          and fig_exact and dt < 600)
    assert record("7 systole >= sqrt3 on flat cylinders <= 12 triangles", ok,
                  f"{rep['n_surfaces']} classes, min {rep['global_min']!r}, {len(rep['equality_ids'])} equal to sqrt3, "
                  f"extremal cylinder exact: {fig_exact}", dt)


def test_criterion_07_extra_cone_points():
    t = time.perf_counter()
    rep = lemma_report(9, 24, cone_points=True)
    dt = time.perf_counter() - t
    ok = not rep["inconclusive"] and not rep["below_sqrt3"]
    assert record("7+ systole >= sqrt3 with cone points, <= 9 triangles", ok,
                  f"{rep['n_surfaces']} classes, min {rep['global_min']!r}", dt)


def test_criterion_08_translations():
    t = time.perf_counter()
    allowed = loeschian()
    nets = list(enumerate_annuli(10, flat_only=True).nets()) + list(enumerate_annuli(8).nets())
    found = bad = 0
    for net in nets:
        for tau in tn.holonomy_translation_lattice(net, max_crossings=12):
            if tau == (0, 0):
                continue  # identity holonomy is excluded by the claim
            found += 1
            bad += tn.norm2(tau) not in allowed
    dt = time.perf_counter() - t
    assert record("8 holonomy translations are hexagonal", bad == 0 and found > 0,
                  f"{found} translations on {len(nets)} cylinders, {bad} outside 3(a^2+ab+b^2)", dt)


@pytest.fixture(scope="module")
def f1_T():
    r = nv.sample_radii(1e5, 20)
    A = nv.pullback_area("f1", r)
    return r, A, nv.characteristic_series(r, A)


def _drift(r, D):
    sel = r >= 100
    return float(np.polyfit(np.log(r[sel]), D[sel], 1)[0]), float(D[sel].max())


def test_criterion_09_continuous_measures(f1_T):
    r, A, T = f1_T
    out = []
    for name, Amu in (("spherical", A), ("rho0", nv.SQRT3_OVER_PI * np.log(r))):
        slope, top = _drift(r, nv.characteristic_series(r, Amu) - T)
        out.append((name, slope, top))
    ok = all(s <= 0.1 for _, s, _ in out)
    assert record("9a N_mu - T bounded above, continuous mu", ok,
                  ", ".join(f"{n} slope {s:+.4f} max {m:.3f}" for n, s, m in out) + " (tol slope 0.1)")


def _N_point(w, r):
    """Exact ``int_e^r n(t, w) dt / t`` from the lattice roots."""
    roots = elliptic.solve_wp_prime(w)
    logr = np.log(r)
    out = np.zeros_like(r)
    c = 2 * math.pi / SQRT3
    for z in roots:
        y = z.imag
        for n in range(0, -int(nv.SQRT3_OVER_2PI * logr.max() / 1.5) - 3, -1):
            lz = -c * (y + 1.5 * n)  # log |preimage|
            if lz < 0:
                continue
            out += np.where(logr >= lz, logr - max(lz, 1.0), 0.0) * (logr >= 1)
    return out


@pytest.mark.xfail(strict=True, reason="on the annulus the unit circle maps to the real line, so N(r, w) - T(r) "
                   "drifts like +-(1/2) log r with the sign of -Im w")
def test_criterion_09_point_masses(f1_T):
    r, A, T = f1_T
    rng = np.random.default_rng(SEED)
    ws, _ = nv.SphereMeasure.spherical().sample(rng, 10)
    slopes = [_drift(r, _N_point(w, r) - T)[0] for w in ws]
    n_bad = sum(s > 0.1 for s in slopes)
    assert record("9b N_w - T bounded above, 10 point masses", n_bad == 0,
                  f"{n_bad}/10 drift upward, slopes {min(slopes):+.3f} .. {max(slopes):+.3f} (tol slope 0.1)")


def test_criterion_10_net_axioms():
    builders = [tn.build_sphere_net(), tn.build_figure1()]
    builders += [tn.build_hexagonal_patch(n) for n in (1, 2, 4)]
    builders += [tn.build_block_cylinder(n) for n in (1, 2, 4)]
    builders += [tn.build_patched_cylinder(n) for n in (1, 2, 3, 4, 5)]
    builders += [tn.build_strip_cylinder(m) for m in (3, 6, 9)]
    rng = np.random.default_rng(SEED)
    invalid = mismatched = 0
    for net in builders:
        invalid += not tn.validate_net(net).valid
        for _ in range(100):
            t = int(rng.integers(net.n_triangles))
            perm = list(rng.permutation(["A", "B", "C"]))
            relabel = dict(zip(net.triangle_labels(t), perm))
            out = tn.propagate_labels(net, t, perm)
            mismatched += out.labels != tuple(relabel[x] for x in net.labels)
    assert record("10 builders valid, labels unique", invalid == 0 and mismatched == 0,
                  f"{len(builders)} nets, {invalid} invalid, {mismatched}/{100 * len(builders)} propagations differ")
