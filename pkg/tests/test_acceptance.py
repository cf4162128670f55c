"""End-to-end acceptance checks.

Each test records one PASS/FAIL line through ``record``; the lines are
printed in the terminal summary by ``conftest.pytest_terminal_summary``.
"""
import json
import time

import numpy as np
from conftest import (
    ACCEPTANCE,
    CIRCULAR_SIDES,
    LSHAPE,
    PENTAGON,
    REENTRANT,
    circle_spec,
    lobe,
)
from oracles import disjoint_disks_modulus, eccentric_annulus_modulus

from confmap import (
    ConformalMap,
    MapOptions,
    annulus,
    circular_polygon,
    conformal_map,
    polygon,
    smooth,
    verify_map,
)
from confmap.aaa import BarycentricRational, aaa_fit, cleanup, poles_residues_zeros
from confmap.cli import main
from confmap.geometry import smooth_spec
from confmap.lightning import corner_basis_model, place_poles, solve_dirichlet


def record(number, title, ok, detail):
    ACCEPTANCE[number] = f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title}: {detail}"
    assert ok, detail


def circle(m):
    return np.exp(2j * np.pi * np.arange(m) / m)


def test_01_identity():
    t0 = time.perf_counter()
    m = conformal_map(smooth(lambda t: np.exp(2j * np.pi * t), 64))
    elapsed = time.perf_counter() - t0
    rng = np.random.default_rng(0)
    inner = np.sqrt(rng.uniform(size=500)) * np.exp(2j * np.pi * rng.uniform(size=500))
    z = np.r_[inner, circle(500)]
    err = float(np.max(np.abs(m(z) - z)))
    record(1, "identity on the unit disk", err <= 1e-8 and elapsed < 1.0,
           f"max error {err:.1e} (<= 1e-8), {elapsed:.2f} s (< 1 s)")


def test_02_smooth_lobe():
    region = smooth(lobe(0.15))
    t0 = time.perf_counter()
    m = conformal_map(region, MapOptions(tol=1e-5, method="polynomial"))
    elapsed = time.perf_counter() - t0
    dp = float(np.min(region.distance_to_boundary(m.forward_poles())))
    di = float(np.min(np.abs(np.abs(m.inverse_poles()) - 1)))
    ok = (m.converged and m.boundary_error <= 1e-4 and max(m.degrees) <= 60
          and 0.02 <= dp <= 0.5 and 0.01 <= di <= 0.3 and elapsed <= 10)
    record(2, "smooth 5-lobe, polynomial path", ok,
           f"converged={m.converged}, error {m.boundary_error:.1e}, degrees {m.degrees}, "
           f"pole distances {dp:.3f} / {di:.3f}, {elapsed:.1f} s")


def test_03_deep_lobe_flags(tmp_path, capsys):
    spec = tmp_path / "deep.json"
    spec.write_text(json.dumps(smooth_spec(lobe(0.5), 256)))
    code = main(["map", str(spec), "--method", "polynomial", "--out", str(tmp_path / "m.json")])
    err = capsys.readouterr().err
    record(3, "deep 5-lobe fails and flags", code == 3,
           f"exit code {code} (want 3); stderr: {err.strip().splitlines()[-1] if err else ''}")


def test_04_pentagon():
    region = polygon(PENTAGON)
    t0 = time.perf_counter()
    m = conformal_map(region, MapOptions(tol=1e-6))
    rep = verify_map(m, region, n_test=1000)
    elapsed = time.perf_counter() - t0
    p = m.forward_poles()
    near = [int(np.sum(np.abs(p - v) < 0.5)) for v in PENTAGON]
    d = np.sort(np.abs(p - PENTAGON[0]))
    d = d[d < 0.5]
    ratios = d[1:] / d[:-1]
    ok = (rep.boundary_error <= 1e-5 and rep.roundtrip_error <= 1e-4 and min(near) >= 3
          and ratios.size > 0 and np.all((ratios >= 1.5) & (ratios <= 6)) and elapsed <= 10)
    record(4, "regular pentagon, lightning path", ok,
           f"boundary {rep.boundary_error:.1e}, round trip {rep.roundtrip_error:.1e}, "
           f"poles near vertices {near}, ratios {np.round(ratios, 2).tolist()}, {elapsed:.1f} s")


def test_05_lshape_poles(lshape_map):
    p = lshape_map.forward_poles()
    at_reentrant = int(np.sum(np.abs(p - REENTRANT) < 0.1))
    salient = [v for v in LSHAPE if abs(v - REENTRANT) > 1e-12]
    at_salient = int(sum(np.sum(np.abs(p - v) < 0.02) for v in salient))
    corner = polygon(LSHAPE).corners[0]
    d = place_poles(corner, 25, L=1.0).distances
    # ratios at the large-j end of the index set, where spacing approaches 1.4
    inner = d[-3:] / d[-4:-1]
    ok = at_reentrant >= 3 and at_salient == 0 and np.all(np.abs(inner - 1.4) <= 0.4)
    record(5, "L-shape pole clustering", ok,
           f"{at_reentrant} forward poles within 0.1 of the reentrant corner, "
           f"{at_salient} within 0.02 of salient corners, n=25 inner ratios "
           f"{np.round(inner, 2).tolist()}")


def test_06_circular_polygon():
    inner = solve_dirichlet(circular_polygon(CIRCULAR_SIDES), tol=1e-6)
    ext = solve_dirichlet(circular_polygon(CIRCULAR_SIDES, target="ext-ext"), tol=1e-6)
    inside = bool(circular_polygon(CIRCULAR_SIDES).contains(ext.poles).all())
    ok = inner.error <= 1e-5 and ext.converged and inside
    record(6, "circular polygon, interior and exterior", ok,
           f"interior error {inner.error:.1e}, exterior error {ext.error:.1e} "
           f"(converged={ext.converged}), exterior poles inside P: {inside}")


def test_07_annuli():
    concentric = conformal_map(annulus(circle_spec(0, 1), circle_spec(0, 0.5))).modulus
    ecc_region = annulus(circle_spec(0, 1), circle_spec(0.3, 0.3))
    ecc = conformal_map(ecc_region).modulus
    oracle = eccentric_annulus_modulus(0.3, 0.3)
    tol = 1e-6
    scaled = conformal_map(ecc_region.scaled(3), MapOptions(tol=tol)).modulus
    e1, e2, e3 = abs(concentric - 0.5), abs(ecc - oracle), abs(scaled - ecc)
    ok = e1 <= 1e-8 and e2 <= 1e-6 and e3 <= 10 * tol
    record(7, "annulus moduli", ok,
           f"concentric {e1:.1e} (<= 1e-8), eccentric vs oracle {e2:.1e} (<= 1e-6), "
           f"scale x3 change {e3:.1e} (<= 1e-5)")


def test_08_disjoint_pair(disjoint_map, disjoint_region):
    rep = verify_map(disjoint_map, disjoint_region)
    err = abs(disjoint_map.modulus - disjoint_disks_modulus(2, 1))
    ok = disjoint_map.converged and rep.inverse_poles_inside == 1 and err <= 1e-6
    record(8, "disjoint pair of disks", ok,
           f"converged={disjoint_map.converged}, inverse poles in annulus "
           f"{rep.inverse_poles_inside}, modulus error {err:.1e}")


def test_09_root_exponential_rate():
    m = solve_dirichlet(polygon(PENTAGON), tol=1e-6)
    h = np.array(m.history)
    x, y = np.sqrt(h[:, 1]), np.log(h[:, 2])
    r = float(np.corrcoef(x, y)[0, 1])
    ok = bool(np.all(np.diff(y) < 0)) and abs(r) >= 0.9
    record(9, "pentagon error vs sqrt(DOF)", ok,
           f"{len(h)} steps, decreasing={bool(np.all(np.diff(y) < 0))}, |r| = {abs(r):.3f}")


def test_10_corner_basis():
    region = polygon(LSHAPE)
    cb = corner_basis_model(region, tol=1e-8)
    h = np.array(cb.history)
    # geometric decay: log error is (at least) linear in the per-corner count
    slope, _ = np.polyfit(h[:, 0], np.log(h[:, 2]), 1)
    r = abs(np.corrcoef(h[:, 0], np.log(h[:, 2]))[0, 1])
    lt = np.array(solve_dirichlet(region, tol=1e-12, max_dof=cb.dof + 400).history)
    at_dof = np.interp(cb.dof, lt[:, 1], np.log(lt[:, 2]))
    light = float(np.exp(at_dof))
    ok = cb.error <= 1e-8 and cb.n_terms <= 120 and slope < 0 and r >= 0.9 and light > cb.error
    record(10, "corner-basis path on the L-shape", ok,
           f"error {cb.error:.1e} with {cb.n_terms} terms, log-linear fit r={r:.3f}, "
           f"lightning error at {cb.dof} DOF {light:.1e}")


def test_11_aaa_suite():
    z = circle(128)
    f = 1 / (z - 2)
    r = aaa_fit(z, f, tol=1e-12)
    exact = bool(np.array_equal(r(r.support), r.values))
    pd = poles_residues_zeros(r)
    recovered = pd.poles.size == 1 and abs(pd.poles[0] - 2) < 1e-8 and abs(pd.residues[0] - 1) < 1e-8

    rng = np.random.default_rng(2)
    noisy = f + 1e-14 * (rng.normal(size=128) + 1j * rng.normal(size=128))
    doublet = BarycentricRational(np.r_[r.support, 0.5j], np.r_[r.values, 1 / (0.5j - 2)],
                                  np.r_[r.weights, 1e-14])
    cleaned = poles_residues_zeros(cleanup(doublet, z, noisy, 1e-8)).poles
    removed = cleaned.size == 1 and abs(cleaned[0] - 2) < 1e-8

    zs = circle(256)
    monotone = all(
        bool(np.all(np.diff(aaa_fit(zs, fn(zs), tol=1e-13, clean=False).errors) <= 0))
        for fn in (lambda w: 1 / (w - 2), np.tan, lambda w: np.log(2.2 - w))
    )
    ok = exact and recovered and removed and monotone
    record(11, "AAA unit suite", ok,
           f"support exactness {exact}, 1/(z-2) recovery {recovered}, doublet removed {removed}, "
           f"monotone residual on analytic data {monotone}")


def test_12_throughput(lshape_map, tmp_path):
    path = tmp_path / "lshape.json"
    lshape_map.save(path)
    m = ConformalMap.load(path)
    rng = np.random.default_rng(5)
    w = np.sqrt(rng.uniform(0, 0.99, 10_000)) * np.exp(2j * np.pi * rng.uniform(size=10_000))
    m.inv(w[:10])
    t0 = time.perf_counter()
    z = m.inv(w)
    elapsed = time.perf_counter() - t0
    ok = elapsed <= 0.5 and bool(np.all(np.isfinite(z)))
    record(12, "inverse evaluation throughput", ok,
           f"10000 points in {elapsed * 1e3:.1f} ms (<= 500 ms)")
