import numpy as np
import pytest
from conftest import PENTAGON, SQUARE, circle_spec, lobe
from oracles import (
    disjoint_disks_modulus,
    eccentric_annulus_modulus,
    joukowski,
    joukowski_inverse,
    regular_polygon_from_disk,
)

from confmap import (
    ConformalMap,
    GeometryError,
    MapOptions,
    annulus,
    circular_polygon,
    conformal_map,
    map_annulus,
    map_disk,
    polygon,
    smooth,
    verify_map,
)
from confmap.aaa import aaa_fit
from confmap.conformal import sample_interior
from confmap.geometry import smooth_spec


def disk_points(rmax, n=400, seed=0):
    rng = np.random.default_rng(seed)
    return rmax * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(size=n))


@pytest.fixture(scope="module")
def unit_disk():
    return smooth(lambda t: np.exp(2j * np.pi * t), 64)


def test_unit_disk_identity(unit_disk):
    m = conformal_map(unit_disk)
    z = np.r_[disk_points(1.0), np.exp(2j * np.pi * np.arange(100) / 100)]
    assert m.converged
    assert np.max(np.abs(m(z) - z)) <= 1e-10
    assert np.max(np.abs(m.inv(z) - z)) <= 1e-10


@pytest.mark.parametrize("n", [4, 5])
def test_regular_polygon_against_schwarz_christoffel(n):
    verts = np.exp(2j * np.pi * np.arange(n) / n)
    m = conformal_map(polygon(verts))
    w = disk_points(0.9, seed=n)
    z = regular_polygon_from_disk(w, n)
    assert np.max(np.abs(m.inv(w) - z)) <= 1e-5
    assert np.max(np.abs(m(z) - w)) <= 1e-5


def test_pentagon_poles_near_vertex(pentagon_map):
    d = np.sort(np.abs(pentagon_map.forward_poles() - 1))[:4]
    reference = np.array([0.0097, 0.044, 0.14, 0.49])
    assert np.all((d > reference / 10) & (d < reference * 10))


def test_lobe_map(lobe_map, lobe_region):
    assert lobe_map.converged
    assert lobe_map.boundary_error <= 1e-4
    assert max(lobe_map.degrees) <= 60
    dp = np.min(lobe_region.distance_to_boundary(lobe_map.forward_poles()))
    assert 0.02 <= dp <= 0.5
    di = np.min(np.abs(np.abs(lobe_map.inverse_poles()) - 1))
    assert 0.01 <= di <= 0.3


def test_deep_lobe_polynomial_flags_crowding():
    m = conformal_map(smooth(lobe(0.5)), MapOptions(method="polynomial"))
    assert not m.converged
    assert "crowding" in m.diagnostics["failure"]


def test_interior_to_exterior(pentagon_region):
    r = polygon(PENTAGON, target="int-ext")
    m = conformal_map(r)
    assert m.converged
    rep = verify_map(m, r)
    assert rep.ok, rep.lines()
    assert np.min(np.abs(m.forward_poles())) < 1e-6


@pytest.fixture(scope="module")
def ellipse_spec():
    return smooth_spec(lambda t: joukowski(np.exp(2j * np.pi * t), 1.0, 0.3), 256)


def test_ellipse_exterior_against_joukowski(ellipse_spec):
    from confmap import parse_region

    r = parse_region(ellipse_spec, "ext-ext")
    m = conformal_map(r)
    assert m.converged
    w = 1 / np.conj(disk_points(0.8, seed=3))
    w = w[np.abs(w) < 5]
    z = joukowski(w, 1.0, 0.3)
    assert np.max(np.abs(m(z) - w)) <= 1e-5
    assert np.max(np.abs(m.inv(w) - z)) <= 1e-5
    np.testing.assert_allclose(m(z), joukowski_inverse(z, 1.0, 0.3), atol=1e-5)


def test_ellipse_exterior_to_disk(ellipse_spec):
    from confmap import parse_region

    r = parse_region(ellipse_spec, "ext-disk")
    m = conformal_map(r)
    assert m.converged
    z = joukowski(1 / np.conj(disk_points(0.8, seed=4)), 1.0, 0.3)
    np.testing.assert_allclose(m(z), 1 / joukowski_inverse(z, 1.0, 0.3), atol=1e-5)
    rep = verify_map(m, r)
    assert rep.ok, rep.lines()
    assert rep.inverse_poles_inside == 1


def test_interior_and_exterior_agree_on_boundary(pentagon_map, pentagon_region):
    ext = conformal_map(polygon(PENTAGON, target="ext-ext"))
    z = np.concatenate(pentagon_region.polylines)
    z = z[np.min(np.abs(z[:, None] - PENTAGON[None, :]), axis=1) > 1e-3]
    assert np.max(np.abs(np.abs(pentagon_map(z)) - 1)) <= 1e-5
    assert np.max(np.abs(np.abs(ext(z)) - 1)) <= 1e-5


def test_concentric_annulus():
    m = conformal_map(annulus(circle_spec(0, 1), circle_spec(0, 0.5)))
    assert abs(m.modulus - 0.5) <= 1e-8
    z = 0.75 * np.exp(1j * np.linspace(0, 6, 50))
    ratio = m(z) / z
    assert np.max(np.abs(np.abs(ratio) - 1)) <= 1e-8
    assert np.ptp(np.angle(ratio)) <= 1e-8


def test_eccentric_annulus(eccentric_region):
    m = conformal_map(eccentric_region)
    assert m.converged
    assert abs(m.modulus - eccentric_annulus_modulus(0.3, 0.3)) <= 1e-6


def test_disjoint_pair(disjoint_map, disjoint_region):
    assert disjoint_map.converged
    assert abs(disjoint_map.modulus - disjoint_disks_modulus(2, 1)) <= 1e-6
    rep = verify_map(disjoint_map, disjoint_region)
    assert rep.ok, rep.lines()
    assert rep.inverse_poles_inside == 1
    # that pole is the image of infinity
    p = disjoint_map.inverse_poles()
    inside = p[(np.abs(p) > disjoint_map.modulus) & (np.abs(p) < 1)]
    big = 1e8
    assert abs(disjoint_map(np.array([big]))[0] - inside[0]) < 1e-5


def test_annulus_scale_invariance():
    sq = lambda s: {"type": "polygon", "vertices": [[s, s], [-s, s], [-s, -s], [s, -s]]}
    r = annulus(sq(1.5), sq(0.5))
    a = conformal_map(r).modulus
    b = conformal_map(r.scaled(3)).modulus
    assert abs(a - b) <= 1e-5


def test_rotation_equivariance(pentagon_map):
    theta = 0.4
    rot = np.exp(1j * theta)
    m2 = conformal_map(polygon(PENTAGON * rot))
    z = sample_interior(polygon(PENTAGON), 300) * rot
    expected = rot * pentagon_map(z / rot)
    assert np.max(np.abs(m2(z) - expected)) <= 1e-5


def test_verify_identity(unit_disk):
    rep = verify_map(conformal_map(unit_disk), unit_disk)
    assert rep.boundary_error <= 1e-10 and rep.roundtrip_error <= 1e-10
    assert rep.f0 <= 1e-10 and rep.arg_fprime0 <= 1e-10
    assert rep.ok


def test_verify_pentagon(pentagon_map, pentagon_region):
    rep = verify_map(pentagon_map, pentagon_region)
    assert rep.boundary_error <= 1e-5
    assert rep.roundtrip_error <= 1e-4
    assert rep.n_test == 1000
    assert rep.ok, rep.lines()


def test_verify_flags_truncated_inverse(pentagon_map, pentagon_region):
    z = np.concatenate(pentagon_region.polylines)
    w = pentagon_map(z)
    crude = aaa_fit(w, z, tol=1e-15, mmax=3)
    bad = ConformalMap(pentagon_map.forward, crude, "disk", None,
                       pentagon_map.boundary_error, True, pentagon_map.tol, "lightning")
    rep = verify_map(bad, pentagon_region)
    assert rep.roundtrip_error > 100 * pentagon_map.tol
    assert "roundtrip" in rep.flags


def test_normalization(pentagon_map):
    assert abs(pentagon_map(np.array([0j]))[0]) <= 1e-10
    h = 1e-4 * 2
    d = (pentagon_map(np.array([h + 0j]))[0] - pentagon_map(np.array([-h + 0j]))[0]) / (2 * h)
    assert abs(np.angle(d)) <= 1e-6


def test_artifact_roundtrip(pentagon_map, tmp_path):
    p = tmp_path / "m.json"
    pentagon_map.save(p)
    m = ConformalMap.load(p)
    z = disk_points(0.5)
    np.testing.assert_array_equal(m(z), pentagon_map(z))
    np.testing.assert_array_equal(m.inv(z), pentagon_map.inv(z))
    assert m.dumps() == pentagon_map.dumps()
    assert m.region_spec == pentagon_map.region_spec


def test_circular_polygon_forward(circular_region):
    m = conformal_map(circular_region)
    # the inverse needs very high degree near the 0.27 pi corners at default mmax
    assert m.boundary_error <= 1e-5
    assert m.diagnostics["dirichlet_converged"]


def test_map_disk_rejects_annulus(eccentric_region):
    with pytest.raises(GeometryError):
        map_disk(eccentric_region)


def test_map_annulus_rejects_simply(pentagon_region):
    with pytest.raises(GeometryError):
        map_annulus(pentagon_region)


def test_options_validation():
    with pytest.raises(ValueError):
        MapOptions(tol=0.5)
    with pytest.raises(ValueError):
        MapOptions(method="spline")


def test_retarget(pentagon_region):
    m = conformal_map(pentagon_region, MapOptions(target="int-ext"))
    assert m.target == "int-ext"


def test_square_map_matches_circular_polygon_of_infinite_radius():
    a = conformal_map(polygon(SQUARE))
    b = conformal_map(circular_polygon([(v, None) for v in SQUARE]))
    z = disk_points(0.9) * 0.7
    assert np.max(np.abs(a(z) - b(z))) <= 1e-5
