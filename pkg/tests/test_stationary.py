import math

import numpy as np
import pytest

from conftest import horizontal_velocity
from solgeo.curves import eval_curve, is_geodesic
from solgeo.errors import BadParams, BranchUnsupported, NotHorizontal
from solgeo.expressions import catalog, parse
from solgeo.frame import CoordVector, Point, SQRT2
from solgeo.stationary import (
    HorizontalCurve,
    orthogonality_check,
    jacobi_vertical,
    plane_ab_singular_line_z,
    singular_point_surface,
    sweep_surface,
    uniqueness_scan,
    family_surfaces,
)
from solgeo.surface import point_data, raw_fields


def generic_gamma(theta=0.7, p0=Point(0.2, -0.1, 0.3)) -> HorizontalCurve:
    return HorizontalCurve.from_initial_data(p0, horizontal_velocity(p0, theta))


def test_horizontal_curve_kinds():
    assert HorizontalCurve.x_line(Point(0, 0, 0)).kind == "x-integral"
    assert HorizontalCurve.y_line(Point(1, 2, 0.5)).kind == "y-integral"
    assert generic_gamma().kind == "generic"


def test_horizontal_curve_requires_horizontality():
    with pytest.raises(NotHorizontal):
        HorizontalCurve.from_initial_data(Point(0, 0, 0), CoordVector(1, 1, 0))


def test_sweep_t_lines_are_characteristic_curves(rng):
    s = sweep_surface(generic_gamma(), (-1.5, 1.5), (-3, 3), grid=(24, 24))
    for eps in rng.uniform(-1.5, 1.5, 8):
        curve = s.ruling(float(eps))
        ts = np.linspace(-3, 3, 31)
        ref, _ = eval_curve(curve, ts)
        got = np.stack(s.point(float(eps), ts), axis=-1)
        assert np.max(np.abs(got - ref)) < 1e-10


def test_x_line_sweep_lies_on_saddle_curve_surface():
    # the vertical-axis sweep lands on the zero set of e^z y + e^-z x
    # (and not on e^z y + x, whose singular set is a point, not a curve)
    s = sweep_surface(HorizontalCurve.x_line(Point(0, 0, 0)), (-2, 2), (-3, 3), grid=(40, 40))
    _, _, X, Y, Z = s.mesh()
    on_curve_family = catalog("saddle-curve").values(X, Y, Z)
    assert np.max(np.abs(on_curve_family)) < 1e-12
    off_point_family = catalog("saddle-point").values(X, Y, Z)
    assert np.max(np.abs(off_point_family)) > 0.1


def test_y_line_sweep_is_vertical_plane_patch():
    s = sweep_surface(HorizontalCurve.y_line(Point(0, 0, 0)), (-2, 2), (-3, 3), grid=(24, 24))
    E, T, X, Y, Z = s.mesh()
    # x, y constant along t; z affine in t
    assert np.max(np.abs(X - X[:, :1])) < 1e-14
    assert np.max(np.abs(Y - Y[:, :1])) < 1e-14
    dz = np.diff(Z, axis=1)
    assert np.max(np.abs(dz - dz[:, :1])) < 1e-12


def test_generic_sweep_is_minimal_intrinsically(rng):
    s = sweep_surface(generic_gamma(0.9), (-1, 1), (-2.5, 2.5), grid=(16, 16))
    for _ in range(6):
        eps = float(rng.uniform(-1, 1))
        t = float(rng.uniform(0.3, 2.2) * rng.choice([-1, 1]))
        assert abs(float(s.intrinsic_mean_curvature(eps, t))) < 1e-7


def test_orthogonality_positive_and_negative():
    s = sweep_surface(generic_gamma(), (-1.5, 1.5), (-3, 3))
    assert orthogonality_check(s) < 1e-10
    skewed = sweep_surface(generic_gamma(), (-1.5, 1.5), (-3, 3), skew=1.0)
    assert orthogonality_check(skewed) > 0.5


def test_orthogonality_plane_family_rulings():
    # singular line of the plane x + y = 0 runs along Y; rulings along X
    zline = plane_ab_singular_line_z(1.0, 1.0)
    assert zline == pytest.approx(0.0)
    s = sweep_surface(HorizontalCurve.y_line(Point(0, 0, zline)), (-2, 2), (-2, 2))
    assert orthogonality_check(s) < 1e-10


def test_jacobi_vertical_zero_on_base():
    s = sweep_surface(generic_gamma(), (-1.5, 1.5), (-3, 3))
    for eps in np.linspace(-1.4, 1.4, 7):
        assert s.vertical_component_closed(float(eps), 0.0) == 0.0


def test_jacobi_vertical_closed_vs_fd(rng):
    s = sweep_surface(generic_gamma(1.1, Point(-0.2, 0.4, -0.3)), (-1.2, 1.2), (-3, 3))
    for _ in range(50):
        eps = float(rng.uniform(-1.2, 1.2))
        t = float(rng.uniform(-3, 3))
        closed = s.vertical_component_closed(eps, t)
        fd = s.vertical_component_fd(eps, t)
        assert abs(closed - fd) <= 1e-5 * (1.0 + abs(fd))
        assert jacobi_vertical(s, eps, t) == pytest.approx(closed)


def test_jacobi_vertical_nonzero_off_base(rng):
    s = sweep_surface(generic_gamma(0.6), (-1, 1), (-3, 3))
    for _ in range(20):
        eps = float(rng.uniform(-1, 1))
        t = float(rng.uniform(0.05, 3.0))
        assert abs(s.vertical_component_closed(eps, t)) > 1e-4


def test_jacobi_vertical_degenerate_branches_fall_back():
    sx = sweep_surface(HorizontalCurve.x_line(Point(0, 0, 0)), (-1, 1), (-2, 2))
    with pytest.raises(BranchUnsupported):
        sx.vertical_component_closed(0.2, 0.5)
    # fallback value matches the hand-derived degenerate form -zdot^2 t
    assert jacobi_vertical(sx, 0.2, 0.5) == pytest.approx(-0.5, rel=1e-4)
    sy = sweep_surface(HorizontalCurve.y_line(Point(0, 0, 0)), (-1, 1), (-2, 2))
    # hand-derived: -(k/sqrt2) sinh(k t / sqrt2) with k = 2 xdot e^{-z}
    k = -2.0 / SQRT2
    want = -(k / SQRT2) * math.sinh(k * 0.5 / SQRT2)
    assert jacobi_vertical(sy, 0.0, 0.5) == pytest.approx(want, rel=1e-4)


def test_uniqueness_scan_single_locus():
    for gamma in (generic_gamma(), HorizontalCurve.x_line(Point(0, 0, 0)),
                  HorizontalCurve.y_line(Point(0.3, 0.1, -0.2))):
        s = sweep_surface(gamma, (-1, 1), (-2.5, 2.5), grid=(21, 41))
        loci = uniqueness_scan(s)
        assert len(loci) == 1
        assert abs(loci[0]["t_center"]) < 1e-9


def test_uniqueness_scan_negative_control():
    class TwoBandFixture:
        eps_range = (-1.0, 1.0)
        t_range = (-3.0, 3.0)

        def eps_grid(self):
            return np.linspace(*self.eps_range, 15)

        def t_grid(self):
            return np.linspace(*self.t_range, 61)

        def vertical_component(self, eps, t):
            return (t - 0.8) * (t + 1.2) * (1.0 + 0.1 * eps)

    loci = uniqueness_scan(TwoBandFixture())
    assert len(loci) == 2
    centers = sorted(l["t_center"] for l in loci)
    assert centers[0] == pytest.approx(-1.2, abs=1e-6)
    assert centers[1] == pytest.approx(0.8, abs=1e-6)


def test_singular_point_surface_posts(rng):
    for p0 in (Point(0, 0, 0), Point(1, 0, 0), Point(-0.4, 0.8, 1.2)):
        f = singular_point_surface(p0)
        # the base point is on the surface and is its singular point
        d = point_data(f, p0)
        assert d.singular
        # residual vanishes identically on and off the surface
        x, y, z = rng.uniform(-2, 2, (3, 200))
        fields = raw_fields(f, x, y, z)
        assert np.max(np.abs(fields["residual_coord"])) < 1e-10
        # no other singular point: |N_h| > 0 on shrinking rings around p0
        for radius in (1.0, 0.1, 0.01):
            ang = np.linspace(0, 2 * math.pi, 40)
            yy = p0.y + radius * np.cos(ang)
            zz = p0.z + radius * np.sin(ang)
            xx = p0.x - np.exp(zz - (-p0.z)) * (yy - p0.y)  # stay on the surface
            ring = raw_fields(f, xx, yy, zz)
            assert np.min(ring["nh"]) > 1e-9


def test_singular_point_surface_origin_formula():
    f = singular_point_surface(Point(0, 0, 0))
    g = parse("exp(z)*y + x")
    xs = np.linspace(-2, 2, 9)
    vals_f = f.values(xs, xs * 0.5, xs * 0.2)
    vals_g = g.values(xs, xs * 0.5, xs * 0.2)
    assert np.allclose(vals_f, vals_g, atol=1e-14)


def test_family_surfaces():
    f = family_surfaces("plane_ab", a=1.0, b=1.0, c=0.0)
    # singular line sits in z = log sqrt(b/a) = 0
    d = point_data(f, Point(0.5, -0.5, 0.0))
    assert d.singular
    d = point_data(f, Point(0.5, -0.5, 1.0))
    assert not d.singular

    g = family_surfaces("saddle_curve")
    assert g.source == catalog("saddle-curve").source

    # a = 1, b = 0: no singular point anywhere on the plane
    h = family_surfaces("plane_ab", a=1.0, b=0.0, c=0.5)
    for z in np.linspace(-3, 3, 11):
        assert not point_data(h, Point(-0.5, 1.0, float(z))).singular

    with pytest.raises(BadParams):
        family_surfaces("nope")
    with pytest.raises(BadParams):
        plane_ab_singular_line_z(1.0, -1.0)


def test_saddle_curve_translations_are_minimal(rng):
    # zero set is the same for every z0; residual vanishes for all parameters
    for _ in range(5):
        x0, y0, z0 = rng.uniform(-1.5, 1.5, 3)
        f = catalog("saddle-curve", x0=float(x0), y0=float(y0), z0=float(z0))
        y, z = rng.uniform(-2, 2, (2, 100))
        x = x0 - np.exp(2 * z) * (y - y0)
        vals = f.values(x, y, z)
        assert np.max(np.abs(vals)) < 1e-10
        fields = raw_fields(f, x, y, z)
        assert np.max(np.abs(fields["residual_coord"])) < 1e-10
        # singular set is the vertical line through (x0, y0)
        d = point_data(f, Point(float(x0), float(y0), 2.0))
        assert d.singular


def test_nongeodesic_family_witness(rng):
    # rulings of a generic sweep are characteristic but not geodesics,
    # and neither is the base curve
    for _ in range(5):
        theta = float(rng.uniform(0.3, 1.2))
        p0 = Point(*rng.uniform(-1, 1, 3))
        gamma = HorizontalCurve.from_initial_data(p0, horizontal_velocity(p0, theta))
        assert gamma.kind == "generic"
        assert not is_geodesic(gamma.curve)
        s = sweep_surface(gamma, (-1, 1), (-2, 2))
        for eps in np.linspace(-1, 1, 5):
            assert not is_geodesic(s.ruling(float(eps)))


def test_sweep_rejects_bad_ranges():
    with pytest.raises(BadParams):
        sweep_surface(generic_gamma(), (1, -1), (-2, 2))
