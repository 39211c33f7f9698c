"""Boundary construction against closed forms and quadrature oracles."""

import numpy as np
import pytest
from scipy import integrate, special

from loopspec import (
    EllipseProfile,
    FourierProfile,
    NonConvex,
    NonConvexWarning,
    NonStarShaped,
    build_boundary,
    cosine_profile,
)

TWO_PI = 2.0 * np.pi


def test_disk_is_the_unit_circle(disk):
    assert disk.perimeter == pytest.approx(TWO_PI, abs=1e-13)
    assert disk.kappa_min == pytest.approx(1.0, abs=1e-12)
    assert disk.kappa_max == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(disk.kappa - 1.0)) < 1e-12
    assert np.max(np.abs(np.hypot(disk.points[:, 0], disk.points[:, 1]) - 1.0)) < 1e-12
    assert disk.is_convex


def test_ellipse_perimeter_closed_form(ellipse01):
    # 4 a E(e^2) for semi-axes a = 1 >= b
    exact = 4.0 * special.ellipe(0.1 ** 2)
    assert ellipse01.perimeter == pytest.approx(exact, abs=1e-12)


def test_ellipse_perimeter_quadrature():
    ecc = 0.05
    b = np.sqrt(1.0 - ecc ** 2)

    def speed(theta):
        g = 1.0 - ecc ** 2 * np.cos(theta) ** 2
        r = b * g ** -0.5
        r1 = -0.5 * b * g ** -1.5 * ecc ** 2 * np.sin(2.0 * theta)
        return np.hypot(r, r1)

    val, err = integrate.quad(speed, 0.0, TWO_PI, limit=200)
    assert err < 1e-8
    curve = build_boundary(EllipseProfile(ecc))
    assert curve.perimeter == pytest.approx(val, abs=1e-8)


def test_ellipse_curvature_extremes(ellipse01):
    e2 = 0.1 ** 2
    assert ellipse01.kappa_max == pytest.approx(1.0 / (1.0 - e2), rel=1e-10)
    assert ellipse01.kappa_min == pytest.approx(np.sqrt(1.0 - e2), rel=1e-10)


def test_radius_derivatives_match_finite_differences():
    profile = FourierProfile(cos=[0.0, 0.0, 0.01], sin=[0.0, 0.008])
    tau = 0.7
    theta = np.linspace(0.1, TWO_PI, 17, endpoint=False)
    h = 1e-5
    vals = profile.radius_derivs(theta, tau)
    for order in range(3):
        up = profile.radius_derivs(theta + h, tau)[order]
        down = profile.radius_derivs(theta - h, tau)[order]
        fd = (up - down) / (2.0 * h)
        assert np.max(np.abs(fd - vals[order + 1])) < 1e-8


def test_profile_call_orders_consistent():
    profile = FourierProfile(cos=[0.0, 0.0, 0.01], sin=[0.0, 0.008])
    theta = np.linspace(0.0, TWO_PI, 11, endpoint=False)
    r, r1, r2, r3 = profile.radius_derivs(theta, 0.25)
    assert np.allclose(r, 1.0 + 0.25 * profile(theta), atol=1e-15)
    for order, table in ((1, r1), (2, r2), (3, r3)):
        assert np.allclose(table, 0.25 * profile(theta, order=order), atol=1e-14)


def test_c_norm_single_mode():
    profile = cosine_profile(4, 0.02)
    # sup |f^(j)| = 0.02 * 4^j, and the norm takes the max over j <= n
    assert profile.c_norm(0) == pytest.approx(0.02, rel=1e-6)
    assert profile.c_norm(3) == pytest.approx(0.02 * 64, rel=1e-6)


def test_deformed_curvature_against_polar_formula(cos3_curve):
    theta = np.linspace(0.0, TWO_PI, 13, endpoint=False)
    h = 1e-5
    f = lambda t: 1.0 + 0.01 * np.cos(3.0 * t)
    r = f(theta)
    r1 = (f(theta + h) - f(theta - h)) / (2.0 * h)
    r2 = (f(theta + h) - 2.0 * r + f(theta - h)) / h ** 2
    kappa = (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5
    frame = cos3_curve.frame(theta)
    assert np.max(np.abs(frame.kappa - kappa)) < 1e-5


def test_parameter_round_trips(ellipse01):
    s = np.linspace(0.0, ellipse01.perimeter, 40, endpoint=False)
    theta = ellipse01.theta_of_s(s)
    assert np.max(np.abs(ellipse01.arclength_of_theta(theta) - s)) < 1e-10
    # lifted: one full turn adds the perimeter / 2 pi / 1
    assert ellipse01.arclength_of_theta(np.array([TWO_PI]))[0] == pytest.approx(
        ellipse01.perimeter, abs=1e-12
    )
    shifted = ellipse01.theta_of_s(s + 3.0 * ellipse01.perimeter)
    assert np.max(np.abs(shifted - theta - 3.0 * TWO_PI)) < 1e-10


def test_adapted_coordinate_round_trip(ellipse01):
    s = np.linspace(0.0, ellipse01.perimeter, 33, endpoint=False)
    xi = ellipse01.lazutkin(s)
    assert xi[0] == pytest.approx(0.0, abs=1e-14)
    assert np.all(np.diff(xi) > 0.0)
    assert ellipse01.lazutkin(np.array([ellipse01.perimeter]))[0] == pytest.approx(1.0, abs=1e-12)
    back = ellipse01.lazutkin_inverse(xi)
    assert np.max(np.abs(back - s)) < 1e-9
    lifted = ellipse01.lazutkin_inverse(xi + 2.0)
    assert np.max(np.abs(lifted - s - 2.0 * ellipse01.perimeter)) < 1e-9


def test_curvature_integral_lifts(disk, cos3_curve):
    # total turning is 2 pi for any convex curve
    for curve in (disk, cos3_curve):
        total = curve.curvature_integral(np.array([curve.perimeter]))[0]
        assert total == pytest.approx(TWO_PI, abs=1e-10)


def test_evaluate_scalar_and_array(ellipse01):
    pt = ellipse01.evaluate(0.0)
    assert pt.point.shape == (2,)
    # s = 0 is theta = 0: the semi-major vertex (1, 0)
    assert pt.point == pytest.approx([1.0, 0.0], abs=1e-12)
    assert pt.tangent == pytest.approx([0.0, 1.0], abs=1e-12)
    assert pt.normal == pytest.approx([1.0, 0.0], abs=1e-12)
    assert pt.kappa == pytest.approx(1.0 / (1.0 - 0.01), rel=1e-10)
    arr = ellipse01.evaluate(np.array([0.0, 1.0]))
    assert arr.point.shape == (2, 2)
    assert arr.point[0] == pytest.approx(pt.point, abs=1e-14)
    # unit frames, outward normal
    norms = np.hypot(arr.tangent[:, 0], arr.tangent[:, 1])
    assert np.max(np.abs(norms - 1.0)) < 1e-12
    assert np.all(np.sum(arr.normal * arr.point, axis=1) > 0.0)


def test_disk_curvature_functionals(disk):
    fns = disk.curvature_functionals()
    for value in (fns.kappa_sq, fns.kappa_prime_sq + TWO_PI, fns.kappa_four,
                  fns.kappa_two_thirds):
        assert value == pytest.approx(TWO_PI, abs=1e-10)
    assert fns.custom is None


def test_ellipse_curvature_functionals_quadrature():
    ecc = 0.1
    curve = build_boundary(EllipseProfile(ecc))
    b = np.sqrt(1.0 - ecc ** 2)

    def moment(power):
        # parametric ellipse (cos t, b sin t): kappa = b w^(-3/2) and
        # ds = sqrt(w) dt with w = sin^2 t + b^2 cos^2 t
        def integrand(t):
            w = np.sin(t) ** 2 + b ** 2 * np.cos(t) ** 2
            return b ** power * w ** (0.5 * (1.0 - 3.0 * power))

        return integrate.quad(integrand, 0.0, TWO_PI, limit=200)[0]

    fns = curve.curvature_functionals()
    assert fns.kappa_sq == pytest.approx(moment(2), rel=1e-7)
    assert fns.kappa_four == pytest.approx(moment(4), rel=1e-7)
    assert fns.kappa_two_thirds == pytest.approx(moment(2.0 / 3.0), rel=1e-7)
    assert curve.kappa_two_thirds_total == pytest.approx(fns.kappa_two_thirds, rel=1e-12)


def test_custom_multi_index_matches_named(cos3_curve):
    fns = cos3_curve.curvature_functionals(multi_index=(2,))
    assert fns.custom == pytest.approx(fns.kappa_sq, rel=1e-12)
    fns = cos3_curve.curvature_functionals(multi_index=(0, 2))
    assert fns.custom == pytest.approx(fns.kappa_prime_sq, rel=1e-12)


def test_circularity_report(disk, cos3_curve):
    flat = disk.circularity()
    assert flat.convex
    assert set(flat.entries) == {0, 1, 2, 3, 4}
    assert max(flat.entries.values()) < 1e-10
    bumpy = cos3_curve.circularity(max_order=2)
    assert set(bumpy.entries) == {0, 1, 2}
    # kappa - 1 is order tau*a, each theta derivative brings a factor k = 3
    assert 0.01 < bumpy.entries[0] < 0.2
    assert bumpy.entries[1] > bumpy.entries[0]
    assert bumpy.entries[2] > bumpy.entries[1]


def test_rejects_non_star_shaped():
    with pytest.raises(NonStarShaped):
        build_boundary(cosine_profile(1, 2.0), tau=1.0)


def test_non_convex_warns_and_blocks_adapted_coordinate():
    with pytest.warns(NonConvexWarning):
        curve = build_boundary(cosine_profile(3, 0.3), tau=1.0)
    assert not curve.is_convex
    assert curve.kappa_min < 0.0
    with pytest.raises(NonConvex):
        curve.lazutkin(np.array([0.1]))
    assert np.isnan(curve.kappa_two_thirds_total)
    assert np.isnan(curve.curvature_functionals().kappa_two_thirds)


def test_constructor_validation():
    with pytest.raises(ValueError):
        build_boundary(EllipseProfile(0.1), grid_size=300)
    with pytest.raises(ValueError):
        build_boundary(EllipseProfile(0.1), grid_size=128)
    with pytest.raises(ValueError):
        build_boundary(cosine_profile(2, 0.01), tau=1.5)
    with pytest.raises(ValueError):
        build_boundary(cosine_profile(2, 0.01), tau=-0.2)
    with pytest.raises(ValueError):
        EllipseProfile(1.0)
    with pytest.raises(ValueError):
        FourierProfile(cos=[[0.1]])
    with pytest.raises(ValueError):
        FourierProfile(cos=[np.nan])
    with pytest.raises(ValueError):
        cosine_profile(-1)
