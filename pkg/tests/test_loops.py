"""Loop functions, their critical points, and periodic orbits by action."""

import numpy as np
import pytest

from loopspec import (
    BracketFailure,
    PhasePoint,
    WindowViolation,
    birkhoff_orbit,
    build_boundary,
    cosine_profile,
    critical_points,
    iterate,
    loop_profile,
    passage_angle,
)


def test_disk_loop_function_is_constant(disk):
    for q in (3, 7):
        prof = loop_profile(disk, q, nodes=64)
        exact = 2.0 * q * np.sin(np.pi / q)
        assert np.max(np.abs(prof.length - exact)) < 1e-9
        assert np.max(np.abs(prof.launch_angle - np.pi / q)) < 1e-10
        assert np.max(np.abs(prof.return_angle - np.pi / q)) < 1e-10
        assert np.max(np.abs(prof.derivative)) < 1e-11
        assert prof.residual < 1e-8


def test_loop_profile_closes_up(cos3_curve):
    prof = loop_profile(cos3_curve, 3, nodes=64)
    assert prof.residual < 1e-8 * cos3_curve.perimeter
    # independent closure check: run the map from a profile node
    k = 17
    orbit = iterate(cos3_curve, PhasePoint(prof.s[k], prof.launch_angle[k]), 3)
    assert orbit.winding == 1
    assert orbit.points[-1].x == pytest.approx(prof.s[k] + cos3_curve.perimeter, abs=1e-8)
    assert orbit.total_length == pytest.approx(prof.length[k], abs=1e-9)
    assert orbit.points[-1].phi == pytest.approx(prof.return_angle[k], abs=1e-8)


def test_loop_derivative_matches_finite_differences(cos3_curve):
    # the identity L_q' = cos(return) - cos(launch) against centered
    # differences of the length itself, on the profile's own grid so the
    # stencil needs no extra solves; halving the step shows second order
    for q in (3, 4):
        prof = loop_profile(cos3_curve, q)
        n = prof.s.size
        h = cos3_curve.perimeter / n
        errs = []
        for k in (2, 1):
            fd = (np.roll(prof.length, -k) - np.roll(prof.length, k)) / (2.0 * k * h)
            errs.append(np.max(np.abs(fd - prof.derivative)))
        order = np.log2(errs[0] / errs[1])
        assert order > 1.9


def test_passage_angle_diagonal_is_loop_angle(cos3_curve):
    prof = loop_profile(cos3_curve, 3, nodes=64)
    k = 5
    alpha = passage_angle(cos3_curve, 3, prof.s[k], prof.s[k])
    assert alpha == pytest.approx(prof.launch_angle[k], abs=1e-10)


def test_passage_angle_off_diagonal_closes(cos3_curve):
    ell = cos3_curve.perimeter
    s, sp = 0.4, 0.4 + ell / 300.0
    alpha = passage_angle(cos3_curve, 4, s, sp)
    orbit = iterate(cos3_curve, PhasePoint(s, alpha), 4)
    assert orbit.points[-1].x == pytest.approx(sp + ell, abs=1e-8)


def test_passage_angle_window(ellipse01):
    ell = ellipse01.perimeter
    with pytest.raises(WindowViolation):
        passage_angle(ellipse01, 3, 0.0, ell / 50.0)
    # wrap-around distances count as short
    alpha = passage_angle(ellipse01, 3, 0.0, ell - ell / 400.0)
    assert 0.0 < alpha < np.pi


def test_circularity_guard_scopes_to_passage_angle():
    # far from the circle the passage construction gives up, but the loop
    # machinery itself must still run
    curve = build_boundary(cosine_profile(5, 0.02), tau=1.0)
    assert max(curve.kappa_max - 1.0, 1.0 - curve.kappa_min) > 0.2
    with pytest.raises(BracketFailure):
        passage_angle(curve, 3, 0.1, 0.1)
    prof = loop_profile(curve, 3, nodes=64)
    assert prof.residual < 1e-8 * curve.perimeter


def test_loop_argument_validation(disk):
    with pytest.raises(ValueError):
        loop_profile(disk, 1)
    with pytest.raises(ValueError):
        loop_profile(disk, 3, nodes=32)
    with pytest.raises(ValueError):
        passage_angle(disk, 1, 0.0, 0.0)


def test_disk_critical_points_degenerate(disk):
    prof = loop_profile(disk, 5, nodes=64)
    pts = critical_points(prof)
    assert len(pts) == 1
    assert pts[0].kind == "degenerate"
    assert pts[0].value == pytest.approx(10.0 * np.sin(np.pi / 5.0), abs=1e-9)


def test_resonant_critical_points(cos3_curve):
    prof = loop_profile(cos3_curve, 3)
    pts = critical_points(prof)
    kinds = [p.kind for p in pts]
    assert kinds.count("maximum") == 3
    assert kinds.count("minimum") == 3
    values = [p.value for p in pts]
    spread = max(values) - min(values)
    # the resonant term opens the stationary values by 2 tau a 2 q sin(pi/q)
    predicted = 2.0 * 0.01 * 2.0 * 3.0 * np.sin(np.pi / 3.0)
    assert spread == pytest.approx(predicted, rel=1e-3)
    for p in pts:
        assert abs(float(np.interp(p.s, prof.s, prof.derivative, period=cos3_curve.perimeter))) < 1e-6


def test_disk_polygon_actions(disk):
    for p, q in ((1, 5), (2, 5), (1, 7)):
        orbit = birkhoff_orbit(disk, p, q)
        assert orbit.action == pytest.approx(2.0 * q * np.sin(np.pi * p / q), abs=1e-9)
        assert orbit.converged
        assert orbit.reflection_residual < 1e-9
        assert orbit.footpoints.shape == (q,)
        gaps = np.diff(np.sort(orbit.footpoints))
        assert np.max(np.abs(gaps - disk.perimeter / q)) < 1e-6


def test_non_primitive_rotation_tiles(disk):
    orbit = birkhoff_orbit(disk, 2, 4)
    assert orbit.action == pytest.approx(8.0, abs=1e-9)
    assert orbit.footpoints.shape == (4,)
    prim = birkhoff_orbit(disk, 1, 2)
    assert orbit.action == pytest.approx(2.0 * prim.action, abs=1e-12)


def test_minimax_orbits_bound_the_band(cos5_quarter, cos5_quarter_bands):
    top = birkhoff_orbit(cos5_quarter, 1, 5, mode="maximize")
    bottom = birkhoff_orbit(cos5_quarter, 1, 5, mode="minimize")
    assert top.reflection_residual < 1e-9
    assert bottom.reflection_residual < 1e-9
    assert bottom.action < top.action
    band5 = cos5_quarter_bands[3]
    assert band5.q == 5
    assert top.action == pytest.approx(band5.upper, abs=1e-8)
    assert bottom.action == pytest.approx(band5.lower, abs=1e-8)


def test_birkhoff_footpoints_reflect(ellipse01):
    orbit = birkhoff_orbit(ellipse01, 2, 5)
    x = orbit.footpoints
    # consecutive footpoints in the orbit order are x[i], x[i+1] after
    # sorting by position times winding; verify via the reflection law at
    # one vertex: incoming and outgoing chords make equal angles
    pts = ellipse01.evaluate(x).point
    nxt = np.roll(pts, -1, axis=0)
    prv = np.roll(pts, 1, axis=0)
    for i in range(5):
        t = ellipse01.evaluate(x[i]).tangent
        d_in = pts[i] - prv[i]
        d_out = nxt[i] - pts[i]
        cos_in = d_in @ t / np.hypot(*d_in)
        cos_out = d_out @ t / np.hypot(*d_out)
        assert cos_in == pytest.approx(cos_out, abs=1e-8)


def test_birkhoff_argument_validation(disk):
    with pytest.raises(ValueError):
        birkhoff_orbit(disk, 0, 5)
    with pytest.raises(ValueError):
        birkhoff_orbit(disk, 3, 5)
    with pytest.raises(ValueError):
        birkhoff_orbit(disk, 1, 1)
    with pytest.raises(ValueError):
        birkhoff_orbit(disk, 1, 5, mode="saddle")
