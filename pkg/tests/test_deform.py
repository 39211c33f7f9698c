"""Deformation fields and the collision-sum derivative of loop lengths."""

import numpy as np
import pytest

from loopspec import (
    EllipseProfile,
    FourierProfile,
    UnsupportedProfile,
    build_boundary,
    cosine_profile,
    melnikov,
    melnikov_vs_fd,
    variations,
)


def test_variation_components_identity():
    profile = FourierProfile(cos=[0.0, 0.01], sin=[0.0, 0.008])
    curve = build_boundary(profile, tau=0.3)
    field = variations(curve)
    f = profile(curve.theta)
    assert np.max(np.abs(field.normal ** 2 + field.tangential ** 2 - f ** 2)) < 1e-14
    assert field.s.shape == field.normal.shape == field.tangential.shape


def test_variation_at_zero_size():
    profile = cosine_profile(4, 0.02)
    curve = build_boundary(profile, tau=0.0)
    field = variations(curve)
    assert np.max(np.abs(field.normal - profile(curve.theta))) < 1e-14
    assert np.max(np.abs(field.tangential)) < 1e-14


def test_resonant_selection_at_zero_size():
    s = np.linspace(0.0, 2.0 * np.pi, 128, endpoint=False)
    # modes not divisible by q average out over the collision sum
    for k, q in ((3, 2), (4, 3), (5, 3), (7, 4)):
        prof = melnikov(cosine_profile(k), 0.0, q, s=s)
        assert np.max(np.abs(prof.values)) < 1e-9
    # k = q and harmonics survive with the closed-form amplitude
    for k, q in ((3, 3), (5, 5), (6, 3)):
        prof = melnikov(cosine_profile(k), 0.0, q, s=s)
        exact = 2.0 * q * np.sin(np.pi / q) * np.cos(k * s)
        assert np.max(np.abs(prof.values - exact)) < 1e-8 * 2.0 * q


def test_resonant_selection_sine_mode():
    s = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    prof = melnikov(FourierProfile(sin=[0.0, 0.0, 1.0]), 0.0, 3, s=s)
    exact = 6.0 * np.sin(np.pi / 3.0) * np.sin(3.0 * s)
    assert np.max(np.abs(prof.values - exact)) < 1e-8 * 6.0


def test_collision_sum_matches_finite_differences():
    profile = cosine_profile(3, 0.01)
    assert melnikov_vs_fd(profile, 0.5, 3) < 1e-6
    assert melnikov_vs_fd(profile, 0.5, 4, h=5e-4) < 1e-7


def test_melnikov_profile_fields(cos3_curve):
    prof = melnikov(cos3_curve.profile, 1.0, 3, curve=cos3_curve)
    assert prof.q == 3
    assert prof.tau == 1.0
    assert prof.s.size == prof.values.size
    assert prof.periodic.dtype == bool
    recombined = np.where(
        prof.periodic,
        prof.values,
        prof.endpoint_normal + prof.endpoint_tangential + prof.interior,
    )
    assert np.max(np.abs(recombined - prof.values)) == 0.0
    # the threefold symmetry kills every mode not divisible by 3, and the
    # first-order resonant mode dominates the higher harmonics
    spectrum = np.abs(np.fft.rfft(prof.values))
    assert np.max(spectrum[[1, 2, 4, 5, 7, 8]]) < 1e-8
    assert spectrum[3] > 3.0 * max(spectrum[0], spectrum[6])


def test_deformation_only_inputs(ellipse01):
    with pytest.raises(UnsupportedProfile):
        melnikov(EllipseProfile(0.1), 0.0, 3)
    with pytest.raises(UnsupportedProfile):
        variations(ellipse01)


def test_melnikov_validation():
    profile = cosine_profile(3, 0.01)
    with pytest.raises(ValueError):
        melnikov(profile, 0.3, 1)
    with pytest.raises(ValueError):
        melnikov_vs_fd(profile, 0.0, 3)
    with pytest.raises(ValueError):
        melnikov_vs_fd(profile, 1.0, 3)
