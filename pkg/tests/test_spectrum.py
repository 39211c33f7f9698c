"""Length-spectrum bands, gap structure, labeling, and asymptotics."""

import numpy as np
import pytest

from loopspec import (
    PartitionAmbiguous,
    SpectrumBand,
    band,
    classify_integrability,
    gap_analysis,
    hear_bounces,
    mather,
    mm_fit,
)

TWO_PI = 2.0 * np.pi


def _fake_band(q, lower, upper, perimeter):
    values = (lower,) if upper == lower else (lower, upper)
    return SpectrumBand(q=q, lower=lower, upper=upper, values=values,
                        degenerate=upper == lower, perimeter=perimeter)


def test_disk_bands_degenerate(disk):
    for q in (3, 5, 8):
        b = band(disk, q)
        exact = 2.0 * q * np.sin(np.pi / q)
        assert b.degenerate
        assert b.width < 1e-11
        assert b.lower == pytest.approx(exact, abs=1e-9)
        assert b.birkhoff_action == pytest.approx(exact, abs=1e-9)


def test_ellipse_axis_band(ellipse_bands):
    for ecc, bands in ellipse_bands.items():
        two = bands[0]
        assert two.q == 2
        assert two.lower == pytest.approx(4.0 * np.sqrt(1.0 - ecc ** 2), abs=1e-8)
        assert two.upper == pytest.approx(4.0, abs=1e-8)
        assert len(two.values) >= 2


def test_ellipse_bands_collapse(ellipse_bands):
    for bands in ellipse_bands.values():
        for b in bands[1:]:
            assert b.width <= 1e-7


def test_band_without_cross_check(cos3_curve):
    checked = band(cos3_curve, 3)
    bare = band(cos3_curve, 3, cross_check=False)
    assert bare.birkhoff_action is None
    assert bare.lower == pytest.approx(checked.lower, abs=1e-9)
    assert bare.upper == pytest.approx(checked.upper, abs=1e-9)
    assert checked.birkhoff_action == pytest.approx(checked.upper, abs=1e-8)


def test_gap_analysis_report(ellipse_bands):
    report = gap_analysis(ellipse_bands[0.1])
    assert len(report.gaps) == len(report.bands) - 1
    assert report.monotone
    assert report.separated
    assert report.verdict == "rationally-integrable-within-tol"
    assert classify_integrability(report) == report.verdict
    # gaps shrink like the classical q^-2 tail
    assert report.gaps[0] > 10.0 * report.gaps[-1]


def test_gap_analysis_validation(disk):
    b3 = band(disk, 3)
    with pytest.raises(ValueError):
        gap_analysis([b3])
    b5 = band(disk, 5)
    with pytest.raises(ValueError):
        gap_analysis([b3, b5])


def test_classification_rules():
    ell = TWO_PI
    thin = 1e-9
    integrable = [_fake_band(q, 5.0 + 0.1 * q, 5.0 + 0.1 * q + thin, ell) for q in range(2, 7)]
    assert classify_integrability(integrable) == "rationally-integrable-within-tol"
    # one wide band fitting strictly inside its gap: fluctuation pattern
    fluct = list(integrable)
    fluct[3] = _fake_band(5, 5.5, 5.52, ell)
    assert classify_integrability(fluct) == "spectrum-fluctuates"
    # a wide band at the top q has no next band to separate from
    topheavy = list(integrable)
    topheavy[-1] = _fake_band(6, 5.6, 5.62, ell)
    assert classify_integrability(topheavy) == "inconclusive"
    # a wide q = 2 band alone never counts against integrability
    widetwo = list(integrable)
    widetwo[0] = _fake_band(2, 5.0, 5.1, ell)
    assert classify_integrability(widetwo) == "rationally-integrable-within-tol"
    # tolerances are honored
    assert classify_integrability(fluct, tol_width=1.0) == "rationally-integrable-within-tol"
    assert classify_integrability(fluct, tol_mono=1.0) == "inconclusive"


def test_hear_bounces_round_trip(disk):
    lengths = [2.0 * q * np.sin(np.pi / q) for q in range(2, 11)]
    heard = hear_bounces(lengths, disk.perimeter)
    assert [h.q for h in heard] == list(range(2, 11))
    for h, v in zip(heard, lengths):
        assert h.values == (v,)


def test_hear_bounces_groups_band_values(ellipse01):
    v2 = [4.0 * np.sqrt(0.99), 4.0]
    v3 = [band(ellipse01, 3).upper]
    v4 = [band(ellipse01, 4).upper]
    heard = hear_bounces(sorted(v2 + v3 + v4), ellipse01.perimeter)
    assert [h.q for h in heard] == [2, 3, 4]
    assert len(heard[0].values) == 2


def test_hear_bounces_ambiguous():
    eta = 2.0 * 3.0 * np.sin(np.pi / 3.0) - 4.0
    with pytest.raises(PartitionAmbiguous):
        hear_bounces([4.0, 4.0 + 1.02 * eta / 10.0], TWO_PI)


def test_hear_bounces_validation():
    with pytest.raises(ValueError):
        hear_bounces([], TWO_PI)
    with pytest.raises(ValueError):
        hear_bounces([4.0, 3.9], TWO_PI)
    with pytest.raises(ValueError):
        hear_bounces([4.0, 7.0], TWO_PI)
    with pytest.raises(ValueError):
        hear_bounces([-1.0], TWO_PI)


def test_disk_mather_values(disk):
    for p, q in ((1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 5)):
        assert mather(disk, p, q) == pytest.approx(-2.0 * np.sin(np.pi * p / q), abs=1e-9)


def test_mather_strict_convexity(ellipse01):
    # omega = 1/5, 1/4, 3/10 are in arithmetic progression
    left = mather(ellipse01, 1, 5)
    mid = mather(ellipse01, 1, 4)
    right = mather(ellipse01, 3, 10)
    assert mid < 0.5 * (left + right)


def test_mm_fit_recovers_planted_coefficients(disk):
    ell = disk.perimeter
    c1 = np.pi ** 3 / 3.0
    c2 = -0.7
    bands = [
        _fake_band(q, ell - c1 / q ** 2 - c2 / q ** 4,
                   ell - c1 / q ** 2 - c2 / q ** 4, ell)
        for q in range(10, 41)
    ]
    fit = mm_fit(bands, disk)
    assert fit.fitted_c1 == pytest.approx(c1, rel=1e-10)
    assert fit.fitted_c2 == pytest.approx(c2, rel=1e-8)
    assert fit.predicted_c1 == pytest.approx(np.pi ** 3 / 3.0, rel=1e-10)
    assert fit.rel_error < 1e-10
    assert fit.q_min == 10
    assert fit.q_max == 40


def test_mm_fit_sees_the_next_power(disk):
    ell = disk.perimeter
    c1 = np.pi ** 3 / 3.0
    bands = [
        _fake_band(q, ell - c1 / q ** 2 - 0.5 / q ** 4 - 2.0 / q ** 6,
                   ell - c1 / q ** 2 - 0.5 / q ** 4 - 2.0 / q ** 6, ell)
        for q in range(10, 41)
    ]
    fit = mm_fit(bands, disk)
    assert fit.rel_error < 1e-4
    assert fit.residual_order > 3.0


def test_mm_fit_validation(disk):
    ell = disk.perimeter
    small = [_fake_band(q, ell - 1.0 / q ** 2, ell - 1.0 / q ** 2, ell) for q in range(10, 16)]
    with pytest.raises(ValueError):
        mm_fit(small, disk)
    shallow = [_fake_band(q, ell - 1.0 / q ** 2, ell - 1.0 / q ** 2, ell) for q in range(10, 25)]
    with pytest.raises(ValueError):
        mm_fit(shallow, disk)
