"""Oscillatory integrals of periodic phases and their decay diagnostics.

I(lambda) = integral over one period of a(s) exp(-i lambda phi(s)) ds.

For smooth periodic data the trapezoid rule converges spectrally, so the
integral is evaluated on doubling grids until two consecutive resolutions
agree.  The large-lambda size of I is governed by the critical points of
phi: nondegenerate ones force lambda^(-1/2), constant phases stall at the
full mass, degenerate flat points decay slower.  The same structure shows
up statically in the sublevel mass function

    g0(t) = integral of a over { phi <= t },

which is smooth away from critical values, has a square-root-type modulus
of continuity (Holder exponent about 1/2) at nondegenerate critical values,
and jumps where phi is flat on a set of positive measure.  Those fingerprints
are what detect_constant_phase reads off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoisyFit, ResolutionCap
from .settings import DEFAULT

_TWO_PI = 2.0 * np.pi


def _power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class PeriodicFunction:
    """Uniform samples of a periodic function, refinable on demand.

    Refinement uses the stored callable when one exists and trigonometric
    interpolation (spectral zero-padding) otherwise; either way the samples
    at the original nodes are preserved.
    """

    def __init__(self, values, period, source=None):
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or not _power_of_two(values.size) or values.size < 16:
            raise ValueError("need a 1-d power-of-two sample array, at least 16 long")
        if not np.all(np.isfinite(values)):
            raise ValueError("samples must be finite")
        if not period > 0.0:
            raise ValueError("period must be positive")
        self.values = values
        self.values.setflags(write=False)
        self.period = float(period)
        self._source = source

    @classmethod
    def from_samples(cls, values, period):
        return cls(values, period)

    @classmethod
    def from_callable(cls, fn, period, n=4096):
        grid = period * np.arange(n) / n
        return cls(np.asarray(fn(grid), dtype=float), period, source=fn)

    @classmethod
    def from_profile(cls, profile, n=4096):
        """Sample a radius profile as a function of the polar angle."""
        return cls.from_callable(lambda th: profile(th), _TWO_PI, n=n)

    @property
    def grid(self):
        return self.period * np.arange(self.values.size) / self.values.size

    def refined(self, n):
        if n < self.values.size:
            raise ValueError("refinement cannot reduce the sample count")
        if not _power_of_two(n):
            raise ValueError("sample counts are powers of two")
        if n == self.values.size:
            return self.values
        if self._source is not None:
            grid = self.period * np.arange(n) / n
            return np.asarray(self._source(grid), dtype=float)
        spec = np.fft.rfft(self.values)
        return np.fft.irfft(spec, n) * (n / self.values.size)


def _ones_like(phase):
    return PeriodicFunction(np.ones(phase.values.size), phase.period)


def _check_pair(phase, amplitude):
    if amplitude is None:
        amplitude = _ones_like(phase)
    if abs(amplitude.period - phase.period) > 1e-12 * phase.period:
        raise ValueError("phase and amplitude periods differ")
    return amplitude


def oscillatory_integral(phase, amplitude, lam, settings=None):
    """I(lambda) on doubling grids until two resolutions agree.

    Agreement is measured against the trivial bound period * mean |a|; the
    grid doubles from the sampled resolution up to the configured cap, past
    which ResolutionCap reports the last two disagreeing values.
    """
    settings = settings or DEFAULT
    amplitude = _check_pair(phase, amplitude)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    period = phase.period
    n = max(phase.values.size, amplitude.values.size, 64)
    prev = None
    while True:
        ph = phase.refined(n)
        am = amplitude.refined(n)
        scale = period * float(np.mean(np.abs(am)))
        vals = np.empty(lam_arr.size, dtype=complex)
        for i, lv in enumerate(lam_arr):
            vals[i] = period * np.mean(am * np.exp(-1j * lv * ph))
        if prev is not None and np.max(np.abs(vals - prev)) <= settings.osc_tol * max(scale, 1e-300):
            break
        if n >= settings.osc_cap:
            raise ResolutionCap(
                "quadrature still moving at %d samples" % n, last=vals, previous=prev
            )
        prev = vals
        n *= 2
    if np.isscalar(lam) or np.ndim(lam) == 0:
        return complex(vals[0])
    return vals


@dataclass(frozen=True)
class DecayFit:
    lam_min: float
    lam_max: float
    exponent: float
    coefficient: float
    constant: complex            # c0 subtracted before fitting
    residual: float              # RMS log10 misfit of the octave means
    fast_decay: bool
    stalled: bool


def _octave_fit(lam, resid):
    """Slope of log RMS per octave against log lambda.

    Per-lambda values pass through near-zeros of the oscillatory tail, so
    the power law is read from octave-RMS averages, not raw points.
    """
    bins = np.floor(np.log2(lam / lam.min()) * (1.0 - 1e-12)).astype(int)
    centers, means = [], []
    for b in np.unique(bins):
        sel = bins == b
        centers.append(np.exp(np.mean(np.log(lam[sel]))))
        means.append(np.sqrt(np.mean(resid[sel] ** 2)))
    centers = np.array(centers)
    means = np.array(means)
    good = means > 0.0
    if np.count_nonzero(good) < 2:
        return 0.0, 0.0, 0.0
    coef = np.polyfit(np.log(centers[good]), np.log(means[good]), 1)
    fitted = np.polyval(coef, np.log(centers[good]))
    rms = float(np.sqrt(np.mean((np.log(means[good]) - fitted) ** 2))) / np.log(10.0)
    return float(coef[0]), float(np.exp(coef[1])), rms


def decay_exponent(phase, amplitude, lam, noise_floor=None, settings=None):
    """Power-law fit |I(lambda) - c0| ~ coefficient * lambda^exponent.

    The constant c0 is zero unless the decay stalls (slope above -0.1 with
    c0 = 0), in which case it is estimated as the mean of I over the top
    octave.  Residuals below the noise floor report fast_decay instead of a
    meaningless fitted slope.  NoisyFit rejects untrustworthy regressions.
    """
    settings = settings or DEFAULT
    amplitude = _check_pair(phase, amplitude)
    lam = np.sort(np.asarray(lam, dtype=float))
    if lam[0] < 1.0:
        raise ValueError("lambda grid must start at 1 or above")
    if np.log2(lam[-1] / lam[0]) < 3.0 - 1e-9:
        raise ValueError("need at least three octaves of lambda")
    vals = oscillatory_integral(phase, amplitude, lam, settings=settings)
    scale = phase.period * float(np.mean(np.abs(amplitude.values)))
    if noise_floor is None:
        noise_floor = 1e-12 * scale

    slope0, _, _ = _octave_fit(lam, np.abs(vals))
    stalled = slope0 > -0.1
    c0 = complex(np.mean(vals[lam >= lam[-1] / 2.0])) if stalled else 0.0
    resid = np.abs(vals - c0)
    if float(np.max(resid)) <= noise_floor:
        return DecayFit(
            lam_min=float(lam[0]),
            lam_max=float(lam[-1]),
            exponent=float("-inf"),
            coefficient=0.0,
            constant=c0,
            residual=0.0,
            fast_decay=True,
            stalled=stalled,
        )
    slope, coeff, rms = _octave_fit(lam, resid)
    if rms > settings.fit_residual_max:
        raise NoisyFit("octave fit residual %g exceeds %g" % (rms, settings.fit_residual_max),
                       residual=rms)
    return DecayFit(
        lam_min=float(lam[0]),
        lam_max=float(lam[-1]),
        exponent=slope,
        coefficient=coeff,
        constant=c0,
        residual=rms,
        fast_decay=False,
        stalled=stalled,
    )


def sublevel_distribution(phase, amplitude, t, n=None):
    """Mass of the amplitude over sublevel sets of the phase.

    Each grid cell carries a linear model of both phase and amplitude; the
    crossing fraction is exact for the linear model, so g0 is continuous
    and monotone in t wherever the phase is nonconstant, and jumps by the
    cell mass where the phase sits flat at or below t.
    """
    amplitude = _check_pair(phase, amplitude)
    if float(np.min(amplitude.values)) < 0.0:
        raise ValueError("amplitude must be nonnegative")
    if n is None:
        n = max(phase.values.size, amplitude.values.size)
    ph = phase.refined(n)
    am = amplitude.refined(n)
    h = phase.period / n
    p0 = ph
    p1 = np.roll(ph, -1)
    a0 = am
    a1 = np.roll(am, -1)
    dp = p1 - p0
    flat = dp == 0.0

    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t_arr.size)
    chunk = max(1, int(2 ** 22 // n))
    for start in range(0, t_arr.size, chunk):
        tc = t_arr[start : start + chunk, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (tc - p0[None, :]) / dp[None, :]
        u = np.clip(u, 0.0, 1.0)
        rising = h * (a0 * u + 0.5 * (a1 - a0) * u * u)
        v = 1.0 - u
        falling = h * (a0 * v + 0.5 * (a1 - a0) * (1.0 - u * u))
        cell = np.where(dp[None, :] > 0.0, rising, falling)
        flat_mass = np.where(p0[None, :] <= tc, h * 0.5 * (a0 + a1), 0.0)
        cell = np.where(flat[None, :], flat_mass, cell)
        out[start : start + chunk] = cell.sum(axis=1)
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out[0])
    return out


def holder_exponent(phase, amplitude, t0, h, n=2 ** 14, settings=None):
    """Fitted beta with |g0(t0 + h) - g0(t0 - h)| ~ h^beta.

    Near 1/2 at a nondegenerate critical value, near 1 at regular values,
    near 0 across a jump.
    """
    settings = settings or DEFAULT
    amplitude = _check_pair(phase, amplitude)
    h = np.sort(np.asarray(h, dtype=float))
    if h.size < 3 or h[0] <= 0.0:
        raise ValueError("need at least three positive offsets")
    n = max(n, phase.values.size, amplitude.values.size)
    upper = sublevel_distribution(phase, amplitude, t0 + h, n=n)
    lower = sublevel_distribution(phase, amplitude, t0 - h, n=n)
    y = np.abs(upper - lower)
    good = y > 0.0
    if np.count_nonzero(good) < 3:
        return float("inf")
    coef = np.polyfit(np.log(h[good]), np.log(y[good]), 1)
    fitted = np.polyval(coef, np.log(h[good]))
    rms = float(np.sqrt(np.mean((np.log(y[good]) - fitted) ** 2))) / np.log(10.0)
    if rms > settings.fit_residual_max:
        raise NoisyFit("Holder fit residual %g exceeds %g" % (rms, settings.fit_residual_max),
                       residual=rms)
    return float(coef[0])


def _extremum_values(ph):
    """Critical values of the sampled phase, parabola-refined."""
    left = np.roll(ph, 1)
    right = np.roll(ph, -1)
    is_max = (ph >= left) & (ph > right)
    is_min = (ph <= left) & (ph < right)
    values = []
    for idx in np.flatnonzero(is_max | is_min):
        ym, y0, yp = left[idx], ph[idx], right[idx]
        den = ym - 2.0 * y0 + yp
        if den != 0.0:
            delta = 0.5 * (ym - yp) / den
            values.append(y0 - 0.25 * (ym - yp) * delta)
        else:
            values.append(y0)
    return values


def detect_constant_phase(phase, amplitude=None, settings=None, value_tol=1e-8):
    """Decide whether the phase concentrates at a single critical value.

    A phase with total variation below the plateau tolerance is a single
    critical value outright.  Otherwise every distinct extremum value gets a
    Holder exponent of g0; verdict is single-critical-value exactly when all
    exponents at or below 0.6 occur at one common value (within value_tol).
    """
    settings = settings or DEFAULT
    amplitude = _check_pair(phase, amplitude)
    if float(np.min(amplitude.values)) <= 0.0:
        raise ValueError("amplitude must be strictly positive")
    n = max(phase.values.size, 4096)
    ph = phase.refined(n)
    lo, hi = float(np.min(ph)), float(np.max(ph))
    if hi - lo < settings.flat_tol:
        return "single-critical-value"

    values = sorted(_extremum_values(ph))
    distinct = [values[0]]
    for v in values[1:]:
        if v - distinct[-1] > value_tol:
            distinct.append(v)

    span = hi - lo
    offsets = span * 2.0 ** -np.arange(4.0, 11.0)
    critical = []
    for t0 in distinct:
        beta = holder_exponent(phase, amplitude, t0, offsets, settings=settings)
        if beta <= 0.6:
            critical.append(t0)
    if len(critical) <= 1:
        return "single-critical-value"
    if max(critical) - min(critical) <= value_tol:
        return "single-critical-value"
    return "multiple-critical-values"
