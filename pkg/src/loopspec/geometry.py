"""Boundary curves with cached arc-length tables.

A BoundaryCurve wraps a radius profile r(theta) (a deformation of the unit
circle or an exact ellipse) and precomputes everything the dynamics needs:
the arc-length parametrization and its inverse, position / frame / curvature
tables on a uniform arc-length grid, the curvature antiderivative, and the
curvature^(2/3) normalization used by the adapted circle coordinate.

Curvature comes from the polar closed form

    kappa = (r^2 + 2 r'^2 - r r'') / (r^2 + r'^2)^(3/2),

never from finite differencing, so table accuracy is limited only by the
spectral arc-length inversion (near machine precision for the analytic
profiles used here).
"""

from __future__ import annotations

import warnings
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from ._series import TrigSeries
from .errors import NonConvex, NonConvexWarning, NonStarShaped
from .settings import DEFAULT

_TWO_PI = 2.0 * np.pi

# frame of the curve at given polar angles; normal points outward
Frame = namedtuple("Frame", "px py tx ty speed kappa")

BoundaryPoint = namedtuple("BoundaryPoint", "point tangent normal kappa kappa_prime")


@dataclass(frozen=True)
class CircularityReport:
    """sup-norm distances of kappa and its derivatives from the unit circle."""

    entries: dict
    convex: bool


@dataclass(frozen=True)
class CurvatureFunctionals:
    kappa_sq: float
    kappa_prime_sq: float
    kappa_four: float
    kappa_two_thirds: float
    custom: float | None = None


def _power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class BoundaryCurve:
    """Immutable planar convex-ish curve in polar form about the origin.

    Build through build_boundary.  Tables live on a uniform arc-length grid
    of grid_size nodes; arbitrary-s evaluation goes through a Newton
    inversion of the spectral arc-length antiderivative, then the exact
    polar formulas, so nothing is interpolated from tables except initial
    guesses.
    """

    def __init__(self, profile, tau=0.0, grid_size=None, settings=DEFAULT):
        if grid_size is None:
            grid_size = settings.grid_size
        if grid_size < 256 or not _power_of_two(grid_size):
            raise ValueError("grid_size must be a power of two, at least 256")
        tau = float(tau)
        if not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        self.profile = profile
        self.tau = tau
        self.grid_size = grid_size
        self.settings = settings

        nfft = 4 * grid_size
        theta_fine = _TWO_PI * np.arange(nfft) / nfft
        r, r1, r2, r3 = profile.radius_derivs(theta_fine, tau)
        if np.min(r) <= 0.0:
            raise NonStarShaped("radius profile reaches %g" % np.min(r))
        speed = np.hypot(r, r1)
        self._arc = TrigSeries(speed, _TWO_PI)
        self.perimeter = self._arc.mean * _TWO_PI
        self.speed_min = float(np.min(speed))
        self.speed_max = float(np.max(speed))

        kap_fine = self._kappa_theta(r, r1, r2)
        self.kappa_min = float(np.min(kap_fine))
        self.kappa_max = float(np.max(kap_fine))
        self.is_convex = self.kappa_min > 0.0
        if not self.is_convex:
            warnings.warn(
                "curvature reaches %g; loop and spectrum machinery will refuse this curve"
                % self.kappa_min,
                NonConvexWarning,
                stacklevel=3,
            )

        # uniform arc-length grid and its polar angles
        n = grid_size
        self.s = self.perimeter * np.arange(n) / n
        table_s = self._arc.antiderivative(theta_fine)
        th = np.interp(self.s, np.append(table_s, self.perimeter), np.append(theta_fine, _TWO_PI))
        for _ in range(3):
            r, r1, _, _ = profile.radius_derivs(th, tau)
            th -= (self._arc.antiderivative(th) - self.s) / np.hypot(r, r1)
        self.theta = th

        r, r1, r2, r3 = profile.radius_derivs(th, tau)
        g = np.hypot(r, r1)
        ct, st = np.cos(th), np.sin(th)
        self.points = np.column_stack((r * ct, r * st))
        tx = (r1 * ct - r * st) / g
        ty = (r1 * st + r * ct) / g
        self.tangent = np.column_stack((tx, ty))
        self.normal = np.column_stack((ty, -tx))        # outward
        self.kappa = self._kappa_theta(r, r1, r2)
        self.kappa_prime = self._kappa_theta_deriv(r, r1, r2, r3) / g

        self._phi_series = TrigSeries(self.kappa, self.perimeter)
        if self.is_convex:
            self._xi_series = TrigSeries(self.kappa ** (2.0 / 3.0), self.perimeter)
            self.kappa_two_thirds_total = self._xi_series.mean * self.perimeter
        else:
            self._xi_series = None
            self.kappa_two_thirds_total = float("nan")

        for arr in (self.s, self.theta, self.points, self.tangent, self.normal,
                    self.kappa, self.kappa_prime):
            arr.setflags(write=False)

    # ---------------------------------------------------------------- polar

    @staticmethod
    def _kappa_theta(r, r1, r2):
        return (r * r + 2 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5

    @staticmethod
    def _kappa_theta_deriv(r, r1, r2, r3):
        # d kappa / d theta for kappa = u / v^(3/2)
        u = r * r + 2 * r1 * r1 - r * r2
        v = r * r + r1 * r1
        du = 2 * r * r1 + 3 * r1 * r2 - r * r3
        dv = 2 * r * r1 + 2 * r1 * r2
        return (du * v - 1.5 * u * dv) / v ** 2.5

    def frame(self, theta):
        """Position, unit tangent and curvature at polar angles theta."""
        theta = np.asarray(theta, dtype=float)
        r, r1, r2, _ = self.profile.radius_derivs(theta, self.tau)
        g = np.hypot(r, r1)
        ct, st = np.cos(theta), np.sin(theta)
        tx = (r1 * ct - r * st) / g
        ty = (r1 * st + r * ct) / g
        return Frame(r * ct, r * st, tx, ty, g, self._kappa_theta(r, r1, r2))

    # ---------------------------------------------------- parameter changes

    def arclength_of_theta(self, theta):
        """Lifted arc length: increases by the perimeter over each turn."""
        return self._arc.antiderivative(np.asarray(theta, dtype=float))

    def theta_of_s(self, s):
        """Inverse arc-length parametrization, lifted to the real line."""
        s = np.asarray(s, dtype=float)
        wraps = np.floor(s / self.perimeter)
        s0 = s - wraps * self.perimeter
        ext_s = np.append(self.s, self.perimeter)
        ext_t = np.append(self.theta, _TWO_PI)
        th = np.interp(s0, ext_s, ext_t)
        for _ in range(3):
            r, r1, _, _ = self.profile.radius_derivs(th, self.tau)
            th -= (self._arc.antiderivative(th) - s0) / np.hypot(r, r1)
        return th + wraps * _TWO_PI

    def evaluate(self, s):
        """Point, frame and curvature data at arc length s (scalar or array)."""
        scalar = np.isscalar(s) or np.ndim(s) == 0
        th = self.theta_of_s(np.atleast_1d(np.asarray(s, dtype=float)))
        r, r1, r2, r3 = self.profile.radius_derivs(th, self.tau)
        g = np.hypot(r, r1)
        ct, st = np.cos(th), np.sin(th)
        point = np.column_stack((r * ct, r * st))
        tx = (r1 * ct - r * st) / g
        ty = (r1 * st + r * ct) / g
        tangent = np.column_stack((tx, ty))
        normal = np.column_stack((ty, -tx))
        kap = self._kappa_theta(r, r1, r2)
        kap_p = self._kappa_theta_deriv(r, r1, r2, r3) / g
        if scalar:
            return BoundaryPoint(point[0], tangent[0], normal[0], kap[0], kap_p[0])
        return BoundaryPoint(point, tangent, normal, kap, kap_p)

    # ------------------------------------------------------------ integrals

    def curvature_integral(self, s):
        """Antiderivative of kappa along arc length, lifted (one turn adds 2 pi)."""
        return self._phi_series.antiderivative(np.asarray(s, dtype=float))

    def lazutkin(self, s):
        """Adapted circle coordinate xi(s), the normalized kappa^(2/3) measure.

        Strictly increasing, xi(0) = 0, xi(perimeter) = 1; lifted on the
        real line so a full turn adds 1.
        """
        if not self.is_convex:
            raise NonConvex("adapted coordinate needs positive curvature")
        return self._xi_series.antiderivative(np.asarray(s, dtype=float)) / self.kappa_two_thirds_total

    def lazutkin_inverse(self, xi):
        if not self.is_convex:
            raise NonConvex("adapted coordinate needs positive curvature")
        xi = np.asarray(xi, dtype=float)
        wraps = np.floor(xi)
        frac = xi - wraps
        table = self._xi_series.antiderivative(self.s) / self.kappa_two_thirds_total
        s = np.interp(frac, np.append(table, 1.0), np.append(self.s, self.perimeter))
        for _ in range(4):
            th = self.theta_of_s(s)
            r, r1, r2, _ = self.profile.radius_derivs(th % _TWO_PI, self.tau)
            dens = self._kappa_theta(r, r1, r2) ** (2.0 / 3.0) / self.kappa_two_thirds_total
            s -= (self.lazutkin(s) - frac) / dens
        return s + wraps * self.perimeter

    # ---------------------------------------------------------- diagnostics

    def _kappa_derivative_table(self, order):
        if order == 0:
            return self.kappa
        if order == 1:
            return self.kappa_prime
        n = self.grid_size
        c = np.fft.rfft(self.kappa)
        k = 1j * _TWO_PI / self.perimeter * np.arange(c.size)
        c = c * k ** order
        if order % 2 == 1:
            c[-1] = 0.0
        return np.fft.irfft(c, n)

    def circularity(self, max_order=4):
        """Sup distance of kappa^(n) from the circle values (1, 0, 0, ...)."""
        entries = {}
        for order in range(max_order + 1):
            table = self._kappa_derivative_table(order)
            ref = 1.0 if order == 0 else 0.0
            entries[order] = float(np.max(np.abs(table - ref)))
        return CircularityReport(entries=entries, convex=self.is_convex)

    def curvature_functionals(self, multi_index=None):
        """Arc-length integrals of curvature powers.

        The named entries are oint kappa^2, oint kappa'^2, oint kappa^4 and
        oint kappa^(2/3) (NaN when the curve is not convex).  multi_index
        gives exponents (alpha_0, alpha_1, ...) for a custom integrand
        prod_m (d^m kappa / ds^m)^alpha_m.
        """
        ell = self.perimeter
        k23 = float(np.mean(self.kappa ** (2.0 / 3.0)) * ell) if self.is_convex else float("nan")
        custom = None
        if multi_index is not None:
            integrand = np.ones(self.grid_size)
            for order, alpha in enumerate(multi_index):
                if alpha == 0:
                    continue
                integrand = integrand * self._kappa_derivative_table(order) ** alpha
            custom = float(np.mean(integrand) * ell)
        return CurvatureFunctionals(
            kappa_sq=float(np.mean(self.kappa ** 2) * ell),
            kappa_prime_sq=float(np.mean(self.kappa_prime ** 2) * ell),
            kappa_four=float(np.mean(self.kappa ** 4) * ell),
            kappa_two_thirds=k23,
            custom=custom,
        )

    def __repr__(self):
        return "BoundaryCurve(%r, tau=%r, grid_size=%d)" % (self.profile, self.tau, self.grid_size)


def build_boundary(profile, tau=0.0, grid_size=None, settings=DEFAULT):
    """Construct a BoundaryCurve; NonStarShaped if the radius loses positivity."""
    return BoundaryCurve(profile, tau=tau, grid_size=grid_size, settings=settings)
