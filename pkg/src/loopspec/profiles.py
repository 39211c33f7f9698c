"""Radius profiles: the boundary is r(theta) in polar form about the origin.

Two families are supported.  FourierProfile describes deformations of the
unit circle, r = 1 + tau * f(theta) with f a trigonometric polynomial; the
deformation size tau is supplied separately so one profile serves a whole
family of curves.  EllipseProfile is the exact ellipse with unit semi-major
axis, kept as its own analytic variant so that its billiard really is the
integrable one and not a truncated approximation.

Both expose radius_derivs(theta, tau) returning (r, r', r'', r''') with
respect to theta, which is everything curve construction and the chord
solver need.
"""

from __future__ import annotations

import numpy as np


class FourierProfile:
    """Trigonometric polynomial f(theta) = a0 + sum_k a_k cos k theta + b_k sin k theta.

    Derivatives are exact, term by term.  Calling the profile evaluates
    f or one of its derivatives; radius_derivs applies the profile as a
    radial deformation of the unit circle.
    """

    is_deformation = True

    def __init__(self, cos=(), sin=()):
        a = np.atleast_1d(np.asarray(cos, dtype=float))
        b = np.atleast_1d(np.asarray(sin, dtype=float))
        if a.size == 0:
            a = np.zeros(1)
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("coefficient arrays must be one-dimensional")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        n = max(a.size, b.size + 1)
        self.cos = np.zeros(n)
        self.cos[: a.size] = a
        self.sin = np.zeros(n)          # aligned with cos; sin[0] is unused
        self.sin[1 : b.size + 1] = b
        self.degree = n - 1
        self._k = np.arange(n, dtype=float)
        # stacked coefficient rows for (f, f', f'', f''') against cos(k theta)
        # and sin(k theta); one matmul pair then evaluates all four orders
        k, k2 = self._k, self._k ** 2
        self._amat = np.stack((self.cos, k * self.sin, -k2 * self.cos, -k2 * k * self.sin))
        self._bmat = np.stack((self.sin, -k * self.cos, -k2 * self.sin, k2 * k * self.cos))

    def __call__(self, theta, order=0):
        theta = np.asarray(theta, dtype=float)
        kt = np.multiply.outer(self._k, theta)
        c, s = np.cos(kt), np.sin(kt)
        basis = ((c, s), (-s, c), (-c, -s), (s, -c))[order % 4]
        kn = self._k ** order
        out = np.tensordot(kn * self.cos, basis[0], axes=1)
        out += np.tensordot(kn * self.sin, basis[1], axes=1)
        return out

    def c_norm(self, n, samples=4096):
        """max over orders j <= n of sup |f^(j)|, on a fine uniform grid."""
        theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        return max(float(np.max(np.abs(self(theta, order=j)))) for j in range(n + 1))

    def radius_derivs(self, theta, tau):
        theta = np.asarray(theta, dtype=float)
        kt = np.multiply.outer(self._k, theta)
        f = np.dot(self._amat, np.cos(kt)) + np.dot(self._bmat, np.sin(kt))
        f *= tau
        return (1.0 + f[0], f[1], f[2], f[3])

    def __repr__(self):
        return "FourierProfile(cos=%s, sin=%s)" % (self.cos.tolist(), self.sin.tolist()[1:])


class EllipseProfile:
    """Ellipse with semi-axes 1 and sqrt(1 - ecc^2), centered at the origin.

    Polar form r(theta) = b / sqrt(1 - ecc^2 cos^2 theta), b = sqrt(1 - ecc^2).
    Not a deformation family: radius_derivs ignores tau, and the normal/
    tangential variation fields are undefined for it.
    """

    is_deformation = False

    def __init__(self, eccentricity):
        ecc = float(eccentricity)
        if not 0.0 <= ecc < 1.0:
            raise ValueError("eccentricity must lie in [0, 1)")
        self.eccentricity = ecc
        self.semi_minor = np.sqrt(1.0 - ecc ** 2)

    def radius_derivs(self, theta, tau=None):
        theta = np.asarray(theta, dtype=float)
        b = self.semi_minor
        e2 = self.eccentricity ** 2
        # g = 1 - e^2 cos^2 theta = (1 - e^2/2) - (e^2/2) cos 2theta
        amp = 0.5 * e2
        g = (1.0 - amp) - amp * np.cos(2 * theta)
        g1 = 2 * amp * np.sin(2 * theta)
        g2 = 4 * amp * np.cos(2 * theta)
        g3 = -8 * amp * np.sin(2 * theta)
        gm = g ** -0.5
        r = b * gm
        r1 = -0.5 * b * gm ** 3 * g1
        r2 = 0.75 * b * gm ** 5 * g1 ** 2 - 0.5 * b * gm ** 3 * g2
        r3 = (
            -1.875 * b * gm ** 7 * g1 ** 3
            + 2.25 * b * gm ** 5 * g1 * g2
            - 0.5 * b * gm ** 3 * g3
        )
        return r, r1, r2, r3

    def __repr__(self):
        return "EllipseProfile(eccentricity=%r)" % self.eccentricity


def cosine_profile(k, amplitude=1.0):
    """Single-mode profile f = amplitude * cos(k theta)."""
    if k < 0:
        raise ValueError("mode number must be nonnegative")
    a = np.zeros(k + 1)
    a[k] = amplitude
    return FourierProfile(cos=a)
