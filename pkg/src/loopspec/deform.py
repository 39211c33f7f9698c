"""First-order response of loop lengths to the radial deformation.

For the family r = 1 + tau f(theta), the boundary velocity field splits
into normal and tangential components (n, t) against the moving frame.
Differentiating a loop length in tau leaves a sum of collision terms:
interior reflections contribute 2 n sin(angle) each, while the common
endpoint of the loop adds n (sin(return) + sin(launch)) and
t (cos(return) - cos(launch)).  Where the loop closes smoothly (return
angle equal to launch angle) the endpoint terms fold into the same
2 n sin(angle) shape as the interior ones.  Everything is cross-checked
against a plain difference quotient in tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedProfile
from .geometry import build_boundary
from .loops import _guard_circularity, _propagate, _shoot
from .serialize import write_csv
from .settings import DEFAULT

_TWO_PI = 2.0 * np.pi

# return/launch angles closer than this use the folded periodic form
_PERIODIC_TOL = 1e-10


@dataclass(frozen=True)
class VariationField:
    s: np.ndarray
    normal: np.ndarray
    tangential: np.ndarray


@dataclass(frozen=True)
class MelnikovProfile:
    q: int
    tau: float
    s: np.ndarray
    values: np.ndarray
    endpoint_normal: np.ndarray
    endpoint_tangential: np.ndarray
    interior: np.ndarray
    periodic: np.ndarray         # mask where the folded form was applicable

    def to_csv(self, path):
        write_csv(path, ("s", "M_q"), zip(self.s, self.values))


def _require_deformation(profile):
    if not getattr(profile, "is_deformation", False):
        raise UnsupportedProfile(
            "variation fields are defined only for radial deformation profiles"
        )


def _variation_at(profile, tau, theta):
    f = profile(theta)
    fp = profile(theta, 1)
    radial = 1.0 + tau * f
    den = np.hypot(tau * fp, radial)
    return f * radial / den, tau * fp * f / den


def variations(curve, settings=None):
    """Normal and tangential deformation components on the arc-length grid.

    At tau = 0 the normal component is f(theta(s)) and the tangential one
    vanishes; the pointwise identity n^2 + t^2 = f^2 holds for every tau.
    """
    _require_deformation(curve.profile)
    n, t = _variation_at(curve.profile, curve.tau, curve.theta)
    return VariationField(s=curve.s.copy(), normal=n, tangential=t)


def melnikov(profile, tau, q, s=None, curve=None, settings=None):
    """Derivative of the q-loop length in tau along the deformation family.

    Assembled from the collision terms of the loop at the current tau; no
    numerical differentiation is involved.  s defaults to the standard loop
    grid of the curve built for (profile, tau).
    """
    _require_deformation(profile)
    if curve is None:
        curve = build_boundary(profile, tau=tau, settings=settings or DEFAULT)
    settings = settings or curve.settings
    if q < 2:
        raise ValueError("q must be at least 2")
    ell = curve.perimeter
    if s is None:
        s = ell * np.arange(settings.loop_nodes) / settings.loop_nodes
    else:
        s = np.asarray(s, dtype=float)

    alpha, out, _ = _shoot(curve, q, s, ell, settings)
    th0 = curve.theta_of_s(s)
    state, _, _, rec = _propagate(curve, th0, s, alpha, q, settings, record=True)

    thetas = rec["theta"]                 # q+1 entries; last is the return point
    phis = rec["phi"]                     # phis[0] is the launch angle
    launch = alpha
    ret = state.phi

    n0, t0 = _variation_at(profile, tau, np.mod(thetas[0], _TWO_PI))
    endpoint_normal = n0 * (np.sin(ret) + np.sin(launch))
    endpoint_tangential = t0 * (np.cos(ret) - np.cos(launch))
    interior = np.zeros_like(s)
    for j in range(1, q):
        nj, _ = _variation_at(profile, tau, np.mod(thetas[j], _TWO_PI))
        interior += 2.0 * nj * np.sin(phis[j])

    periodic = np.abs(launch - ret) <= _PERIODIC_TOL
    folded = 2.0 * n0 * np.sin(launch) + interior
    values = np.where(periodic, folded, endpoint_normal + endpoint_tangential + interior)
    return MelnikovProfile(
        q=q,
        tau=float(tau),
        s=s,
        values=values,
        endpoint_normal=endpoint_normal,
        endpoint_tangential=endpoint_tangential,
        interior=interior,
        periodic=periodic,
    )


def melnikov_vs_fd(profile, tau, q, h=None, s=None, settings=None):
    """Worst difference between the collision-term derivative and a central
    difference quotient of the loop length in tau.

    The variation components are fixed-polar-angle derivatives of the
    family, so the quotient tracks base points of fixed theta across tau
    (their arc-length labels drift with the parametrization).  Shooting
    runs at tightened tolerance so the quotient is not limited by endpoint
    residual noise at small h.
    """
    _require_deformation(profile)
    base = (settings or DEFAULT).tightened()
    if h is None:
        h = base.fd_step
    if not 0.0 <= tau - h or not tau + h <= 1.0:
        raise ValueError("tau +/- h must stay inside [0, 1]")

    mid = build_boundary(profile, tau=tau, settings=base)
    if s is None:
        s = mid.perimeter * np.arange(base.loop_nodes) / base.loop_nodes
    else:
        s = np.asarray(s, dtype=float)
    prof = melnikov(profile, tau, q, s=s, curve=mid, settings=base)
    base_theta = mid.theta_of_s(s)

    lengths = []
    for t in (tau + h, tau - h):
        cv = build_boundary(profile, tau=t, settings=base)
        s_side = cv.arclength_of_theta(base_theta)
        _, _, length = _shoot(cv, q, s_side, cv.perimeter, base)
        lengths.append(length)
    quotient = (lengths[0] - lengths[1]) / (2.0 * h)
    return float(np.max(np.abs(quotient - prof.values)))
