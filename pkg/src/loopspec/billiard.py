"""The billiard map on the phase cylinder (arc length, launch angle).

A phase point is (x, phi): footpoint arc length x (lifted to the real line)
and the angle phi in [0, pi] between the outgoing ray and the positively
oriented tangent.  One step follows the chord to its next boundary crossing
and reflects.  The boundary angles phi = 0 and phi = pi are the grazing
fixed-point limits: (x, 0) -> (x, 0) and (x, pi) -> (x + perimeter, pi).

The chord crossing is found on the polar angle: the signed cross product of
(gamma(theta) - start) with the ray direction has exactly one interior sign
change for a convex curve, so a bracketed Newton iteration cannot escape.
The step Jacobian is assembled from the exact reflection formulas, not from
finite differences.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure
from .settings import DEFAULT

_TWO_PI = 2.0 * np.pi
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


@dataclass(frozen=True)
class PhasePoint:
    x: float
    phi: float


@dataclass(frozen=True)
class StepResult:
    next: PhasePoint
    jacobian: np.ndarray


@dataclass(frozen=True)
class Orbit:
    points: tuple
    total_length: float
    winding: int


Decomposition = namedtuple("Decomposition", "shift angle shift_defect angle_defect")

# internal vector state: polar angles, lifted arc length, launch angle
_State = namedtuple("_State", "theta x phi")


def _chord_cross(curve, th, ax, ay, dx, dy):
    f = curve.frame(th)
    h = (f.px - ax) * dy - (f.py - ay) * dx
    hp = (f.tx * dy - f.ty * dx) * f.speed
    return h, hp, f


def _advance(curve, state, settings, want_jacobian=False):
    """One reflection for every element of the state. Returns (state, extras).

    extras carries the chord lengths and, on request, the Jacobian entries
    of the step with respect to (x, phi).
    """
    th0, x0, phi = state
    f0 = curve.frame(th0)
    cph, sph = np.cos(phi), np.sin(phi)
    n0x, n0y = f0.ty, -f0.tx
    dx = cph * f0.tx - sph * n0x
    dy = cph * f0.ty - sph * n0y

    # Bracket from the curvature bounds: the chord advances the arc length by
    # at least 2 phi / kappa_max, so half of that in polar angle sits strictly
    # before the root.  Behind the root the same bound for the reversed chord
    # (launch angle pi - phi_1 >= (pi - phi) kappa_min / kappa_max) leaves a
    # gap of at least 2 (pi - phi) kappa_min / kappa_max^2 in arc length.
    lo_off = phi / (curve.kappa_max * curve.speed_max)
    hi_off = (np.pi - phi) * curve.kappa_min / (curve.kappa_max ** 2 * curve.speed_max)
    lo = th0 + lo_off
    hi = th0 + _TWO_PI - hi_off
    # the cross product rounds at ~1e-16 of the coordinate scale, so grazing
    # launches legitimately evaluate to noise there; treat that as a pass
    noise = 1e-13
    for shrink in range(5):
        h_lo, _, _ = _chord_cross(curve, lo, f0.px, f0.py, dx, dy)
        h_hi, _, _ = _chord_cross(curve, hi, f0.px, f0.py, dx, dy)
        ok = (h_lo > -noise) & (h_hi < noise)
        if np.all(ok):
            break
        lo = np.where(h_lo > -noise, lo, th0 + (lo - th0) * 0.25)
        hi = np.where(h_hi < noise, hi, th0 + _TWO_PI - (th0 + _TWO_PI - hi) * 0.25)
    else:
        raise SolverFailure("could not establish a chord bracket")

    th = np.clip(th0 + 2.0 * phi, lo, hi)
    bad = (th <= lo) | (th >= hi)
    th = np.where(bad, 0.5 * (lo + hi), th)
    converged = np.zeros(th.shape, dtype=bool)
    for _ in range(settings.chord_max_iter):
        h, hp, _ = _chord_cross(curve, th, f0.px, f0.py, dx, dy)
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = h / hp
        finite = np.isfinite(delta)
        # a sub-tolerance Newton step ends the element, taking that last
        # polish step so the final error is quadratic, not the tolerance
        polish = finite & (np.abs(delta) <= settings.chord_tol) & ~converged
        th = np.where(polish, th - delta, th)
        converged |= polish
        # grazing chords round h to noise before delta reaches the tolerance;
        # once the bracket itself has collapsed the midpoint is the answer
        collapsed = ((hi - lo) <= settings.chord_tol) & ~converged
        th = np.where(collapsed, 0.5 * (lo + hi), th)
        converged |= collapsed
        if np.all(converged):
            break
        active = ~converged
        pos = h > 0.0
        lo = np.where(active & pos, th, lo)
        hi = np.where(active & ~pos, th, hi)
        cand = th - delta
        bad = ~finite | (cand <= lo) | (cand >= hi)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        th = np.where(active, cand, th)
    else:
        raise SolverFailure(
            "chord solver did not converge within %d iterations" % settings.chord_max_iter
        )

    f1 = curve.frame(th)
    chord = np.hypot(f1.px - f0.px, f1.py - f0.py)
    x1 = x0 + (curve.arclength_of_theta(th) - curve.arclength_of_theta(th0))
    # reflected angle from both frame components; atan2 keeps the grazing
    # limits well conditioned where arccos would lose half the digits
    cos1 = dx * f1.tx + dy * f1.ty
    sin1 = dx * f1.ty - dy * f1.tx
    phi1 = np.arctan2(sin1, cos1)

    extras = {"chord": chord}
    if want_jacobian:
        k0, k1 = f0.kappa, f1.kappa
        s1 = np.sin(phi1)
        extras["jac"] = (
            (chord * k0 - sph) / s1,
            chord / s1,
            (chord * k0 * k1 - k0 * s1 - k1 * sph) / s1,
            (chord * k1 - s1) / s1,
        )
    return _State(th, x1, phi1), extras


def step(curve, point, settings=None):
    """One application of the billiard map, with the 2x2 step Jacobian.

    Accepts scalar or array phase points; for arrays the Jacobian comes back
    with shape (2, 2) + points.  The boundary lines phi = 0 and phi = pi are
    fixed up to the perimeter shift, with the flat-chord Jacobian limit.
    """
    settings = settings or curve.settings
    x = np.asarray(point.x, dtype=float)
    phi = np.asarray(point.phi, dtype=float)
    scalar = x.ndim == 0 and phi.ndim == 0
    x, phi = np.atleast_1d(*np.broadcast_arrays(x, phi))
    if not np.all(np.isfinite(x)) or np.any(phi < 0.0) or np.any(phi > np.pi):
        raise ValueError("phase point needs finite x and phi in [0, pi]")

    x1 = np.empty_like(x)
    phi1 = np.empty_like(phi)
    jac = np.empty((2, 2) + x.shape)
    jac[0, 0] = 1.0
    jac[1, 0] = 0.0
    jac[1, 1] = 1.0
    jac[0, 1] = 2.0 / curve.evaluate(x).kappa
    low = phi == 0.0
    high = phi == np.pi
    x1[low] = x[low]
    x1[high] = x[high] + curve.perimeter
    phi1[low], phi1[high] = 0.0, np.pi

    mid = ~(low | high)
    if np.any(mid):
        xm, pm = x[mid], phi[mid]
        state = _State(curve.theta_of_s(xm), xm, pm)
        out, extras = _advance(curve, state, settings, want_jacobian=True)
        x1[mid], phi1[mid] = out.x, out.phi
        for k, v in enumerate(extras["jac"]):
            jac[k // 2, k % 2][mid] = v

    if scalar:
        return StepResult(PhasePoint(float(x1[0]), float(phi1[0])), jac[:, :, 0])
    return StepResult(PhasePoint(x1, phi1), jac)


def decompose(curve, point, settings=None):
    """Split one step into (shift F, angle G, defects P = F - 2 phi, Q = G - phi).

    On the circle F = 2 phi and G = phi exactly; the defects measure the
    deformation and vanish to first and second order in phi respectively.
    """
    res = step(curve, point, settings=settings)
    shift = res.next.x - point.x
    angle = res.next.phi
    return Decomposition(shift, angle, shift - 2.0 * point.phi, angle - point.phi)


def _winding(turns):
    nearest = round(turns)
    if abs(turns - nearest) < 1e-6:
        return int(nearest)
    return int(np.floor(turns))


def iterate(curve, point, n, settings=None):
    """n steps of the map; returns the orbit with chord-length total."""
    settings = settings or curve.settings
    if n < 0:
        raise ValueError("n must be nonnegative")
    x, phi = float(point.x), float(point.phi)
    if not np.isfinite(x) or not 0.0 <= phi <= np.pi:
        raise ValueError("phase point needs finite x and phi in [0, pi]")
    pts = [PhasePoint(x, phi)]
    if phi == 0.0 or phi == np.pi:
        shift = 0.0 if phi == 0.0 else curve.perimeter
        for j in range(1, n + 1):
            pts.append(PhasePoint(x + j * shift, phi))
        return Orbit(tuple(pts), 0.0, 0 if phi == 0.0 else n)
    state = _State(curve.theta_of_s(np.array([x])), np.array([x]), np.array([phi]))
    start_theta = float(state.theta[0])
    total = 0.0
    for _ in range(n):
        state, extras = _advance(curve, state, settings)
        total += float(extras["chord"][0])
        pts.append(PhasePoint(float(state.x[0]), float(state.phi[0])))
    turns = (float(state.theta[0]) - start_theta) / _TWO_PI
    return Orbit(tuple(pts), total, _winding(turns))


def lazutkin_residual(curve, point, x1=None, settings=None):
    """Quadrature residual of the adapted-coordinate chord identity.

    Integrates sin(phi - integral of kappa) between the footpoint and its
    image; vanishes when x1 really is the image of (x, phi) under the map.
    Passing an explicit x1 measures the sensitivity of the identity.
    """
    x, phi = float(point.x), float(point.phi)
    if x1 is None:
        x1 = step(curve, point, settings=settings).next.x
    half = 0.5 * (x1 - x)
    nodes = x + half * (_GL_NODES + 1.0)
    phase = phi - (curve.curvature_integral(nodes) - curve.curvature_integral(np.array([x]))[0])
    return float(half * np.dot(_GL_WEIGHTS, np.sin(phase)))
