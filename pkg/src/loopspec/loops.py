"""Loops: q-reflection paths that return to their starting point.

For a base point s and a launch angle in (0, 3 pi / (2 q)), iterate the
billiard map q times; the final arc length x_q is strictly increasing in the
launch angle, so the angle that makes the path close up after winding once
(x_q = s + perimeter) is unique and can be found by bracketed shooting.
The loop length L_q(s), the return angle, and the exact derivative identity

    L_q'(s) = cos(return angle) - cos(launch angle)

are the raw material for the length-spectrum bands: interior reflections are
true reflections, so only the endpoint terms survive differentiation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .billiard import _State, _advance
from .errors import BracketFailure, NoConvergence, SolverFailure, WindowViolation
from .serialize import write_csv

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LoopProfile:
    """Loop data over a uniform base-point grid."""

    q: int
    s: np.ndarray
    launch_angle: np.ndarray
    length: np.ndarray
    return_angle: np.ndarray
    derivative: np.ndarray       # cos(return) - cos(launch), the exact L_q'
    residual: float              # worst endpoint miss, absolute arc length
    curve: object = field(repr=False)

    def to_csv(self, path):
        write_csv(
            path,
            ("s", "phi_q", "L_q", "theta_tilde_q", "D"),
            zip(self.s, self.launch_angle, self.length, self.return_angle, self.derivative),
        )


@dataclass(frozen=True)
class CriticalPoint:
    s: float
    value: float
    kind: str                    # "minimum" | "maximum" | "degenerate"


@dataclass(frozen=True)
class BirkhoffOrbit:
    p: int
    q: int
    footpoints: np.ndarray
    action: float
    converged: bool
    reflection_residual: float


def _guard_circularity(curve, settings):
    flat = max(curve.kappa_max - 1.0, 1.0 - curve.kappa_min)
    if not curve.is_convex or flat >= settings.circularity_guard:
        raise BracketFailure(
            "curve is outside the nearly circular regime (max |kappa - 1| = %g, guard %g)"
            % (flat, settings.circularity_guard)
        )


def _propagate(curve, th0, x0, alpha, q, settings, with_jac=False, record=False):
    """q billiard steps from launch angles alpha.

    with_jac accumulates d x_q / d alpha through the chain of step
    Jacobians applied to the initial variation (0, 1).  record keeps the
    per-reflection footpoints, angles and chord lengths.
    """
    state = _State(th0.copy(), x0.copy(), np.asarray(alpha, dtype=float).copy())
    vx = np.zeros_like(state.x)
    vp = np.ones_like(state.x)
    length = np.zeros_like(state.x)
    rec = {"theta": [state.theta.copy()], "x": [state.x.copy()], "phi": [state.phi.copy()]} if record else None
    for _ in range(q):
        state, extras = _advance(curve, state, settings, want_jacobian=with_jac)
        length += extras["chord"]
        if with_jac:
            a, b, c, d = extras["jac"]
            vx, vp = a * vx + b * vp, c * vx + d * vp
        if record:
            rec["theta"].append(state.theta.copy())
            rec["x"].append(state.x.copy())
            rec["phi"].append(state.phi.copy())
    return state, vx, length, rec


def _shoot(curve, q, s, offset, settings, seed=None, partial=False):
    """Launch angles making x_q land on s + offset, elementwise.

    Bracketed on (1e-8, 3 pi / (2 q)); both endpoint residuals are checked
    before any iteration, a few bisections localize the root, and a
    bracket-confined Newton using the accumulated Jacobian finishes.  With a
    good seed the bisection stage is skipped unless Newton leaves the seed's
    neighborhood.  partial caps the iteration budget and returns a per-node
    success mask as a fourth item instead of raising, so callers probing
    near shooting folds can drop just the sick nodes.
    """
    s = np.asarray(s, dtype=float)
    th0 = curve.theta_of_s(s)
    target = s + offset
    tol = settings.shoot_tol * curve.perimeter
    lo = np.full(s.shape, 1e-8)
    hi = np.full(s.shape, 1.5 * np.pi / q)

    if seed is None:
        out, _, _, _ = _propagate(curve, th0, s, hi, q, settings)
        r_hi = out.x - target
        # near the circle the standard upper end always overshoots; on
        # stronger deformations the needed angle can exceed it, so widen
        # short nodes geometrically up to a hard cap below the tangent angle
        cap = np.pi - 1e-3
        for _ in range(30):
            short = r_hi < 0.0
            if not np.any(short):
                break
            grown = np.minimum(np.where(short, 1.3 * hi, hi), cap)
            if np.all(grown[short] <= hi[short] + 1e-15):
                break
            hi = grown
            out, _, _, _ = _propagate(curve, th0, s, hi, q, settings)
            r_hi = out.x - target
        if np.any(r_hi < 0.0):
            raise BracketFailure(
                "x_q at the upper launch angle falls short of the target by %g; "
                "curve is outside the nearly circular regime" % float(np.min(r_hi))
            )
        # probe the low side at an angle where the chord solver is well
        # conditioned; x_q is increasing in the launch angle, so a shortfall
        # here certifies the same sign all the way down to the bracket end
        cheap = np.minimum(1e-4, 0.5 * hi)
        out, _, _, _ = _propagate(curve, th0, s, cheap, q, settings)
        r_lo = out.x - target
        if np.any(r_lo > 0.0):
            raise BracketFailure("x_q at the lower launch angle already passes the target")
        alpha = np.full(s.shape, np.pi / q)   # exact on the circle, close nearby
    else:
        seed = np.broadcast_to(np.asarray(seed, dtype=float), s.shape)
        # the standard upper end can sit below the root on stronger
        # deformations; the seed knows the branch, so give it headroom
        hi = np.maximum(hi, np.minimum(1.6 * seed, np.pi - 1e-3))
        alpha = np.clip(seed, lo + 1e-12, hi - 1e-12)

    last = None
    for _ in range(15 if partial else 60):
        out, dx, length, _ = _propagate(curve, th0, s, alpha, q, settings, with_jac=True)
        r = out.x - target
        good = np.abs(r) <= tol
        if np.all(good):
            if partial:
                return alpha, out, length, good
            return alpha, out, length
        pos = r > 0.0
        hi = np.where(pos, alpha, hi)
        lo = np.where(pos, lo, alpha)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = alpha - r / dx
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        alpha = np.where(good, alpha, np.where(bad, 0.5 * (lo + hi), cand))
        if last is not None and np.max(np.abs(r)) >= last and np.max(hi - lo) < 1e-15:
            break
        last = np.max(np.abs(r))
    if partial:
        out, _, length, _ = _propagate(curve, th0, s, alpha, q, settings)
        return alpha, out, length, np.abs(out.x - target) <= tol
    raise SolverFailure("loop shooting stalled at residual %g (tolerance %g)" % (float(last), tol))


def passage_angle(curve, q, s, s_prime, settings=None):
    """Launch angle whose q-step path goes from s to s_prime winding once.

    The endpoints must be within 1/100 of the perimeter of each other; for
    s_prime == s this is the loop angle at s.
    """
    settings = settings or curve.settings
    if q < 2:
        raise ValueError("q must be at least 2")
    _guard_circularity(curve, settings)
    ell = curve.perimeter
    d = (float(s_prime) - float(s) + 0.5 * ell) % ell - 0.5 * ell
    if abs(d) >= ell / 100.0:
        raise WindowViolation("endpoints are %g apart; window is %g" % (abs(d), ell / 100.0))
    alpha, _, _ = _shoot(curve, q, np.array([float(s)]), d + ell, settings)
    return float(alpha[0])


def loop_profile(curve, q, nodes=None, settings=None):
    """Loop angle, length, return angle and exact derivative on a base grid."""
    settings = settings or curve.settings
    if q < 2:
        raise ValueError("q must be at least 2")
    nodes = nodes or settings.loop_nodes
    if nodes < 64:
        raise ValueError("need at least 64 base points")
    ell = curve.perimeter
    s = ell * np.arange(nodes) / nodes
    alpha, out, length = _shoot(curve, q, s, ell, settings)
    residual = float(np.max(np.abs(out.x - s - ell)))
    ret = out.phi
    prof = LoopProfile(
        q=q,
        s=s,
        launch_angle=alpha,
        length=length,
        return_angle=ret,
        derivative=np.cos(ret) - np.cos(alpha),
        residual=residual,
        curve=curve,
    )
    for arr in (prof.s, prof.launch_angle, prof.length, prof.return_angle, prof.derivative):
        arr.setflags(write=False)
    return prof


def _loop_at(curve, q, s, settings, seed=None):
    """Scalar loop solve; returns (derivative, length, launch angle)."""
    alpha, out, length = _shoot(
        curve, q, np.array([float(s)]), curve.perimeter, settings,
        seed=None if seed is None else np.array([seed]),
    )
    d = float(np.cos(out.phi[0]) - np.cos(alpha[0]))
    return d, float(length[0]), float(alpha[0])


def _refine_sign_changes(curve, q, sa, sb, alpha0, settings):
    """Polish all grid sign changes of the loop derivative at once.

    A guarded falsi step alternating with bisection refines every bracket
    per vectorized shot; an element finishes when |L_q'| drops below the
    critical tolerance.  Where the shooting root is not unique the followed
    branch can switch inside a cell, making the sampled derivative jump
    across zero with no critical point there; such brackets collapse
    without meeting the tolerance and come back not-ok.
    """
    ell = curve.perimeter
    tol = settings.critical_tol
    # no loop length has a second derivative anywhere near this; endpoint
    # derivatives exceeding it times the width certify a jump, not a root
    mcap = 100.0 * q ** 3 / ell ** 2

    def dval(sx, seed):
        alpha, out, length, good = _shoot(
            curve, q, sx % ell, ell, settings, seed=seed, partial=True
        )
        return np.cos(out.phi) - np.cos(alpha), alpha, length, good

    da, alpha, _, ga = dval(sa, alpha0)
    db, alpha, _, gb = dval(sb, alpha)
    ok = (da * db < 0.0) & ga & gb
    roots = 0.5 * (sa + sb)
    values = np.zeros_like(sa)
    active = ok.copy()
    bisect = False
    for _ in range(90):
        if not np.any(active):
            break
        width = sb - sa
        if bisect:
            sm = sa + 0.5 * width
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                sm = sa + width * da / (da - db)
            sm = np.where(np.isfinite(sm), sm, sa + 0.5 * width)
            sm = np.clip(sm, sa + 0.01 * width, sb - 0.01 * width)
        bisect = not bisect
        dm, alpha, length, gm = dval(np.where(active, sm, roots), alpha)
        fail = active & ~gm
        ok &= ~fail
        active &= ~fail
        hit = active & (np.abs(dm) <= tol)
        roots = np.where(hit, sm, roots)
        values = np.where(hit, length, values)
        active &= ~hit
        to_left = active & (dm * da < 0.0)
        sb = np.where(to_left, sm, sb)
        db = np.where(to_left, dm, db)
        to_right = active & (dm * da >= 0.0)
        sa = np.where(to_right, sm, sa)
        da = np.where(to_right, dm, da)
        dead = active & (
            ((sb - sa) <= 1e-13 * ell)
            | (np.minimum(np.abs(da), np.abs(db)) > mcap * (sb - sa))
        )
        ok &= ~dead
        active &= ~dead
    ok &= ~active
    return roots, values, ok


def critical_points(profile, settings=None):
    """Critical points of the loop length, refined until |L_q'| <= tolerance.

    Sign changes of the exact derivative between grid nodes are polished by
    root bracketing; runs of below-tolerance derivative longer than a few
    grid cells are reported as single degenerate points (the whole grid flat
    collapses to one).  Points closer than the dedup spacing merge.
    """
    curve = profile.curve
    settings = settings or curve.settings
    q = profile.q
    ell = curve.perimeter
    s = profile.s
    d = profile.derivative
    n = s.size
    h = ell / n
    tol = settings.critical_tol
    flat = np.abs(d) < tol

    if np.all(flat):
        return [CriticalPoint(s=0.0, value=float(np.mean(profile.length)), kind="degenerate")]

    points = []

    # degenerate runs: circular runs of flat cells longer than the threshold
    idx = np.flatnonzero(flat)
    if idx.size:
        breaks = np.flatnonzero(np.diff(idx) > 1)
        runs = np.split(idx, breaks + 1)
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n - 1:
            runs[0] = np.concatenate((runs[-1] - n, runs[0]))
            runs.pop()
        for run in runs:
            if run.size > settings.degenerate_run:
                center = float(np.mean(run)) * h % ell
                value = float(np.mean(profile.length[run % n]))
                points.append(CriticalPoint(s=center, value=value, kind="degenerate"))

    # sign changes between consecutive non-flat nodes (short flat gaps allowed)
    live = np.flatnonzero(~flat)
    brackets = []
    for a_pos in range(live.size):
        i = live[a_pos]
        j = live[(a_pos + 1) % live.size]
        gap = (j - i) % n
        if gap == 0 or gap > settings.degenerate_run + 1:
            continue
        if d[i] * d[j] >= 0.0:
            continue
        brackets.append((i, s[i], s[i] + gap * h))
    if brackets:
        idx = np.array([b[0] for b in brackets])
        roots, values, ok = _refine_sign_changes(
            curve,
            q,
            np.array([b[1] for b in brackets]),
            np.array([b[2] for b in brackets]),
            np.asarray(profile.launch_angle)[idx],
            settings,
        )
        for k in np.flatnonzero(ok):
            kind = "maximum" if d[idx[k]] > 0.0 else "minimum"
            points.append(
                CriticalPoint(s=float(roots[k]) % ell, value=float(values[k]), kind=kind)
            )

    if not points:
        warnings.warn(
            "no critical points resolved at %d nodes; grid too coarse for q = %d" % (n, q),
            stacklevel=2,
        )
        return []

    points.sort(key=lambda p: p.s)
    merged = [points[0]]
    eps = settings.dedup_s * ell
    for p in points[1:]:
        if abs(p.s - merged[-1].s) <= eps:
            continue
        merged.append(p)
    if len(merged) > 1 and (merged[0].s + ell - merged[-1].s) <= eps:
        merged.pop()
    return merged


# ---------------------------------------------------------------- variational


def _polygon_data(curve, x):
    q = x.size
    bp = curve.evaluate(x)
    pts, tan, nor = bp.point, bp.tangent, bp.normal
    nxt = np.roll(pts, -1, axis=0)
    chord = nxt - pts
    lseg = np.hypot(chord[:, 0], chord[:, 1])
    u = chord / lseg[:, None]
    # angles of the outgoing chord at each vertex and of the incoming chord
    cos_out = np.einsum("ij,ij->i", u, tan)
    sin_out = -np.einsum("ij,ij->i", u, nor)
    uin = np.roll(u, 1, axis=0)
    lin = np.roll(lseg, 1)
    cos_in = np.einsum("ij,ij->i", uin, tan)
    sin_in = np.einsum("ij,ij->i", uin, nor)
    grad = cos_in - cos_out
    kap = bp.kappa
    hdiag = -kap * (sin_in + sin_out) + sin_in ** 2 / lin + sin_out ** 2 / lseg
    hoff = sin_out * np.roll(sin_in, -1) / lseg      # couples j with j+1
    return lseg, grad, hdiag, hoff, sin_out, sin_in


def _orbit_from_seed(curve, x, settings):
    """Drive one footpoint configuration to stationarity; (x, action, gmax)."""
    ell = curve.perimeter
    gtol = 1e-12
    sweeps = 0
    # damped simultaneous coordinate ascent; this only needs to reach the
    # Newton basin, so the sweep count stays small instead of paying the
    # O(q^2) relaxation tail of driving moves all the way to tolerance
    for _ in range(min(50, settings.birkhoff_max_sweeps)):
        lseg, grad, hdiag, _, _, _ = _polygon_data(curve, x)
        delta = np.where(hdiag < 0.0, -grad / np.where(hdiag < 0.0, hdiag, -1.0), 0.1 * grad)
        cap = 0.4 * np.minimum(lseg, np.roll(lseg, 1))
        delta = 0.5 * np.clip(delta, -cap, cap)
        x = x + delta
        sweeps += 1
        if np.max(np.abs(delta)) <= 1e-7 * ell:
            break

    # damped Newton on the cyclic tridiagonal Hessian; stationarity is judged
    # by the gradient alone, since for orbits sitting inside a degenerate
    # family any step has a harmless neutral component along the family
    q = len(x)
    for _ in range(80):
        lseg, grad, hdiag, hoff, _, _ = _polygon_data(curve, x)
        gmax = float(np.max(np.abs(grad)))
        if gmax <= gtol:
            break
        # each chord couples its two endpoints; accumulation matters for q = 2,
        # where both chords join the same pair of footpoints
        hess = np.diag(hdiag)
        i0 = np.arange(q)
        i1 = (i0 + 1) % q
        np.add.at(hess, (i0, i1), hoff)
        np.add.at(hess, (i1, i0), hoff)
        delta = None
        for damp in (0.0, 1e-10, 1e-6, 1e-3, 1e-1):
            try:
                cand = np.linalg.solve(hess - damp * np.eye(q), -grad)
            except np.linalg.LinAlgError:
                continue
            if np.all(np.abs(cand) < 0.5 * np.min(lseg)):
                delta = cand
                break
        if delta is None:
            delta, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
        x = x + delta
        sweeps += 1
        if sweeps > settings.birkhoff_max_sweeps:
            raise NoConvergence("Newton polish exhausted the sweep budget")
    lseg, grad, _, _, _, _ = _polygon_data(curve, x)
    return x, float(np.sum(lseg)), float(np.max(np.abs(grad)))


def _birkhoff_extrema(curve, p, q, settings):
    """Least and greatest stationary (p, q) actions from a rotated multi-start.

    A resonant perturbation splits the rotation-invariant orbit family into
    distinct stationary orbits, so seeds offset along the family direction
    are each driven to stationarity and the converged set is scanned for
    both extremes.  Configurations that leave the ordered winding-p class
    (a footpoint overtaking its neighbour) are discarded.
    """
    ell = curve.perimeter
    results = []
    failure = None
    for j in range(6):
        xi = (p * np.arange(q) + j / 6.0) / q
        try:
            x, action, gmax = _orbit_from_seed(curve, curve.lazutkin_inverse(xi), settings)
        except NoConvergence as exc:
            failure = exc
            continue
        if gmax > 1e-9:
            continue
        gaps = np.append(np.diff(x), x[0] + p * ell - x[-1])
        if np.any(gaps <= 0.0) or np.any(gaps >= ell):
            continue
        results.append((x, action, gmax))
    if not results:
        raise NoConvergence(
            "no seed reached stationarity" if failure is None else str(failure)
        )
    lo = min(results, key=lambda r: r[1])
    hi = max(results, key=lambda r: r[1])
    return lo, hi


def birkhoff_orbit(curve, p, q, mode="maximize", settings=None):
    """Periodic orbit with q reflections winding p times, by action ascent.

    Footpoints are seeded equispaced in the adapted circle coordinate, then
    moved by cyclic coordinate ascent; a damped Newton step on the full
    cyclic tridiagonal Hessian finishes to the gradient tolerance.  Of the
    stationary orbits reached from the rotated seeds, mode selects the one
    with the greatest or least action.
    """
    settings = settings or curve.settings
    if mode not in ("maximize", "minimize"):
        raise ValueError("mode must be 'maximize' or 'minimize'")
    p, q = int(p), int(q)
    if q < 2 or p < 1 or 2 * p > q:
        raise ValueError("need 1 <= p <= q/2")
    d = math.gcd(p, q)
    if d > 1:
        # a non-primitive rotation number traces the primitive orbit d times
        prim = birkhoff_orbit(curve, p // d, q // d, mode=mode, settings=settings)
        return BirkhoffOrbit(
            p=p,
            q=q,
            footpoints=np.tile(prim.footpoints, d),
            action=d * prim.action,
            converged=prim.converged,
            reflection_residual=prim.reflection_residual,
        )
    ell = curve.perimeter
    lo, hi = _birkhoff_extrema(curve, p, q, settings)
    x, action, gmax = hi if mode == "maximize" else lo
    return BirkhoffOrbit(
        p=p,
        q=q,
        footpoints=x % ell,
        action=action,
        converged=True,
        reflection_residual=gmax,
    )
