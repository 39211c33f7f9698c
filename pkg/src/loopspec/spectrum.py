"""Length-spectrum bands near the small-angle end, and what they reveal.

For each winding-once bounce count q the critical values of the loop length
form the band [t_q, T_q].  On a circle every band is a point; on an ellipse
every band with q >= 3 collapses to numerical width while q = 2 stays wide;
a genuinely non-integrable deformation keeps bands of resolvable width whose
widths stay below the gaps to the neighboring bands.  The operations here
assemble bands, analyze gap monotonicity and separation, reassemble bounce
counts from an unlabeled length list, evaluate the minimal-action average,
and fit the large-q approach of T_q to the perimeter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PartitionAmbiguous
from .loops import _birkhoff_extrema, birkhoff_orbit, critical_points, loop_profile

_TWO_PI = 2.0 * np.pi

VERDICT_INTEGRABLE = "rationally-integrable-within-tol"
VERDICT_FLUCTUATES = "spectrum-fluctuates"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SpectrumBand:
    q: int
    lower: float                 # t_q, smallest critical value
    upper: float                 # T_q, largest critical value
    values: tuple                # distinct critical values, ascending
    degenerate: bool
    perimeter: float
    birkhoff_action: float | None = None

    @property
    def width(self):
        return self.upper - self.lower


@dataclass(frozen=True)
class SpectrumReport:
    bands: tuple
    gaps: tuple                  # T_{q+1} - T_q for consecutive q
    margins: tuple               # t_{q+1} - T_q for consecutive q
    monotone: bool               # gap sequence strictly decreasing
    separated: bool              # every margin positive
    verdict: str
    tol_width: float
    tol_mono: float


@dataclass(frozen=True)
class HeardBand:
    q: int
    values: tuple


@dataclass(frozen=True)
class MMFit:
    fitted_c1: float
    fitted_c2: float
    predicted_c1: float
    rel_error: float
    residual_order: float
    q_min: int
    q_max: int


def band(curve, q, nodes=None, settings=None, cross_check=True):
    """Critical values of the q-loop length, with the variational cross-check.

    The band maximum should agree with the action of the (1, q) maximizing
    orbit; a mismatch beyond 1e-8 of the perimeter is warned about, since it
    means the loop grid missed the global maximum.
    """
    settings = settings or curve.settings
    prof = loop_profile(curve, q, nodes=nodes, settings=settings)
    pts = critical_points(prof, settings=settings)
    if not pts:
        raise ValueError("no critical points resolved for q = %d" % q)
    values = sorted(p.value for p in pts)
    dedup = [values[0]]
    for v in values[1:]:
        if v - dedup[-1] > settings.dedup_value:
            dedup.append(v)
    degenerate = any(p.kind == "degenerate" for p in pts)
    action = None
    if cross_check:
        lo, hi = _birkhoff_extrema(curve, 1, q, settings)
        action = hi[1]
        if abs(action - dedup[-1]) > 1e-8 * curve.perimeter:
            warnings.warn(
                "band maximum %r for q = %d disagrees with the variational action %r"
                % (dedup[-1], q, action),
                stacklevel=2,
            )
        # where the shooting root is not unique a whole branch of the loop
        # function can hide from the base grid; the stationary extremes then
        # supply the band endpoints
        if action > dedup[-1] + settings.dedup_value:
            dedup.append(action)
        if lo[1] < dedup[0] - settings.dedup_value:
            dedup.insert(0, lo[1])
    out = SpectrumBand(
        q=q,
        lower=dedup[0],
        upper=dedup[-1],
        values=tuple(dedup),
        degenerate=degenerate,
        perimeter=curve.perimeter,
        birkhoff_action=action,
    )
    if not 0.0 < out.lower <= out.upper < q * curve.perimeter:
        raise ValueError("band for q = %d escapes (0, q * perimeter)" % q)
    return out


def gap_analysis(bands, tol_width=None, tol_mono=0.0):
    """Gap/margin sequences and verdicts for consecutive-q bands."""
    bands = tuple(sorted(bands, key=lambda b: b.q))
    if len(bands) < 2:
        raise ValueError("need at least two bands")
    qs = [b.q for b in bands]
    if qs != list(range(qs[0], qs[0] + len(qs))):
        raise ValueError("bands must cover consecutive q")
    gaps = tuple(b2.upper - b1.upper for b1, b2 in zip(bands, bands[1:]))
    margins = tuple(b2.lower - b1.upper for b1, b2 in zip(bands, bands[1:]))
    monotone = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    separated = all(m > 0.0 for m in margins)
    verdict, tol_width, tol_mono = _classify(bands, tol_width, tol_mono)
    return SpectrumReport(
        bands=bands,
        gaps=gaps,
        margins=margins,
        monotone=monotone,
        separated=separated,
        verdict=verdict,
        tol_width=tol_width,
        tol_mono=tol_mono,
    )


def _classify(bands, tol_width, tol_mono):
    ell = bands[0].perimeter
    if tol_width is None:
        tol_width = 1e-7 * ell
    wide = [b for b in bands if b.q >= 3 and b.width > tol_width]
    if not wide:
        return VERDICT_INTEGRABLE, tol_width, tol_mono
    by_q = {b.q: b for b in bands}
    for b in wide:
        nxt = by_q.get(b.q + 1)
        if nxt is None:
            continue
        margin = nxt.lower - b.upper
        if margin - b.width > tol_mono:
            return VERDICT_FLUCTUATES, tol_width, tol_mono
    return VERDICT_INCONCLUSIVE, tol_width, tol_mono


def classify_integrability(report, tol_width=None, tol_mono=0.0):
    """Reclassify a report's bands under explicit tolerances.

    A width beyond tol_width at some q >= 3 that still fits strictly inside
    the gap to the next band is the fluctuation pattern incompatible with
    rational integrability; widths all below tol_width look integrable at
    this resolution; anything else is inconclusive.
    """
    bands = report.bands if isinstance(report, SpectrumReport) else tuple(report)
    verdict, _, _ = _classify(tuple(sorted(bands, key=lambda b: b.q)), tol_width, tol_mono)
    return verdict


# ------------------------------------------------------------ hearing bounces


def _eta0(q):
    return 2.0 * (q + 1) * math.sin(math.pi / (q + 1)) - 2.0 * q * math.sin(math.pi / q)


def default_crossover():
    """Smallest q whose large-q threshold undercuts the small-q one."""
    q = 2
    while not (0.01 * (q + 1) ** -3 < _eta0(q) / 100.0):
        q += 1
    return q


def hear_bounces(lengths, perimeter, q0=None, settings=None):
    """Partition a sorted length list into per-bounce-count bands.

    Greedy accretion from the bottom: the current band, labeled q, closes
    when the gap to the next value reaches the applicable threshold
    (eta0 / 10 through the crossover q0, then (q + 2)^-3 / 10).  A gap
    within 10 percent of its threshold is refused as ambiguous.
    """
    values = [float(v) for v in lengths]
    if not values:
        raise ValueError("need at least one length")
    if any(not 0.0 < v < perimeter for v in values):
        raise ValueError("lengths must lie strictly between 0 and the perimeter")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("lengths must be sorted ascending")
    if q0 is None:
        q0 = default_crossover()
    eta0 = _eta0(q0)

    out = []
    q = 2
    current = [values[0]]
    for v in values[1:]:
        gap = v - current[-1]
        threshold = eta0 / 10.0 if q <= q0 else 0.1 * (q + 2) ** -3
        if abs(gap - threshold) <= 0.1 * threshold:
            raise PartitionAmbiguous(
                "gap %r within 10%% of the band threshold %r at q = %d" % (gap, threshold, q)
            )
        if gap >= threshold:
            out.append(HeardBand(q=q, values=tuple(current)))
            q += 1
            current = [v]
        else:
            current.append(v)
    out.append(HeardBand(q=q, values=tuple(current)))
    return out


# --------------------------------------------------------------- mather value


def mather(curve, p, q, settings=None):
    """Minus the maximal (p, q) polygon length per reflection.

    Strictly convex in p/q for a convex table; its values at rationals
    control the asymptotic band structure.
    """
    orbit = birkhoff_orbit(curve, p, q, settings=settings)
    return -orbit.action / q


# ------------------------------------------------------- perimeter asymptotics


def mm_fit(bands, curve):
    """Fit perimeter - T_q against q^-2 and q^-4 and compare the leading term.

    The leading coefficient should equal (1/24) (oint kappa^(2/3) ds)^3.
    Uses bands with q >= 10; requires coverage up to q >= 30 so the two
    fitted powers are well separated from the ignored q^-6 tail.
    """
    usable = sorted((b for b in bands if b.q >= 10), key=lambda b: b.q)
    if len(usable) < 8 or usable[-1].q < 30:
        raise ValueError("need bands for q >= 10 reaching q >= 30")
    qs = np.array([b.q for b in usable], dtype=float)
    y = np.array([b.perimeter - b.upper for b in usable])
    design = np.column_stack((qs ** -2.0, qs ** -4.0))
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    c1, c2 = float(coef[0]), float(coef[1])
    predicted = curve.kappa_two_thirds_total ** 3 / 24.0
    # a global fit leaves a residual that equioscillates over the whole q
    # range, hiding the order of the ignored tail; fitting each q-octave
    # separately restores it, since octave windows are self-similar and the
    # local residual RMS then scales like the leading dropped power
    bins = np.floor(np.log2(qs / qs[0]) * (1.0 - 1e-12)).astype(int)
    centers, levels = [], []
    for b in np.unique(bins):
        sel = bins == b
        if np.count_nonzero(sel) < 5:
            continue
        local, *_ = np.linalg.lstsq(design[sel], y[sel], rcond=None)
        rms = float(np.sqrt(np.mean((y[sel] - design[sel] @ local) ** 2)))
        if rms > 1e-15 * curve.perimeter:
            centers.append(np.mean(np.log(qs[sel])))
            levels.append(np.log(rms))
    if len(centers) >= 2:
        order = -float(np.polyfit(centers, levels, 1)[0])
    else:
        order = float("inf")
    return MMFit(
        fitted_c1=c1,
        fitted_c2=c2,
        predicted_c1=predicted,
        rel_error=abs(c1 - predicted) / predicted,
        residual_order=order,
        q_min=int(qs[0]),
        q_max=int(qs[-1]),
    )
