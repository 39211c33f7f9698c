"""Command-line front end.

Every command reads one domain config, computes, and writes flat CSV/JSON
artifacts whose bytes depend only on the inputs.  Exit status: 0 on success,
1 for validation problems, 2 when a solver gives up, 3 when the invariant
suite reports failures.
"""

import argparse
import concurrent.futures
import dataclasses
import os
import sys

import numpy as np

from . import __version__
from .config import parse_domain_config
from .deform import melnikov
from .errors import LoopspecError, UnsupportedProfile
from .loops import loop_profile
from .osc import PeriodicFunction, decay_exponent, oscillatory_integral, sublevel_distribution
from .serialize import dump_json, write_csv, write_json
from .settings import DEFAULT
from .spectrum import band, gap_analysis, hear_bounces, mather, mm_fit
from .verify import run_suite


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    domain: str
    q: int | None
    qmax: int | None
    tau: float | None
    grid: int | None
    tol: float | None
    out: str
    workers: int
    lengths: str | None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


class _Usage(Exception):
    pass


def _build_parser():
    parser = _Parser(prog="loopspec", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("spectrum", "per-q length bands and the gap report"),
        ("loops", "loop angle/length/derivative tables"),
        ("melnikov", "first-order response of the loop lengths"),
        ("mather", "minimal-action values over rotation numbers"),
        ("mm-fit", "perimeter-defect power-law fit"),
        ("hear", "label a list of lengths with bounce counts"),
        ("osc", "oscillatory decay and sublevel tables for a loop phase"),
        ("verify", "run the invariant suite"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--domain", required=True, help="domain config file")
        cmd.add_argument("--q", type=int, default=None, help="single bounce count")
        cmd.add_argument("--qmax", type=int, default=None, help="largest bounce count")
        cmd.add_argument("--tau", type=float, default=None, help="override the config deformation size")
        cmd.add_argument("--grid", type=int, default=None, help="override the boundary grid size")
        cmd.add_argument("--tol", type=float, default=None, help="override the shooting tolerance")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--workers", type=int, default=1, help="parallel workers for per-q fans")
        if name == "hear":
            cmd.add_argument("--lengths", required=True, help="file with one length per line")
        else:
            cmd.set_defaults(lengths=None)
    return parser


def _run_config(ns):
    if ns.workers < 1:
        raise _Usage("--workers must be positive")
    for field in ("q", "qmax", "grid"):
        value = getattr(ns, field)
        if value is not None and value < 2:
            raise _Usage("--%s must be at least 2" % field)
    if ns.tol is not None and not 0.0 < ns.tol < 1.0:
        raise _Usage("--tol must be in (0, 1)")
    return RunConfig(
        command=ns.command,
        domain=ns.domain,
        q=ns.q,
        qmax=ns.qmax,
        tau=ns.tau,
        grid=ns.grid,
        tol=ns.tol,
        out=ns.out,
        workers=ns.workers,
        lengths=ns.lengths,
    )


def _settings(config):
    if config.tol is None:
        return DEFAULT
    return dataclasses.replace(DEFAULT, shoot_tol=config.tol)


def _domain(config, settings):
    domain = parse_domain_config(config.domain, settings)
    if config.tau is not None:
        if not 0.0 <= config.tau <= 1.0:
            raise _Usage("--tau must lie in [0, 1]")
        domain = dataclasses.replace(domain, tau=config.tau)
    if config.grid is not None:
        domain = dataclasses.replace(domain, grid_size=config.grid)
    return domain


def _fan(config, work, items):
    """Ordered map over items, optionally across processes."""
    if config.workers == 1 or len(items) <= 1:
        return [work(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(work, items))


class _BandTask:
    def __init__(self, curve, settings):
        self.curve = curve
        self.settings = settings

    def __call__(self, q):
        return band(self.curve, q, settings=self.settings)


class _LoopTask:
    def __init__(self, curve, settings):
        self.curve = curve
        self.settings = settings

    def __call__(self, q):
        return loop_profile(self.curve, q, settings=self.settings)


class _MatherTask:
    def __init__(self, curve, settings):
        self.curve = curve
        self.settings = settings

    def __call__(self, pq):
        return mather(self.curve, pq[0], pq[1], settings=self.settings)


def _band_record(b):
    return {
        "q": b.q,
        "lower": b.lower,
        "upper": b.upper,
        "width": b.width,
        "degenerate": b.degenerate,
        "values": list(b.values),
        "birkhoff_action": b.birkhoff_action,
    }


def _cmd_spectrum(config, settings, out):
    qmax = config.qmax or 12
    curve = _domain(config, settings).build(settings)
    bands = _fan(config, _BandTask(curve, settings), list(range(2, qmax + 1)))
    report = gap_analysis(bands)
    payload = {
        "perimeter": curve.perimeter,
        "bands": [_band_record(b) for b in report.bands],
        "gaps": list(report.gaps),
        "margins": list(report.margins),
        "monotone": report.monotone,
        "separated": report.separated,
        "verdict": report.verdict,
    }
    path = os.path.join(out, "spectrum.json")
    write_json(path, payload)
    print("wrote %s (q = 2..%d, verdict %s)" % (path, qmax, report.verdict))
    return 0


def _cmd_loops(config, settings, out):
    if config.q is not None:
        qs = [config.q]
    else:
        qs = list(range(2, (config.qmax or 5) + 1))
    curve = _domain(config, settings).build(settings)
    profiles = _fan(config, _LoopTask(curve, settings), qs)
    for prof in profiles:
        path = os.path.join(out, "loops_q%d.csv" % prof.q)
        prof.to_csv(path)
        print("wrote %s" % path)
    return 0


def _cmd_melnikov(config, settings, out):
    domain = _domain(config, settings)
    if not domain.profile.is_deformation:
        raise UnsupportedProfile("the melnikov command needs a deformation-family domain")
    q = config.q or 3
    prof = melnikov(domain.profile, domain.tau, q, settings=settings)
    path = os.path.join(out, "melnikov_q%d.csv" % q)
    prof.to_csv(path)
    print("wrote %s" % path)
    return 0


def _cmd_mather(config, settings, out):
    import math

    qmax = config.qmax or 12
    curve = _domain(config, settings).build(settings)
    pairs = [(p, q) for q in range(2, qmax + 1)
             for p in range(1, q // 2 + 1) if math.gcd(p, q) == 1]
    betas = _fan(config, _MatherTask(curve, settings), pairs)
    rows = [(p, q, p / q, beta) for (p, q), beta in zip(pairs, betas)]
    path = os.path.join(out, "mather.csv")
    write_csv(path, ("p", "q", "omega", "beta"), rows)
    print("wrote %s (%d rotation numbers)" % (path, len(rows)))
    return 0


def _cmd_mm_fit(config, settings, out):
    qmax = config.qmax or 40
    curve = _domain(config, settings).build(settings)
    bands = _fan(config, _BandTask(curve, settings), list(range(10, qmax + 1)))
    fit = mm_fit(bands, curve)
    payload = {
        "fitted_c1": fit.fitted_c1,
        "fitted_c2": fit.fitted_c2,
        "predicted_c1": fit.predicted_c1,
        "rel_error": fit.rel_error,
        "residual_order": fit.residual_order,
        "q_min": fit.q_min,
        "q_max": fit.q_max,
    }
    path = os.path.join(out, "mm_fit.json")
    write_json(path, payload)
    print("wrote %s (relative error %.3g)" % (path, fit.rel_error))
    return 0


def _cmd_hear(config, settings, out):
    curve = _domain(config, settings).build(settings)
    try:
        with open(config.lengths, "r", encoding="utf-8") as fh:
            lengths = [float(line) for line in fh if line.strip()]
    except OSError as exc:
        raise _Usage("cannot read %s: %s" % (config.lengths, exc))
    except ValueError as exc:
        raise _Usage("bad lengths file %s: %s" % (config.lengths, exc))
    heard = hear_bounces(np.array(lengths), curve.perimeter, settings=settings)
    payload = {"perimeter": curve.perimeter,
               "bands": [{"q": hb.q, "values": list(hb.values)} for hb in heard]}
    path = os.path.join(out, "hear.json")
    write_json(path, payload)
    print("wrote %s (%d groups)" % (path, len(heard)))
    return 0


def _cmd_osc(config, settings, out):
    q = config.q or 4
    curve = _domain(config, settings).build(settings)
    prof = loop_profile(curve, q, settings=settings)
    phase = PeriodicFunction.from_samples(prof.length - np.mean(prof.length),
                                          curve.perimeter)
    lam = np.geomspace(16.0, 4096.0, 201)
    values = [oscillatory_integral(phase, None, v, settings=settings) for v in lam]
    write_csv(os.path.join(out, "osc_decay.csv"), ("lam", "re", "im", "abs"),
              [(v, z.real, z.imag, abs(z)) for v, z in zip(lam, values)])
    lo, hi = float(np.min(phase.values)), float(np.max(phase.values))
    pad = max(hi - lo, 1e-12)
    t = np.linspace(lo - 0.05 * pad, hi + 0.05 * pad, 513)
    g0 = sublevel_distribution(phase, None, t)
    write_csv(os.path.join(out, "osc_sublevel.csv"), ("t", "g0"), zip(t, g0))
    fit = decay_exponent(phase, None, lam, settings=settings)

    def finite(v):
        return v if np.isfinite(v) else None

    payload = {
        "q": q,
        "exponent": finite(fit.exponent),
        "coefficient": finite(fit.coefficient),
        "constant": {"re": fit.constant.real, "im": fit.constant.imag},
        "residual": finite(fit.residual),
        "fast_decay": fit.fast_decay,
        "stalled": fit.stalled,
    }
    path = os.path.join(out, "osc_fit.json")
    write_json(path, payload)
    for name in ("osc_decay.csv", "osc_sublevel.csv", "osc_fit.json"):
        print("wrote %s" % os.path.join(out, name))
    return 0


def _cmd_verify(config, settings, out):
    domain = _domain(config, settings)
    results = run_suite(domain.profile, tau=domain.tau,
                        grid_size=domain.grid_size, settings=settings)
    failures = 0
    for r in results:
        if r.passed:
            print("ok   %s" % r.name)
        else:
            failures += 1
            print("FAIL %s: %s" % (r.name, r.detail))
    print("%d/%d checks passed" % (len(results) - failures, len(results)))
    return 0 if failures == 0 else 3


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "loops": _cmd_loops,
    "melnikov": _cmd_melnikov,
    "mather": _cmd_mather,
    "mm-fit": _cmd_mm_fit,
    "hear": _cmd_hear,
    "osc": _cmd_osc,
    "verify": _cmd_verify,
}


def _fail(kind, message, code):
    sys.stderr.write(dump_json({"kind": kind, "message": str(message)}))
    return code


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        config = _run_config(ns)
        settings = _settings(config)
        os.makedirs(config.out, exist_ok=True)
        return _COMMANDS[config.command](config, settings, config.out)
    except _Usage as exc:
        return _fail("validation", exc, 1)
    except (ValueError, UnsupportedProfile) as exc:
        return _fail("validation", exc, 1)
    except OSError as exc:
        return _fail("validation", exc, 1)
    except LoopspecError as exc:
        return _fail("solver", exc, 2)


if __name__ == "__main__":
    sys.exit(main())
