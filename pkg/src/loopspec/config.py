"""Domain config files: key = value lines describing one boundary curve.

Recognized keys:

    tau = <real>                     deformation size, default 0
    grid = <int>                     arc-length grid (power of two, >= 256)
    cos[k] = <real>                  cosine coefficient of mode k >= 0
    sin[k] = <real>                  sine coefficient of mode k >= 1
    ellipse_eccentricity = <real>    exact ellipse instead of a deformation

Blank lines and lines starting with # are ignored.  An ellipse domain may
not also carry Fourier coefficients.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .geometry import build_boundary
from .profiles import EllipseProfile, FourierProfile
from .settings import DEFAULT

_MODE_KEY = re.compile(r"^(cos|sin)\[(\d+)\]$")


@dataclass(frozen=True)
class DomainConfig:
    profile: object
    tau: float
    grid_size: int

    def build(self, settings=None):
        return build_boundary(
            self.profile, tau=self.tau, grid_size=self.grid_size, settings=settings or DEFAULT
        )


def parse_domain_config(path, settings=None):
    settings = settings or DEFAULT
    tau = None
    grid = settings.grid_size
    ecc = None
    cos = {}
    sin = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected 'key = value'" % (path, lineno))
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            try:
                if key == "tau":
                    tau = float(value)
                elif key == "grid":
                    grid = int(value)
                elif key == "ellipse_eccentricity":
                    ecc = float(value)
                else:
                    m = _MODE_KEY.match(key)
                    if not m:
                        raise ValueError("unknown key %r" % key)
                    mode = int(m.group(2))
                    if m.group(1) == "cos":
                        cos[mode] = float(value)
                    else:
                        if mode < 1:
                            raise ValueError("sin modes start at 1")
                        sin[mode] = float(value)
            except ValueError as exc:
                raise ValueError("%s:%d: %s" % (path, lineno, exc)) from None

    if ecc is not None and (cos or sin):
        raise ValueError("%s: ellipse domains take no Fourier coefficients" % path)
    if ecc is not None:
        profile = EllipseProfile(ecc)
        tau = 0.0 if tau is None else tau
    else:
        kmax = max(list(cos) + list(sin), default=0)
        a = [cos.get(k, 0.0) for k in range(kmax + 1)]
        b = [sin.get(k, 0.0) for k in range(1, kmax + 1)]
        profile = FourierProfile(cos=a, sin=b)
        if tau is None:
            tau = 1.0 if (cos or sin) else 0.0
    return DomainConfig(profile=profile, tau=tau, grid_size=grid)
