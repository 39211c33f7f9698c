"""Tolerance and resolution knobs, collected in one place.

Every solver in the package reads its tolerances from a Settings record so
that a single object threads through curve construction, stepping, shooting
and the variational solvers.  The defaults are tuned for curves within a few
percent of the unit circle; tightened copies (via dataclasses.replace) are
used where a downstream difference quotient would otherwise be noise-limited.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Settings:
    # boundary tables
    grid_size: int = 1024          # arc-length grid nodes, power of two, >= 256

    # chord solver (single reflection step)
    chord_tol: float = 1e-12       # Newton tolerance on the polar angle
    chord_max_iter: int = 200

    # loop shooting
    shoot_tol: float = 1e-10       # endpoint residual, relative to perimeter
    loop_nodes: int = 512          # default base-point grid for loop profiles
    circularity_guard: float = 0.2  # max |kappa - 1| accepted by loop machinery

    # critical points
    critical_tol: float = 1e-10    # |cos(return) - cos(launch)| at a refined point
    dedup_s: float = 1e-9          # spacing dedup, relative to perimeter
    dedup_value: float = 1e-9      # critical-value dedup, relative to perimeter
    degenerate_run: int = 3        # flat cells beyond which a run counts as degenerate

    # variational (Birkhoff) orbits
    birkhoff_tol: float = 1e-12    # max footpoint move, relative to perimeter
    birkhoff_max_sweeps: int = 100000

    # deformation cross-checks
    fd_step: float = 1e-4          # default tau step for difference quotients

    # oscillatory integrals
    osc_tol: float = 1e-9          # doubling agreement, relative to period * mean|a|
    osc_cap: int = 2 ** 20         # largest quadrature grid before giving up
    fit_residual_max: float = 0.1  # log10 RMS above which a power-law fit is rejected
    flat_tol: float = 1e-8         # total variation below which a phase is a plateau

    def tightened(self):
        """Copy with solver tolerances pushed near machine precision.

        Used by difference-quotient oracles where the default shooting
        residual would dominate the quantity being measured.
        """
        return replace(self, chord_tol=1e-13, shoot_tol=1e-12)


DEFAULT = Settings()
