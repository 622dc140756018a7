"""Nonclassicality certification functionals for one-mode phase-space distributions."""

from .analysis import (
    Certificate,
    MinResult,
    Region,
    Verdict,
    border_detector,
    build_border_family,
    certify_negativity,
    minimize_functional,
    scan_delta_t,
    weight_threshold,
)
from .functionals import FunctionalSpec, Kind, eval_bigs, eval_p, eval_xi, eval_xik
from .gausspoly import (
    Distribution,
    GaussPolyTerm,
    PhasePoint,
    build_fock_superposition,
    build_fock_wigner,
    build_gaussian,
    evaluate,
    integrate,
    mix,
    shift,
    smear,
)

__version__ = "0.1.0"
