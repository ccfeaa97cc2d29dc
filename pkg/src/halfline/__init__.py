"""Numerical laboratory for u_t = (u^m)_xx + a(x) u^p with reaction on a half-line.

Subpackages:
  core       problem setup types (supports, data, grids, fields)
  pde        explicit time stepping, blow-up detection, energy
  profiles   self-similar profile ODEs, shooting, closed forms
  phaseplane trajectory classification for the profile dynamical system
  rates      grow-up / blow-up rate fits, blow-up sets, doubling diagnostic
  experiments presets that reproduce the classification results
  cli        command-line front end
"""

from .core import (
    CompactBump,
    Custom,
    DomainPolicy,
    Field,
    Grid,
    LogCorrectedTail,
    PowerTail,
    ProblemSpec,
    ReactionSupport,
    SolverTolerances,
    Uniform,
    make_initial_datum,
    reaction_coefficient,
)
from .pde import Regime, Trace, detect_regime, energy, estimate_blowup_time, run, step

__version__ = "0.1.0"
