"""Spectrum of the quantum Rabi model from confluent Heun spectral conditions.

The numerical core (``heun``, ``rabi_map``, ``conditions``, ``solver``) needs
numpy and scipy; ``oracle`` is an independent Fock-basis diagonalization used
to check it. Figures and the CLI live in ``figures``, ``report`` and ``cli``.
"""

from .conditions import (
    classify,
    judd_condition,
    judd_eigenstates,
    new_state_condition_F,
    wronskian_form_w,
    wronskian_W,
)
from .heun import Center, HeunParams, evaluate, frobenius_series
from .rabi_map import RabiPoint, heun_params, wavefunction
from .solver import Condition, ScanConfig, avoided_crossing, energy_curves, scan_spectrum, trace_level_set

__version__ = "0.1.0"

__all__ = [
    "Center",
    "Condition",
    "HeunParams",
    "RabiPoint",
    "ScanConfig",
    "avoided_crossing",
    "classify",
    "energy_curves",
    "evaluate",
    "frobenius_series",
    "heun_params",
    "judd_condition",
    "judd_eigenstates",
    "new_state_condition_F",
    "scan_spectrum",
    "trace_level_set",
    "wavefunction",
    "wronskian_W",
    "wronskian_form_w",
]
