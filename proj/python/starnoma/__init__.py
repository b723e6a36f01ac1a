"""Outage, ergodic-rate and throughput analysis of STAR-RIS assisted NOMA.

SNR arguments are linear; use db_to_linear for decibels.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"


def curve(f, cfg, rho_db, *args):
    """Evaluate f(cfg, rho, *args) over a list of SNRs in dB, returning floats."""
    return [float(f(cfg, db_to_linear(r), *args)) for r in rho_db]  # noqa: F405
