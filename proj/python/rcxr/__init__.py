"""Resonant contrast X-ray reflectometry: simulation and delta-layer extraction."""

import json
import os
from pathlib import Path

import numpy as np

from . import _rcxr
from .errors import RcxrError

__version__ = _rcxr.__version__

_BUNDLED_TABLES = Path(__file__).parent / "data" / "xsf" / "chantler"


def tables_dir(explicit=None):
    if explicit:
        return str(explicit)
    if os.environ.get("RCXR_TABLES_DIR"):
        return os.environ["RCXR_TABLES_DIR"]
    if _BUNDLED_TABLES.is_dir():
        return str(_BUNDLED_TABLES)
    return _rcxr.resolve_tables_dir("")


def delta_f(dopant, host, energy_ev, tables=None):
    return _rcxr.delta_f(dopant, host, float(energy_ev), tables_dir(tables))


def simulate(config, energy_ev, q, solver="dynamical", tables=None):
    text = config if isinstance(config, str) else json.dumps(config)
    return _rcxr.simulate(text, float(energy_ev), np.asarray(q, dtype=float), solver, tables_dir(tables))


def add_counting_noise(q, r, incident_counts, seed):
    return _rcxr.add_counting_noise(np.asarray(q, dtype=float), np.asarray(r, dtype=float),
                                    float(incident_counts), int(seed))


def analyze(q, r, energy_ev, window=(1.5, 5.0), cutoff_nm=None):
    return json.loads(_rcxr.analyze(np.asarray(q, dtype=float), np.asarray(r, dtype=float),
                                    float(energy_ev), tuple(window), cutoff_nm))


def diff_analyze(q, r_below, r_above, below_ev, above_ev, window=(1.5, 5.0), cutoff_nm=None):
    return json.loads(_rcxr.diff_analyze(np.asarray(q, dtype=float), np.asarray(r_below, dtype=float),
                                         np.asarray(r_above, dtype=float), float(below_ev), float(above_ev),
                                         tuple(window), cutoff_nm))


def run_cli(*args):
    if _BUNDLED_TABLES.is_dir():
        os.environ.setdefault("RCXR_TABLES_DIR", str(_BUNDLED_TABLES))
    return _rcxr.run_cli([str(a) for a in args])


__all__ = [
    "RcxrError",
    "add_counting_noise",
    "analyze",
    "delta_f",
    "diff_analyze",
    "run_cli",
    "simulate",
    "tables_dir",
]
