"""Bundled scenario configs for the four reference figures.

Each figure maps to a list of ``(name, config_dict)`` pairs; names become
sub-directories of the output directory.
"""
from __future__ import annotations

import copy

from .scenario import SCHEMA, parse_config


def _base(**overrides):
    cfg = {
        "schema": SCHEMA,
        "params": {"omega1": 0.2, "omega2": 0.1, "lambda1": 1.0, "lambda2": 0.01, "lam": None},
        "delta_override": 0.0,
        "frame": "transformed",
        "engine": "analytic",
        "seed": 0,
    }
    cfg.update(overrides)
    return cfg


def _figure1():
    out = []
    for chi in (0.001, 0.1):
        out.append((f"chi_{chi:g}", _base(
            label=f"figure1 chi={chi:g}",
            chi_over_lambda1=chi,
            initial_state={"kind": "coherent", "alpha1": 10 ** 0.5, "alpha2": 10 ** 0.5,
                           "phi": 0.0, "atom": "e"},
            grid={"t_max": 100.0, "n_points": 5001},
            observables=["inversion"],
            detectors=["revival"],
        )))
    return out


def _figure2():
    return [("fock_5_6", _base(
        label="figure2 |5,6;e> original frame",
        chi_over_lambda1=0.01,
        frame="original",
        engine="both",
        frame_map="leading_order",
        initial_state={"kind": "fock", "m1": 5, "m2": 6, "atom": "e"},
        grid={"t_max": 20.0, "n_points": 2001},
        observables=["inversion"],
    ))]


def _figure3():
    out = []
    for chi in (0.001, 0.01):
        out.append((f"chi_{chi:g}", _base(
            label=f"figure3 chi={chi:g}",
            params={"omega1": 0.2, "omega2": 0.1, "lambda1": 1.0, "lambda2": 0.1, "lam": None},
            chi_over_lambda1=chi,
            initial_state={"kind": "coherent", "alpha1": 10 ** 0.5, "alpha2": 10 ** 0.5,
                           "phi": 0.0, "atom": "plus"},
            grid={"t_max": 100.0, "n_points": 5001},
            observables=["linear_entropy"],
        )))
    return out


def _figure4():
    out = []
    for chi in (0.001, 0.01):
        out.append((f"chi_{chi:g}", _base(
            label=f"figure4 chi={chi:g}",
            params={"omega1": 0.2, "omega2": 0.1, "lambda1": 1.0, "lambda2": 0.1, "lam": None},
            chi_over_lambda1=chi,
            initial_state={"kind": "mixed_01", "gamma": 0.5},
            grid={"t_max": 50.0, "n_points": 5001},
            observables=["concurrence"],
            detectors=["sudden_death"],
        )))
    return out


_FIGURES = {1: _figure1, 2: _figure2, 3: _figure3, 4: _figure4}


def figure_configs(number: int):
    """Validated configs for figure ``number`` as ``[(name, ScenarioConfig), ...]``."""
    if number not in _FIGURES:
        raise KeyError(f"no preset for figure {number}")
    return [(name, parse_config(copy.deepcopy(obj))) for name, obj in _FIGURES[number]()]


def figure_dicts(number: int):
    return _FIGURES[number]()
