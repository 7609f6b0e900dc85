"""Auxiliary beam pair AoD/AoA estimation and its Monte Carlo experiments."""

import json

from ._core import (
    ConfigError,
    ContractError,
    DegenerateMeasurement,
    DomainError,
    TrainingError,
    angle_to_spatial_freq,
    beam_freqs,
    beam_gain,
    default_offset,
    estimate_single_path,
    exact_offset,
    experiments,
    invert_ratio,
    ratio_metric,
    run_experiment_csv,
    slope_k,
    spatial_freq_to_angle,
    steering_vector,
    train_ratio_codebook,
    uniform_codebook,
    wrap_phase,
)
from ._core import default_config as _default_config
from ._core import run_experiment as _run_experiment

__version__ = "0.1.0"


def default_config(kind):
    return json.loads(_default_config(kind))


def run_experiment(kind, config=None, **overrides):
    """Run one experiment and return its rows as dicts.

    `config` is a dict of descriptor keys; keyword overrides are merged on top.
    """
    desc = dict(config or {})
    desc.update(overrides)
    return _run_experiment(kind, json.dumps(desc) if desc else "")


def metric(rows, name, **where):
    for row in rows:
        if row["metric"] == name and all(row["point"].get(k) == str(v) for k, v in where.items()):
            return row["value"]
    raise KeyError(name)
