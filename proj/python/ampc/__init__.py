"""Adaptive multi-fidelity polynomial chaos MCMC.

Thin Python layer over the C++ core. Configs and priors are plain dicts or
lists in the same JSON layout the ``ampc`` command-line tool reads.
"""

import json as _json

import numpy as _np

from ._core import (
    AmpcError,
    CapacityError,
    DegeneracyError,
    InputError,
    ModelError,
    NumericalError,
    SupportError,
    Surrogate,
    cardinality,
    effective_sample_size,
    grid_divergences,
    hermite,
    legendre,
    linear_gaussian_posterior,
    total_degree_indices,
)
from . import _core

__all__ = [
    "AmpcError", "CapacityError", "DegeneracyError", "InputError", "ModelError", "NumericalError",
    "SupportError", "Surrogate", "build_surrogate", "cardinality", "compare", "diagnose",
    "effective_sample_size", "fit_surrogate", "generate_data", "grid_divergences", "hermite", "legendre",
    "linear_gaussian_posterior", "run", "sample", "total_degree_indices", "validate_config",
]


def _model_arg(model):
    # Dict model specs go through the config parser; callables are called with a 1-D array.
    return _json.dumps(model) if isinstance(model, dict) else model


def fit_surrogate(model, prior, order, seed=0, n_outputs=0):
    """Prior-based PC surrogate of ``model`` (dict spec or callable z -> outputs)."""
    return _core.fit_surrogate(_model_arg(model), _json.dumps(prior), order, seed, n_outputs)


def sample(model, prior, data, sigma, method="ampc", steps=0.05, start=None, n_steps=50000, seed=0, **options):
    """Run direct, prior_pc or ampc sampling with known noise level ``sigma``.

    Extra keyword options: N, N_C, epsilon, epsilon0, R, rho, m, I_max.
    Returns a dict with states, log_posterior, accepted, acceptance_rate,
    ledger, refinement_events and the chain CSV text.
    """
    data = _np.atleast_1d(_np.asarray(data, dtype=float))
    steps = _np.atleast_1d(_np.asarray(steps, dtype=float))
    if start is None:
        raise ValueError("start is required")
    start = _np.atleast_1d(_np.asarray(start, dtype=float))
    out = _core.sample(_model_arg(model), _json.dumps(prior), data, sigma, method, steps, start, n_steps, seed,
                       options)
    out["ledger"] = _json.loads(out["ledger"])
    out["refinement_events"] = _json.loads(out["refinement_events"])
    out["accepted"] = _np.asarray(out["accepted"], dtype=bool)
    return out


def validate_config(config):
    """Return the fully resolved config, or raise InputError."""
    return _json.loads(_core._validate_config(_json.dumps(config)))


def generate_data(config):
    return _json.loads(_core._generate_data(_json.dumps(config)))


def build_surrogate(config):
    return _json.loads(_core._build_surrogate(_json.dumps(config)))


def run(config):
    return _json.loads(_core._run(_json.dumps(config)))


def diagnose(config):
    return _json.loads(_core._diagnose(_json.dumps(config)))


def compare(configs, output_dir, grid_nodes=41):
    return _json.loads(_core._compare([_json.dumps(c) for c in configs], output_dir, grid_nodes))
