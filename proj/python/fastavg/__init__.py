"""Python front end of the fastavg C++ core.

Every function takes the experiment config as a dict, a JSON string or a path
to a JSON file, using the same schema as the command-line tool.
"""

import json
import os

from . import _core
from ._core import ConfigError, Error, HypothesisViolation

__all__ = [
    "ConfigError",
    "Error",
    "HypothesisViolation",
    "averaged",
    "eigenvalues",
    "fluctuation_covariance",
    "run",
    "simulate",
    "validate",
]


def _text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        with open(config, encoding="utf-8") as fh:
            return fh.read()
    return config


def run(kind, config, out_dir="", seed=None, threads=1):
    """Run one experiment. Returns (passed, check_lines)."""
    return _core.run(kind, _text(config), os.fspath(out_dir), seed, threads)


def eigenvalues(config):
    return _core.eigenvalues(_text(config))


def validate(config, fluctuate=False):
    """List of (hypothesis, holds, detail)."""
    return _core.validate(_text(config), fluctuate)


def averaged(config, t=0.0, v=0.0):
    """Averaged coefficients fhat, ghat, sigmahat and phi at (t, v)."""
    return _core.averaged(_text(config), t, v)


def fluctuation_covariance(config, t=1.0):
    return _core.fluctuation_covariance(_text(config), t)


def simulate(config, eps, replica=0):
    return _core.simulate(_text(config), eps, replica)
