"""Bundled example data: five-subject exam marks and their symmetry model.

The rows in ``mathmarks.csv`` are a Gaussian surrogate with exactly the
published mean vector and covariance matrix of the 88-student data set.
Moment-based estimates (naive, composite) only see those two summaries
and are therefore reproduced exactly; resampling-based quantities such as
bootstrap standard errors depend on higher moments and are approximate.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .coloring import ColoringScheme, validate_coloring
from .covariance import SampleCovariance

__all__ = [
    "data_path",
    "load_math_marks",
    "math_scheme",
    "math_moments",
    "math_covariance",
]


def data_path(name: str):
    """Filesystem path of a bundled data file."""
    return resources.files("symggm") / "data" / name


def load_math_marks() -> np.ndarray:
    """88 x 5 array, columns ``me, ve, al, an, st``."""
    return np.loadtxt(data_path("mathmarks.csv"), delimiter=",", skiprows=1)


def math_scheme() -> ColoringScheme:
    """Vertex classes ``{me, st}``, ``{ve, an}``, ``{al}`` and four edge classes;
    the remaining four pairs are structural zeros."""
    return validate_coloring(json.loads(data_path("mathmarks_scheme.json").read_text()))


def math_moments() -> dict:
    """Published ``n``, mean vector and divisor-``n`` covariance."""
    return json.loads(data_path("mathmarks_moments.json").read_text())


def math_covariance(center: bool = True) -> SampleCovariance:
    """Second-moment matrix straight from the published summaries.

    With ``center=False`` this is the raw moment ``S + mu mu^T``.
    """
    mom = math_moments()
    S = np.array(mom["covariance"])
    if not center:
        mu = np.array(mom["mean"])
        S = S + np.outer(mu, mu)
    return SampleCovariance(S, n=mom["n"], centered=center)
