"""Helper functions for tests"""

import json
import math

import numpy as np

from groups import enumerate_ball
from models.group import GroupModel
from models.state import RadialCoefficients
from states import radial_closed_form


def ball(model: GroupModel, radius: int) -> list:
    """Returns B(radius) as a list"""
    return list(enumerate_ball(model, radius))


def random_unit_coefficients(size_S: int, support: int, seed: int) -> RadialCoefficients:
    """Random radial coefficients with the given support, normalized for |S|"""
    rng = np.random.default_rng(seed)
    lam = tuple(float(x) for x in rng.uniform(-1, 1, size=support + 1))
    return RadialCoefficients(lam).normalized(size_S)


def geometric_bound(size_S: int, t: float, k: int) -> float:
    """1/2 sqrt of sum_{g != e} exp(-2kt|g|) on a group with free sphere sizes"""
    q = size_S - 1
    x = q * math.exp(-2 * k * t)
    return 0.5 * math.sqrt(size_S * math.exp(-2 * k * t) / (1 - x))


def write_config(directory, config: dict, name: str = "experiment.json") -> str:
    """Writes a config into a temporary directory and returns its path"""
    path = directory / name
    path.write_text(json.dumps(config))
    return str(path)


def free_length_config(rank=2, t=1.0, **analysis) -> dict:
    """Config of a length state on a free group"""
    config = {
        "schema_version": 1,
        "group": {"kind": "free", "rank": rank},
        "state": {"kind": "length", "t": t},
    }
    if analysis:
        config["analysis"] = analysis
    return config


def extremal_unit_coefficients(size_S: int, support: int, length: int = 1) -> RadialCoefficients:
    """
    Unit radial coefficients maximizing phi on the sphere of the given
    length, from the generalized eigenproblem of the quadratic form
    lambda -> radial_closed_form(size_S, lambda, length) against the norm
    """
    n = support + 1
    basis = np.eye(n)

    def form(lam) -> float:
        return radial_closed_form(size_S, tuple(lam), length)

    diagonal = [form(basis[i]) for i in range(n)]
    matrix = np.diag(diagonal)
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = (form(basis[i] + basis[j]) - diagonal[i] - diagonal[j]) / 2
    spheres = np.array([1.0] + [size_S * (size_S - 1) ** (i - 1) for i in range(1, n)])
    scale = 1 / np.sqrt(spheres)
    _, vectors = np.linalg.eigh(scale[:, None] * matrix * scale[None, :])
    lam = scale * vectors[:, -1]
    return RadialCoefficients(tuple(float(x) for x in lam)).normalized(size_S)
