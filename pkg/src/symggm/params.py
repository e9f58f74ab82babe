"""Class-level parameters for RCON and RCOR models and their matrix assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import ColoringScheme

__all__ = [
    "RconParams",
    "RcorParams",
    "assemble_concentration",
    "assemble_from_rcor",
    "disassemble_concentration",
    "off_diagonal",
    "partial_correlations",
]


def _as_vector(x) -> np.ndarray:
    arr = np.array(x, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RconParams:
    """Edge-class concentrations ``theta_E`` and vertex-class concentrations ``theta_V``."""

    theta_E: np.ndarray
    theta_V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "theta_E", _as_vector(self.theta_E))
        object.__setattr__(self, "theta_V", _as_vector(self.theta_V))
        if not np.all(np.isfinite(self.theta_E)) or not np.all(np.isfinite(self.theta_V)):
            raise ValueError("parameters must be finite")
        if np.any(self.theta_V <= 0):
            raise ValueError("vertex concentrations must be strictly positive")

    @property
    def sigma_V(self) -> np.ndarray:
        """Conditional variances, ``1 / theta_V``."""
        return 1.0 / self.theta_V

    @property
    def edge(self) -> np.ndarray:
        return self.theta_E

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.theta_E, self.theta_V])

    @classmethod
    def from_vector(cls, x, n_edge_classes: int) -> "RconParams":
        x = np.asarray(x, dtype=float)
        return cls(x[:n_edge_classes], x[n_edge_classes:])

    def to_dict(self) -> dict:
        return {"theta_E": self.theta_E.tolist(), "theta_V": self.theta_V.tolist()}


@dataclass(frozen=True, eq=False)
class RcorParams:
    """Edge-class partial correlations ``rho_E`` and vertex-class variances ``sigma_V``."""

    rho_E: np.ndarray
    sigma_V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho_E", _as_vector(self.rho_E))
        object.__setattr__(self, "sigma_V", _as_vector(self.sigma_V))
        if not np.all(np.isfinite(self.rho_E)) or not np.all(np.isfinite(self.sigma_V)):
            raise ValueError("parameters must be finite")
        if np.any(np.abs(self.rho_E) >= 1):
            raise ValueError("partial correlations must lie strictly inside (-1, 1)")
        if np.any(self.sigma_V <= 0):
            raise ValueError("vertex variances must be strictly positive")

    @property
    def theta_V(self) -> np.ndarray:
        return 1.0 / self.sigma_V

    @property
    def edge(self) -> np.ndarray:
        return self.rho_E

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.rho_E, self.sigma_V])

    @classmethod
    def from_vector(cls, x, n_edge_classes: int) -> "RcorParams":
        x = np.asarray(x, dtype=float)
        return cls(x[:n_edge_classes], x[n_edge_classes:])

    def to_dict(self) -> dict:
        return {"rho_E": self.rho_E.tolist(), "sigma_V": self.sigma_V.tolist()}


def _check_lengths(edge, vertex, scheme: ColoringScheme):
    if edge.shape[0] != scheme.n_edge_classes or vertex.shape[0] != scheme.n_vertex_classes:
        raise ValueError(
            f"parameter lengths ({edge.shape[0]}, {vertex.shape[0]}) do not match scheme "
            f"({scheme.n_edge_classes}, {scheme.n_vertex_classes})"
        )


def _edge_matrix(values: np.ndarray, scheme: ColoringScheme) -> np.ndarray:
    cls = scheme.edge_class_of
    padded = np.append(values, 0.0)  # index -1 picks the structural zero
    out = padded[cls]
    np.fill_diagonal(out, 0.0)
    return out


def assemble_concentration(params: RconParams, scheme: ColoringScheme) -> np.ndarray:
    """Place class concentrations into the full ``p x p`` matrix."""
    _check_lengths(params.theta_E, params.theta_V, scheme)
    theta = _edge_matrix(params.theta_E, scheme)
    theta[np.diag_indices(scheme.p)] = params.theta_V[scheme.vertex_class_of]
    return theta


def off_diagonal(theta: np.ndarray) -> np.ndarray:
    """Copy of ``theta`` with the diagonal set to zero."""
    out = np.array(theta, dtype=float)
    np.fill_diagonal(out, 0.0)
    return out


def assemble_from_rcor(params: RcorParams, scheme: ColoringScheme) -> np.ndarray:
    """Concentration matrix implied by partial correlations and conditional variances.

    ``theta_jj = 1 / sigma_j`` and ``theta_ij = -rho_ij / sqrt(sigma_i sigma_j)``.
    """
    _check_lengths(params.rho_E, params.sigma_V, scheme)
    sigma = params.sigma_V[scheme.vertex_class_of]
    d = 1.0 / np.sqrt(sigma)
    theta = -_edge_matrix(params.rho_E, scheme) * np.outer(d, d)
    theta[np.diag_indices(scheme.p)] = 1.0 / sigma
    return theta


def partial_correlations(theta: np.ndarray) -> np.ndarray:
    """``-theta_ij / sqrt(theta_ii theta_jj)`` with a zero diagonal."""
    d = 1.0 / np.sqrt(np.diag(theta))
    rho = -theta * np.outer(d, d)
    np.fill_diagonal(rho, 0.0)
    return rho


def disassemble_concentration(theta: np.ndarray, scheme: ColoringScheme) -> RconParams:
    """Class averages of a concentration matrix (inverse of :func:`assemble_concentration`
    on matrices that honour the coloring)."""
    diag = np.diag(theta)
    theta_V = np.array([diag[list(c)].mean() for c in scheme.vertex_classes])
    theta_E = np.array([np.mean([theta[i, j] for i, j in c]) for c in scheme.edge_classes])
    return RconParams(theta_E, theta_V)
