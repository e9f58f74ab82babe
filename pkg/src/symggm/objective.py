"""Negative composite log-likelihood of the node-wise conditional regressions.

Everything is evaluated from ``(C, n)``.  With ``sigma_j = 1 / theta_jj``
and ``theta~`` the off-diagonal part of the concentration matrix, the
``j``-th regression contributes

    n * [log sigma_j + C_jj / sigma_j + 2 (C theta~)_jj + sigma_j (theta~ C theta~)_jj]

and the objective is half the sum over ``j``.  In the RCOR parametrization
the same quantity reads ``n * [log sigma_j + ((I - rho~) M (I - rho~))_jj]``
with ``M = sigma^{-1/2} C sigma^{-1/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coloring import ColoringScheme
from .covariance import SampleCovariance
from .exceptions import NumericalError
from .params import RconParams, RcorParams, assemble_concentration, off_diagonal

__all__ = [
    "ObjectiveValue",
    "GradientVector",
    "neg_comp_loglik_rcon",
    "neg_comp_loglik_rcor",
    "neg_comp_loglik",
    "grad_rcon",
    "grad_rcor",
    "score_vector",
    "hessian_rcon",
    "numeric_hessian",
    "hessian",
]


@dataclass(frozen=True)
class ObjectiveValue:
    value: float
    per_node: np.ndarray


@dataclass(frozen=True)
class GradientVector:
    """Derivatives of the unpenalized objective with respect to class parameters.

    ``vertex_wrt`` names the vertex parametrization: ``"sigma"`` (conditional
    variances) or ``"theta"`` (concentrations).
    """

    edge: np.ndarray
    vertex: np.ndarray
    vertex_wrt: str = "sigma"

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.edge, self.vertex])


def _check(cov: SampleCovariance, scheme: ColoringScheme):
    if cov.p != scheme.p:
        raise ValueError(f"covariance is {cov.p}x{cov.p} but scheme has p={scheme.p}")


def neg_comp_loglik_rcon(
    params: RconParams, cov: SampleCovariance, scheme: ColoringScheme
) -> ObjectiveValue:
    _check(cov, scheme)
    theta = assemble_concentration(params, scheme)
    sigma = 1.0 / np.diag(theta)
    tt = off_diagonal(theta)
    C = cov.C
    W = C @ tt
    q = np.einsum("ij,ij->j", tt, W)
    per_node = cov.n * (np.log(sigma) + np.diag(C) / sigma + 2 * np.diag(W) + sigma * q)
    return ObjectiveValue(0.5 * per_node.sum(), per_node)


def _rcor_pieces(params: RcorParams, cov: SampleCovariance, scheme: ColoringScheme):
    sigma = params.sigma_V[scheme.vertex_class_of]
    d = 1.0 / np.sqrt(sigma)
    M = cov.C * np.outer(d, d)
    padded = np.append(params.rho_E, 0.0)
    rho = padded[scheme.edge_class_of]
    np.fill_diagonal(rho, 0.0)
    A = np.eye(scheme.p) - rho
    return sigma, M, rho, A


def neg_comp_loglik_rcor(
    params: RcorParams, cov: SampleCovariance, scheme: ColoringScheme
) -> ObjectiveValue:
    _check(cov, scheme)
    sigma, M, _, A = _rcor_pieces(params, cov, scheme)
    per_node = cov.n * (np.log(sigma) + np.einsum("ij,ij->j", A, M @ A))
    return ObjectiveValue(0.5 * per_node.sum(), per_node)


def neg_comp_loglik(params, cov: SampleCovariance, scheme: ColoringScheme) -> float:
    """Objective value for either parametrization."""
    if isinstance(params, RconParams):
        return neg_comp_loglik_rcon(params, cov, scheme).value
    return neg_comp_loglik_rcor(params, cov, scheme).value


def _vertex_sum(values: np.ndarray, scheme: ColoringScheme) -> np.ndarray:
    return np.bincount(scheme.vertex_class_of, weights=values, minlength=scheme.n_vertex_classes)


def grad_rcon(
    params: RconParams, cov: SampleCovariance, scheme: ColoringScheme, vertex: str = "sigma"
) -> GradientVector:
    """Gradient in ``(theta_E, sigma_V)`` or, with ``vertex="theta"``, ``(theta_E, theta_V)``.

    Edge component ``s``: ``n [tr(T_s C) + sum_j sigma_j (T_s C theta~)_jj]``.
    Vertex component ``m`` (sigma): ``n/2 sum_{j in V_m} (1/sigma_j - C_jj/sigma_j^2 + q_j)``
    with ``q_j = (theta~ C theta~)_jj``.
    """
    _check(cov, scheme)
    n, C = cov.n, cov.C
    theta = assemble_concentration(params, scheme)
    sigma = 1.0 / np.diag(theta)
    tt = off_diagonal(theta)
    W = C @ tt
    T = scheme.edge_generators
    edge = n * (np.einsum("sij,ij->s", T, C) + np.einsum("sij,ij,j->s", T, W, sigma))
    q = np.einsum("ij,ij->j", tt, W)
    node = 0.5 * n * (1.0 / sigma - np.diag(C) / sigma**2 + q)
    if vertex == "sigma":
        return GradientVector(edge, _vertex_sum(node, scheme), "sigma")
    if vertex == "theta":
        return GradientVector(edge, _vertex_sum(-node * sigma**2, scheme), "theta")
    raise ValueError(f"vertex must be 'sigma' or 'theta', got {vertex!r}")


def grad_rcor(params: RcorParams, cov: SampleCovariance, scheme: ColoringScheme) -> GradientVector:
    """Gradient in ``(rho_E, sigma_V)``.

    Edge component ``s``: ``-n tr(T_s M (I - rho~))``.
    Vertex component ``m``: ``n/2 sum_{j in V_m} (1 - (M (I - rho~)^2)_jj) / sigma_j``.
    """
    _check(cov, scheme)
    n = cov.n
    sigma, M, _, A = _rcor_pieces(params, cov, scheme)
    MA = M @ A
    edge = -n * np.einsum("sij,ij->s", scheme.edge_generators, MA)
    node = 0.5 * n * (1.0 - np.einsum("ij,ji->i", MA, A)) / sigma
    return GradientVector(edge, _vertex_sum(node, scheme), "sigma")


def score_vector(params, cov: SampleCovariance, scheme: ColoringScheme) -> np.ndarray:
    """Gradient in the inference parametrization: ``(theta_E, theta_V)`` for RCON,
    ``(rho_E, sigma_V)`` for RCOR."""
    if isinstance(params, RconParams):
        return grad_rcon(params, cov, scheme, vertex="theta").as_vector()
    return grad_rcor(params, cov, scheme).as_vector()


def hessian_rcon(params: RconParams, cov: SampleCovariance, scheme: ColoringScheme) -> np.ndarray:
    """Analytic Hessian of the RCON objective in ``(theta_E, theta_V)`` (sum scale)."""
    _check(cov, scheme)
    n, C = cov.n, cov.C
    l, k = scheme.n_edge_classes, scheme.n_vertex_classes
    theta = assemble_concentration(params, scheme)
    diag = np.diag(theta)
    sigma = 1.0 / diag
    tt = off_diagonal(theta)
    T = scheme.edge_generators
    CT = np.einsum("ij,sjk->sik", C, T)
    H = np.zeros((l + k, l + k))
    # (T_s C T_t)_jj = sum_i T_s[i, j] (C T_t)[i, j]
    H[:l, :l] = n * np.einsum("sij,tij,j->st", T, CT, sigma)
    TCtt = np.einsum("sij,ij->sj", T, C @ tt)
    node_ev = -n * TCtt * sigma**2
    H[:l, l:] = np.stack([np.bincount(scheme.vertex_class_of, weights=row, minlength=k)
                          for row in node_ev]) if l else np.zeros((0, k))
    H[l:, :l] = H[:l, l:].T
    q = np.einsum("ij,ij->j", tt, C @ tt)
    node_vv = 0.5 * n * (1.0 / diag**2 + 2.0 * q / diag**3)
    H[l:, l:] = np.diag(_vertex_sum(node_vv, scheme))
    return H


def numeric_hessian(grad: Callable[[np.ndarray], np.ndarray], x: np.ndarray, rel_step: float = 1e-5):
    """Central differences of a gradient function, symmetrized."""
    x = np.asarray(x, dtype=float)
    H = np.empty((x.size, x.size))
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1e-3)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        H[:, i] = (grad(xp) - grad(xm)) / (2 * h)
    return 0.5 * (H + H.T)


def hessian(params, cov: SampleCovariance, scheme: ColoringScheme) -> np.ndarray:
    """Hessian (sum scale) in the inference parametrization of :func:`score_vector`.

    RCON uses the analytic form; RCOR differentiates the analytic gradient numerically.
    """
    if isinstance(params, RconParams):
        H = hessian_rcon(params, cov, scheme)
    else:
        l = scheme.n_edge_classes

        def g(x):
            return grad_rcor(RcorParams.from_vector(x, l), cov, scheme).as_vector()

        H = numeric_hessian(g, params.as_vector())
    if not np.all(np.isfinite(H)):
        raise NumericalError("Hessian has non-finite entries")
    return H
