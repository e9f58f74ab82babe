"""Sandwich standard errors for composite-likelihood estimates.

The sensitivity matrix ``H`` is the Hessian of ``l_c / n`` and the
variability matrix ``V`` the per-observation covariance of the score.
``V`` is estimated by resampling rows: every bootstrap sample only needs
its own second-moment matrix, because the score is a function of ``(C, n)``.
With a SCAD penalty the asymptotic covariance picks up the curvature
``Sigma1 = diag(p''(|theta|))`` and a bias ``b1 = p'(|theta|) sign(theta)``.

Parameters are ``(theta_E, theta_V)`` for RCON and ``(rho_E, sigma_V)``
for RCOR; only the active set (nonzero edge classes plus every vertex
class) enters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ._parallel import parallel_map, replicate_rng
from .coloring import ColoringScheme
from .covariance import SampleCovariance, sample_covariance
from .exceptions import DataError, NumericalError
from .objective import hessian, score_vector
from .params import RconParams, RcorParams, off_diagonal, assemble_concentration
from .penalty import PenaltySpec, scad_derivative, scad_second_derivative

__all__ = [
    "InferenceReport",
    "active_indices",
    "parameter_names",
    "hessian_zz",
    "bootstrap_scores",
    "bootstrap_variability",
    "per_observation_scores",
    "godambe_covariance",
    "penalty_corrections",
    "sandwich_inference",
]

COND_LIMIT = 1e12


def active_indices(params, active=None) -> np.ndarray:
    """Positions in ``params.as_vector()`` of the active edge classes and all vertex classes."""
    l = len(params.edge)
    k = len(params.as_vector()) - l
    if active is None:
        active = np.flatnonzero(np.asarray(params.edge) != 0)
    active = np.asarray(sorted(int(s) for s in active), dtype=int)
    if active.size and (active.min() < 0 or active.max() >= l):
        raise IndexError("active edge class out of range")
    return np.concatenate([active, l + np.arange(k)])


def parameter_names(params, scheme: ColoringScheme | None = None) -> list[str]:
    """``theta_E[1]``-style names (1-based) for the inference parametrization."""
    l = len(params.edge)
    k = len(params.as_vector()) - l
    e, v = ("theta_E", "theta_V") if isinstance(params, RconParams) else ("rho_E", "sigma_V")
    return [f"{e}[{s + 1}]" for s in range(l)] + [f"{v}[{m + 1}]" for m in range(k)]


def hessian_zz(params, cov: SampleCovariance, scheme: ColoringScheme, active=None) -> np.ndarray:
    """Per-observation Hessian ``H`` restricted to the active parameters."""
    idx = active_indices(params, active)
    H = hessian(params, cov, scheme) / cov.n
    return H[np.ix_(idx, idx)]


def _replicate_score(index, X, params, scheme, seed, center, divisor, idx):
    rng = replicate_rng(seed, index)
    rows = rng.integers(X.shape[0], size=X.shape[0])
    cov = sample_covariance(X[rows], center=center, divisor=divisor)
    return score_vector(params, cov, scheme)[idx]


def bootstrap_scores(data, params, scheme: ColoringScheme, m: int = 200, seed: int = 0,
                     active=None, center: bool = True, divisor: str = "n",
                     workers: int | None = 1) -> np.ndarray:
    """Full-sample scores at fixed ``params`` on ``m`` row-resampled data sets, shape ``(m, |z|)``."""
    X = np.asarray(data, dtype=float)
    if m < 2:
        raise DataError(f"need at least 2 bootstrap replicates, got {m}")
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("bootstrap needs an n x p data matrix with n >= 2")
    idx = active_indices(params, active)
    job = partial(_replicate_score, X=X, params=params, scheme=scheme, seed=seed,
                  center=center, divisor=divisor, idx=idx)
    return np.array(parallel_map(job, range(m), workers))


def bootstrap_variability(data, params, scheme: ColoringScheme, m: int = 200, seed: int = 0,
                          active=None, center: bool = True, divisor: str = "n",
                          workers: int | None = 1) -> np.ndarray:
    """``V = sum_l (S_l - S_bar)^T (S_l - S_bar) / (n (m - 1))`` over bootstrap scores ``S_l``."""
    S = bootstrap_scores(data, params, scheme, m, seed, active, center, divisor, workers)
    n = np.asarray(data).shape[0]
    D = S - S.mean(axis=0)
    V = D.T @ D / (n * (m - 1))
    return 0.5 * (V + V.T)


def per_observation_scores(data, params, scheme: ColoringScheme, center: bool = True,
                           active=None) -> np.ndarray:
    """Score of each observation's own conditional likelihood terms, shape ``(n, |z|)``.

    The row sums equal the full-sample score when ``center`` is off (and
    up to the centering when it is on).  Used as an oracle for ``V``.
    """
    X = np.asarray(data, dtype=float)
    if center:
        X = X - X.mean(axis=0)
    idx = active_indices(params, active)
    if isinstance(params, RconParams):
        theta = assemble_concentration(params, scheme)
        sigma = 1.0 / np.diag(theta)
        U = X @ off_diagonal(theta)
        T = scheme.edge_generators
        Y = np.einsum("ni,sij->snj", X, T)
        edge = np.einsum("snj,nj->ns", Y, X) + np.einsum("snj,nj,j->ns", Y, U, sigma)
        node = 0.5 * (1.0 / sigma - X**2 / sigma**2 + U**2)
        node = -node * sigma**2
    else:
        sigma = params.sigma_V[scheme.vertex_class_of]
        d = 1.0 / np.sqrt(sigma)
        Z = X * d
        rho = off_diagonal(_rho_matrix(params, scheme))
        R = Z - Z @ rho  # standardized residuals (I - rho) z
        T = scheme.edge_generators
        edge = -np.einsum("nj,sij,ni->ns", R, T, Z)
        node = 0.5 * (1.0 - (R - R @ rho) * Z) / sigma
    k = scheme.n_vertex_classes
    vert = np.stack([node[:, scheme.vertex_class_of == m].sum(axis=1) for m in range(k)], axis=1)
    return np.concatenate([edge, vert], axis=1)[:, idx]


def _rho_matrix(params: RcorParams, scheme: ColoringScheme) -> np.ndarray:
    padded = np.append(params.rho_E, 0.0)
    out = padded[scheme.edge_class_of]
    np.fill_diagonal(out, 0.0)
    return out


def penalty_corrections(params, spec: PenaltySpec | None, active=None):
    """``(Sigma1, b1)`` over the active parameters; zero unless the penalty is SCAD."""
    idx = active_indices(params, active)
    l = len(params.edge)
    Sigma1 = np.zeros((idx.size, idx.size))
    b1 = np.zeros(idx.size)
    if spec is None or spec.kind != "scad" or spec.lam == 0:
        return Sigma1, b1
    for pos, j in enumerate(idx):
        if j < l:
            t = float(params.edge[j])
            Sigma1[pos, pos] = scad_second_derivative(abs(t), spec.lam, spec.scad_a)
            b1[pos] = scad_derivative(abs(t), spec.lam, spec.scad_a) * np.sign(t)
    return Sigma1, b1


def godambe_covariance(H: np.ndarray, V: np.ndarray, n: int, Sigma1=None, b1=None):
    """Asymptotic covariance ``A^{-1} V A^{-1} / n`` with ``A = H + Sigma1``.

    Returns ``(cov, offset)`` with ``offset = A^{-1} b1``; the estimate plus
    ``offset`` is asymptotically centered on the truth, so ``-offset`` is
    the penalty bias.

    Raises
    ------
    NumericalError
        If ``A`` is singular or its condition number exceeds ``1e12``.
    """
    H = np.asarray(H, dtype=float)
    A = H if Sigma1 is None else H + np.asarray(Sigma1, dtype=float)
    if A.size == 0:
        return np.zeros((0, 0)), np.zeros(0)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"sensitivity matrix is singular (condition number {cond:.3g})")
    Ainv = np.linalg.inv(A)
    cov = Ainv @ np.asarray(V, dtype=float) @ Ainv.T / n
    cov = 0.5 * (cov + cov.T)
    offset = np.zeros(A.shape[0]) if b1 is None else Ainv @ np.asarray(b1, dtype=float)
    return cov, offset


@dataclass
class InferenceReport:
    """Sandwich ingredients and standard errors over the active parameters."""

    names: list
    estimate: np.ndarray
    H_zz: np.ndarray
    V_zz: np.ndarray
    Sigma1: np.ndarray
    b1: np.ndarray
    cov: np.ndarray
    bias: np.ndarray
    m: int
    seed: int
    n: int
    extra: dict = field(default_factory=dict)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    def rows(self) -> list[dict]:
        return [{"parameter": nm, "estimate": float(e), "se": float(s), "bias": float(b)}
                for nm, e, s, b in zip(self.names, self.estimate, self.se, self.bias)]

    def to_dict(self) -> dict:
        return {
            "parameters": list(self.names),
            "estimate": self.estimate.tolist(),
            "se": self.se.tolist(),
            "bias": self.bias.tolist(),
            "H_zz": self.H_zz.tolist(),
            "V_zz": self.V_zz.tolist(),
            "Sigma1": self.Sigma1.tolist(),
            "b1": self.b1.tolist(),
            "covariance": self.cov.tolist(),
            "bootstrap_m": self.m,
            "seed": self.seed,
            "n": self.n,
            **self.extra,
        }


def sandwich_inference(data, params, scheme: ColoringScheme, m: int = 200, seed: int = 0,
                       penalty: PenaltySpec | None = None, center: bool = True,
                       divisor: str = "n", workers: int | None = 1) -> InferenceReport:
    """Bootstrap-sandwich standard errors at a fitted point.

    Parameters
    ----------
    data : array_like, shape (n, p)
        Raw observations; rows are resampled with replacement.
    params : RconParams, RcorParams or FitResult
    m : int
        Bootstrap replicates (default 200).
    penalty : PenaltySpec, optional
        Adds the SCAD curvature and bias terms.
    """
    params = getattr(params, "params", params)
    X = np.asarray(data, dtype=float)
    cov = sample_covariance(X, center=center, divisor=divisor)
    idx = active_indices(params)
    H = hessian_zz(params, cov, scheme)
    V = bootstrap_variability(X, params, scheme, m, seed, None, center, divisor, workers)
    Sigma1, b1 = penalty_corrections(params, penalty)
    C, offset = godambe_covariance(H, V, cov.n, Sigma1, b1)
    bias = -offset
    names = [parameter_names(params)[j] for j in idx]
    return InferenceReport(names, params.as_vector()[idx], H, V, Sigma1, b1, C, bias,
                           m, seed, cov.n,
                           {"min_eig_H": float(np.linalg.eigvalsh(H)[0]) if H.size else None})
