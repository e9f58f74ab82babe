"""Sample second-moment matrices and the naive class-averaging estimator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coloring import ColoringScheme
from .exceptions import DataError, NumericalError
from .params import RconParams, RcorParams, partial_correlations

__all__ = ["SampleCovariance", "sample_covariance", "naive_estimator"]


@dataclass(frozen=True, eq=False)
class SampleCovariance:
    """Second-moment matrix ``C`` together with the sample size it came from.

    ``n`` is the number of observations and weights every term of the
    composite likelihood; ``divisor`` is what ``X^T X`` was divided by.
    """

    C: np.ndarray
    n: int
    centered: bool = True
    divisor: float | None = None

    def __post_init__(self):
        C = np.array(self.C, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DataError(f"covariance must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise DataError("covariance has non-finite entries")
        C = 0.5 * (C + C.T)
        C.setflags(write=False)
        object.__setattr__(self, "C", C)
        if self.divisor is None:
            object.__setattr__(self, "divisor", float(self.n))

    @property
    def p(self) -> int:
        return self.C.shape[0]


def sample_covariance(data, center: bool = True, divisor: str = "n") -> SampleCovariance:
    """Compute ``C = X^T X / n`` from an ``n x p`` data matrix.

    Parameters
    ----------
    data : array_like, shape (n, p)
    center : bool
        Subtract column means first.  With ``center=False`` the result is the
        raw second-moment matrix, which is what a zero-mean model sees.
    divisor : {"n", "n-1"}
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise DataError(f"data must be a 2-d array, got {X.ndim} dimensions")
    n = X.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 observations, got {n}")
    if not np.all(np.isfinite(X)):
        raise DataError("data contain non-finite entries")
    if divisor not in ("n", "n-1"):
        raise DataError(f"divisor must be 'n' or 'n-1', got {divisor!r}")
    if center:
        X = X - X.mean(axis=0)
    div = float(n if divisor == "n" else n - 1)
    return SampleCovariance(X.T @ X / div, n=n, centered=center, divisor=div)


def _inverse(C: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        raise NumericalError(
            "sample covariance is not positive definite; the naive estimator needs n > p "
            "(or a regularized covariance)"
        ) from None
    Linv = np.linalg.inv(L)
    return Linv.T @ Linv


def naive_estimator(cov: SampleCovariance, scheme: ColoringScheme, kind: str = "rcon"):
    """Average the inverse sample covariance within each color class.

    For ``kind="rcor"`` the edge classes average partial correlations of the
    inverse, and the vertex classes average its diagonal, returned as
    ``sigma_V = 1 / mean(diag)``.
    """
    if cov.p != scheme.p:
        raise DataError(f"covariance is {cov.p}x{cov.p} but scheme has p={scheme.p}")
    K = _inverse(cov.C)
    diag = np.diag(K)
    theta_V = np.array([diag[list(c)].mean() for c in scheme.vertex_classes])
    if kind == "rcon":
        source = K
    elif kind == "rcor":
        source = partial_correlations(K)
    else:
        raise ValueError(f"kind must be 'rcon' or 'rcor', got {kind!r}")
    edge = np.array([np.mean([source[i, j] for i, j in c]) for c in scheme.edge_classes])
    if kind == "rcon":
        return RconParams(edge, theta_V)
    return RcorParams(edge, 1.0 / theta_V)
