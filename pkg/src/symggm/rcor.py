"""Penalized composite-likelihood fit of the RCOR model by coordinate descent.

Parameters are edge-class partial correlations and vertex-class
conditional variances.  With ``M = sigma^{-1/2} C sigma^{-1/2}`` the
objective is ``n/2 [sum_j log sigma_j + tr(M (I - rho~)^2)]``, quadratic in
each partial correlation.  For a vertex class, writing ``y = sqrt(sigma)``
turns stationarity into ``|V_m| y^2 - b y - a = 0`` with ``a >= 0``.
"""

from __future__ import annotations

import logging

import numpy as np

from .coloring import ColoringScheme
from .covariance import SampleCovariance
from .exceptions import DataError, NumericalError
from .params import RcorParams
from .solver import FitResult, SolverConfig, coordinate_descent, soft_threshold

__all__ = [
    "RcorState",
    "default_rcor_init",
    "update_corr_class",
    "update_vertex_class_rcor",
    "vertex_coefficients",
    "fit_rcor",
]

logger = logging.getLogger(__name__)

RHO_MARGIN = 1e-8
A_EPS = 1e-10


def default_rcor_init(cov: SampleCovariance, scheme: ColoringScheme) -> RcorParams:
    """Independence model: all ``rho = 0``, ``sigma_V`` = class means of ``C_jj``."""
    diag = np.diag(cov.C)
    sums = np.bincount(scheme.vertex_class_of, weights=diag, minlength=scheme.n_vertex_classes)
    if np.any(sums <= 0):
        bad = int(np.flatnonzero(sums <= 0)[0])
        raise DataError(f"vertex class {bad + 1} has zero variance in every member")
    return RcorParams(np.zeros(scheme.n_edge_classes), sums / scheme.vertex_sizes)


class RcorState:
    """Working copy of RCOR parameters.

    Caches ``d = sigma^{-1/2}`` per vertex, ``M = D C D``, the partial
    correlation matrix ``R`` (zero diagonal) and ``U = M @ R``.
    """

    def __init__(self, cov: SampleCovariance, scheme: ColoringScheme, params: RcorParams):
        if cov.p != scheme.p:
            raise DataError(f"covariance is {cov.p}x{cov.p} but scheme has p={scheme.p}")
        self.scheme = scheme
        self.C = cov.C
        self.n = cov.n
        self.n_edge = scheme.n_edge_classes
        self.n_vertex = scheme.n_vertex_classes
        self._T = scheme.edge_generators
        self._pairs = [np.asarray(c, dtype=int).reshape(-1, 2) for c in scheme.edge_classes]
        self._members = [np.asarray(c, dtype=int) for c in scheme.vertex_classes]
        self._trace_C = float(np.trace(self.C))
        p = scheme.p

        self.rho = np.array(params.rho_E, dtype=float)
        self.sigma = params.sigma_V[scheme.vertex_class_of].astype(float)
        self.R = np.zeros((p, p))
        for s, idx in enumerate(self._pairs):
            self.R[idx[:, 0], idx[:, 1]] = self.rho[s]
            self.R[idx[:, 1], idx[:, 0]] = self.rho[s]
        self.n_clamped = 0
        self.n_fallback = 0
        self.min_a = np.inf
        self._refresh()

    def _refresh(self):
        self.d = 1.0 / np.sqrt(self.sigma)
        self.M = self.C * np.outer(self.d, self.d)
        self.U = self.M @ self.R
        self._P = None

    def begin_sweep(self):
        self._refresh()

    def begin_vertex_phase(self):
        A = np.eye(self.scheme.p) - self.R
        self._P = A @ A

    def edge_values(self) -> np.ndarray:
        return self.rho

    def vector(self) -> np.ndarray:
        return self.params().as_vector()

    def params(self) -> RcorParams:
        sigma_V = np.array([self.sigma[idx[0]] for idx in self._members])
        return RcorParams(self.rho.copy(), sigma_V)

    def objective(self) -> float:
        A = np.eye(self.scheme.p) - self.R
        return 0.5 * self.n * float(np.sum(np.log(self.sigma)) + np.sum(self.M * (A @ A)))

    # -- edge classes -------------------------------------------------------

    def _MT(self, s: int) -> np.ndarray:
        return self.M @ self._T[s]

    def edge_curvature(self, s: int, MT=None) -> float:
        """``tr(T_s M T_s)``."""
        MT = self._MT(s) if MT is None else MT
        return float(np.sum(self._T[s] * MT))

    def edge_linear_term(self, s: int, den: float | None = None) -> float:
        """``tr(T_s M (rho~ - I))`` with class ``s`` removed from ``rho~``."""
        full = float(np.sum(self._T[s] * (self.U - self.M)))
        if den is None:
            den = self.edge_curvature(s)
        return full - self.rho[s] * den

    def propose_edge(self, s: int, threshold: float) -> tuple[float, np.ndarray, bool]:
        MT = self._MT(s)
        den = self.edge_curvature(s, MT)
        if not den > 0:
            raise NumericalError(
                f"edge class {s + 1}: nonpositive curvature {den!r}; covariance is not PD"
            )
        value = float(soft_threshold(-self.edge_linear_term(s, den), threshold)) / den
        bound = 1.0 - RHO_MARGIN
        clamped = abs(value) > bound
        if clamped:
            value = float(np.clip(value, -bound, bound))
        return value, MT, clamped

    def update_edge(self, s: int, threshold: float) -> float:
        value, MT, clamped = self.propose_edge(s, threshold)
        if clamped:
            self.n_clamped += 1
            logger.warning("edge class %d: partial correlation clamped to %.8f", s + 1, value)
        delta = value - self.rho[s]
        if delta != 0.0:
            idx = self._pairs[s]
            self.R[idx[:, 0], idx[:, 1]] = value
            self.R[idx[:, 1], idx[:, 0]] = value
            self.U += delta * MT
            self.rho[s] = value
        return value

    # -- vertex classes -----------------------------------------------------

    def vertex_coefficients(self, m: int) -> tuple[float, float]:
        """``(a, b)`` of ``|V_m| y^2 - b y - a = 0`` at the current state."""
        P = self._P
        if P is None:
            A = np.eye(self.scheme.p) - self.R
            P = A @ A
        idx = self._members[m]
        inside = np.zeros(self.scheme.p, dtype=bool)
        inside[idx] = True
        CP = self.C[idx] * P[idx]
        a = float(CP[:, inside].sum())
        b = float(np.sum(CP[:, ~inside] @ self.d[~inside]))
        return a, b

    def propose_vertex(self, m: int) -> float:
        a, b = self.vertex_coefficients(m)
        size = self._members[m].size
        self.min_a = min(self.min_a, a)
        eps = A_EPS * self._trace_C
        if a < -eps:
            raise NumericalError(f"vertex class {m + 1}: a={a!r} < 0; covariance is not PSD")
        if a <= eps and b <= 0:
            self.n_fallback += 1
            return float(np.mean(np.diag(self.C)[self._members[m]]))
        a = max(a, 0.0)
        disc = np.sqrt(b * b + 4.0 * a * size)
        y = (b + disc) / (2.0 * size) if b >= 0 else 2.0 * a / (disc - b)
        return float(y * y)

    def update_vertex(self, m: int) -> float:
        sigma = self.propose_vertex(m)
        idx = self._members[m]
        factor = np.sqrt(self.sigma[idx[0]] / sigma)
        self.sigma[idx] = sigma
        self.d[idx] *= factor
        self.M[idx, :] *= factor
        self.M[:, idx] *= factor
        return sigma

    def diagnostics(self) -> dict:
        A = np.eye(self.scheme.p) - self.R
        return {
            "min_eig_theta": float(np.linalg.eigvalsh(A * np.outer(self.d, self.d))[0]),
            "n_clamped": self.n_clamped,
            "n_vertex_fallback": self.n_fallback,
            "min_a": float(self.min_a),
        }


def _init(cov, scheme, cfg: SolverConfig) -> RcorParams:
    init = cfg.init
    if init is None or (isinstance(init, str) and init == "default"):
        return default_rcor_init(cov, scheme)
    if not isinstance(init, RcorParams):
        raise TypeError("RCOR solver needs an RcorParams initial value")
    return init


def update_corr_class(
    current: RcorParams, s: int, cov: SampleCovariance, scheme: ColoringScheme,
    lam: float = 0.0, weight: float = 1.0,
) -> float:
    """Thresholded coordinate minimizer in ``rho_{E_s}``."""
    if not 0 <= s < scheme.n_edge_classes:
        raise IndexError(f"edge class {s} out of range")
    return RcorState(cov, scheme, current).propose_edge(s, lam * weight)[0]


def vertex_coefficients(current: RcorParams, m: int, cov: SampleCovariance,
                        scheme: ColoringScheme) -> tuple[float, float]:
    return RcorState(cov, scheme, current).vertex_coefficients(m)


def update_vertex_class_rcor(
    current: RcorParams, m: int, cov: SampleCovariance, scheme: ColoringScheme
) -> float:
    """Minimizer ``sigma_{V_m} = y^2``, ``y = (b + sqrt(b^2 + 4 a |V_m|)) / (2 |V_m|)``."""
    if not 0 <= m < scheme.n_vertex_classes:
        raise IndexError(f"vertex class {m} out of range")
    return RcorState(cov, scheme, current).propose_vertex(m)


def fit_rcor(
    cov: SampleCovariance, scheme: ColoringScheme, cfg: SolverConfig = SolverConfig()
) -> FitResult:
    """Minimize ``l_c(rho, sigma) + n lam sum_s w_s |rho_{E_s}|``."""
    state = RcorState(cov, scheme, _init(cov, scheme, cfg))
    return coordinate_descent(state, cfg, "rcor")
