"""Penalized composite-likelihood fit of the RCON model by coordinate descent.

Both coordinate problems have closed forms.  For fixed conditional
variances the objective is quadratic in each edge-class concentration, so
the penalized minimizer is a soft-thresholded Newton step.  For fixed edge
parameters the vertex-class stationarity condition is the quadratic

    (sum_j q_j) sigma^2 + |V_m| sigma - sum_j C_jj = 0,

which has exactly one positive root.
"""

from __future__ import annotations

import numpy as np

from .coloring import ColoringScheme
from .covariance import SampleCovariance
from .exceptions import DataError, NumericalError
from .params import RconParams
from .solver import FitResult, SolverConfig, coordinate_descent, soft_threshold

__all__ = [
    "RconState",
    "default_rcon_init",
    "update_edge_class",
    "update_vertex_class",
    "vertex_root",
    "fit_rcon",
]

# relative guard for the vertex quadratic
VERTEX_EPS = 1e-12


def default_rcon_init(cov: SampleCovariance, scheme: ColoringScheme) -> RconParams:
    """Diagonal model: ``theta_V = |V_m| / sum_{j in V_m} C_jj``, all edges zero."""
    diag = np.diag(cov.C)
    sums = np.bincount(scheme.vertex_class_of, weights=diag, minlength=scheme.n_vertex_classes)
    if np.any(sums <= 0):
        bad = int(np.flatnonzero(sums <= 0)[0])
        raise DataError(f"vertex class {bad + 1} has zero variance in every member")
    return RconParams(np.zeros(scheme.n_edge_classes), scheme.vertex_sizes / sums)


def vertex_root(q_sum: float, c_sum: float, size: int) -> float:
    """Positive root of ``q sigma^2 + size sigma - c = 0``.

    Written as ``2c / (size + sqrt(size^2 + 4qc))`` so it is stable as
    ``q -> 0`` where it tends to ``c / size``.
    """
    if c_sum <= 0:
        raise DataError("vertex class has nonpositive total variance")
    if q_sum < -VERTEX_EPS * c_sum:
        raise NumericalError(f"negative quadratic form q={q_sum!r}; covariance is not PSD")
    if q_sum <= VERTEX_EPS * c_sum:
        return c_sum / size
    return 2.0 * c_sum / (size + np.sqrt(size * size + 4.0 * q_sum * c_sum))


class RconState:
    """Mutable working copy of RCON parameters with cached products.

    ``tt`` is the off-diagonal concentration matrix and ``W = C @ tt``.
    """

    def __init__(self, cov: SampleCovariance, scheme: ColoringScheme, params: RconParams):
        if cov.p != scheme.p:
            raise DataError(f"covariance is {cov.p}x{cov.p} but scheme has p={scheme.p}")
        self.scheme = scheme
        self.C = cov.C
        self.n = cov.n
        self.n_edge = scheme.n_edge_classes
        self.n_vertex = scheme.n_vertex_classes
        T = scheme.edge_generators
        self._T = T
        self._CT = np.einsum("ij,sjk->sik", self.C, T)
        self._trTC = np.einsum("sij,ij->s", T, self.C)
        self._TCT = np.einsum("sij,sij->sj", T, self._CT)  # diag(T_s C T_s)
        self._pairs = [np.asarray(c, dtype=int).reshape(-1, 2) for c in scheme.edge_classes]
        self._members = [np.asarray(c, dtype=int) for c in scheme.vertex_classes]
        self._cdiag = np.diag(self.C)

        self.theta_E = np.array(params.theta_E, dtype=float)
        self.sigma = params.sigma_V[scheme.vertex_class_of].astype(float)
        self.tt = np.zeros((scheme.p, scheme.p))
        for s, idx in enumerate(self._pairs):
            self.tt[idx[:, 0], idx[:, 1]] = self.theta_E[s]
            self.tt[idx[:, 1], idx[:, 0]] = self.theta_E[s]
        self.W = self.C @ self.tt

    def begin_sweep(self):
        self.W = self.C @ self.tt  # drop accumulated rounding

    def begin_vertex_phase(self):
        pass

    def edge_values(self) -> np.ndarray:
        return self.theta_E

    def vector(self) -> np.ndarray:
        return self.params().as_vector()

    def params(self) -> RconParams:
        sigma_V = np.array([self.sigma[idx[0]] for idx in self._members])
        return RconParams(self.theta_E.copy(), 1.0 / sigma_V)

    def objective(self) -> float:
        q = np.einsum("ij,ij->j", self.tt, self.W)
        s = self.sigma
        return 0.5 * self.n * float(
            np.sum(np.log(s) + self._cdiag / s + 2.0 * np.diag(self.W) + s * q)
        )

    def edge_curvature(self, s: int) -> float:
        """``sum_j sigma_j (T_s C T_s)_jj``; positive when ``C`` is PD."""
        return float(self._TCT[s] @ self.sigma)

    def edge_linear_term(self, s: int) -> float:
        """Gradient of the objective in ``theta_{E_s}`` divided by ``n``,
        with the class's own contribution removed."""
        full = self._trTC[s] + float(np.einsum("ij,ij,j->", self._T[s], self.W, self.sigma))
        return full - self.theta_E[s] * self.edge_curvature(s)

    def propose_edge(self, s: int, threshold: float) -> float:
        den = self.edge_curvature(s)
        if not den > 0:
            raise NumericalError(
                f"edge class {s + 1}: nonpositive curvature {den!r}; covariance is not PD"
            )
        return float(soft_threshold(-self.edge_linear_term(s), threshold)) / den

    def set_edge(self, s: int, value: float):
        delta = value - self.theta_E[s]
        if delta == 0.0:
            return
        idx = self._pairs[s]
        self.tt[idx[:, 0], idx[:, 1]] = value
        self.tt[idx[:, 1], idx[:, 0]] = value
        self.W += delta * self._CT[s]
        self.theta_E[s] = value

    def update_edge(self, s: int, threshold: float) -> float:
        value = self.propose_edge(s, threshold)
        self.set_edge(s, value)
        return value

    def propose_vertex(self, m: int) -> float:
        idx = self._members[m]
        q_sum = float(np.einsum("ij,ij->", self.tt[:, idx], self.W[:, idx]))
        c_sum = float(self._cdiag[idx].sum())
        return vertex_root(q_sum, c_sum, idx.size)

    def update_vertex(self, m: int) -> float:
        sigma = self.propose_vertex(m)
        self.sigma[self._members[m]] = sigma
        return sigma

    def diagnostics(self) -> dict:
        theta = self.tt.copy()
        theta[np.diag_indices_from(theta)] = 1.0 / self.sigma
        return {"min_eig_theta": float(np.linalg.eigvalsh(theta)[0])}


def _init(cov, scheme, cfg: SolverConfig) -> RconParams:
    init = cfg.init
    if init is None or (isinstance(init, str) and init == "default"):
        return default_rcon_init(cov, scheme)
    if not isinstance(init, RconParams):
        raise TypeError("RCON solver needs an RconParams initial value")
    return init


def update_edge_class(
    current: RconParams, s: int, cov: SampleCovariance, scheme: ColoringScheme,
    cfg: SolverConfig = SolverConfig(),
) -> float:
    """Exact penalized minimizer in ``theta_{E_s}`` with everything else held fixed."""
    if not 0 <= s < scheme.n_edge_classes:
        raise IndexError(f"edge class {s} out of range")
    state = RconState(cov, scheme, current)
    return state.propose_edge(s, cfg.lam * cfg.edge_weights(scheme.n_edge_classes)[s])


def update_vertex_class(
    current: RconParams, m: int, cov: SampleCovariance, scheme: ColoringScheme
) -> float:
    """Conditional-variance minimizer ``sigma_{V_m}`` (returns sigma, not theta)."""
    if not 0 <= m < scheme.n_vertex_classes:
        raise IndexError(f"vertex class {m} out of range")
    return RconState(cov, scheme, current).propose_vertex(m)


def fit_rcon(
    cov: SampleCovariance, scheme: ColoringScheme, cfg: SolverConfig = SolverConfig()
) -> FitResult:
    """Minimize ``l_c(theta) + n lam sum_s w_s |theta_{E_s}|`` over the RCON classes."""
    state = RconState(cov, scheme, _init(cov, scheme, cfg))
    return coordinate_descent(state, cfg, "rcon")
