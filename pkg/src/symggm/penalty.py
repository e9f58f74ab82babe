"""Penalties, the composite BIC and tuning-parameter selection.

SCAD is handled by one-step local linear approximation: an L1 fit at the
same ``lam`` supplies ``|edge_s|``, and the refit uses per-class weights
``p'_lam(|edge_s|) / lam`` inside the unchanged soft-threshold updates.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .coloring import ColoringScheme
from .covariance import SampleCovariance
from .exceptions import NumericalError
from .rcon import RconState, default_rcon_init, fit_rcon
from .rcor import RcorState, default_rcor_init, fit_rcor
from .solver import FitResult, SolverConfig

__all__ = [
    "PenaltySpec",
    "scad_penalty",
    "scad_derivative",
    "scad_second_derivative",
    "lla_weights",
    "composite_bic",
    "support_refit",
    "lambda_max",
    "default_grid",
    "fit",
    "fit_penalized",
    "TuningReport",
    "tune_lambda",
]

logger = logging.getLogger(__name__)

MODELS = ("rcon", "rcor")


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family and level.

    Consistency of the penalized estimator needs ``lam -> 0`` with
    ``sqrt(n) * lam -> infinity``; ``scad_a = 3.7`` is the usual default.
    """

    kind: str = "l1"
    lam: float = 0.0
    scad_a: float = 3.7

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("l1", "scad"):
            raise ValueError(f"penalty kind must be 'l1' or 'scad', got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.scad_a <= 2:
            raise ValueError(f"SCAD needs a > 2, got {self.scad_a}")


def _check_a(a):
    if a <= 2:
        raise ValueError(f"SCAD needs a > 2, got {a}")


def scad_penalty(theta_abs, lam: float, a: float = 3.7):
    """SCAD penalty value ``p_lam(|t|)``."""
    _check_a(a)
    t = np.abs(np.asarray(theta_abs, dtype=float))
    mid = (2 * a * lam * t - t**2 - lam**2) / (2 * (a - 1))
    return np.where(t <= lam, lam * t, np.where(t < a * lam, mid, lam**2 * (a + 1) / 2))


def scad_derivative(theta_abs, lam: float, a: float = 3.7):
    """``lam`` for ``t <= lam``, ``(a lam - t)_+ / (a - 1)`` beyond."""
    _check_a(a)
    t = np.asarray(theta_abs, dtype=float)
    if np.any(t < 0):
        raise ValueError("scad_derivative takes absolute values")
    return np.where(t <= lam, lam, np.maximum(a * lam - t, 0.0) / (a - 1))


def scad_second_derivative(theta_abs, lam: float, a: float = 3.7):
    """``-1 / (a - 1)`` on ``(lam, a lam)``, zero elsewhere (``t > 0``)."""
    _check_a(a)
    t = np.asarray(theta_abs, dtype=float)
    return np.where((t > lam) & (t < a * lam), -1.0 / (a - 1), 0.0)


def lla_weights(current, spec: PenaltySpec) -> np.ndarray:
    """Per-class weights so that the solver threshold ``lam * w_s`` equals ``p'_lam(|edge_s|)``.

    At ``lam = 0`` the ratio is undefined; the limit convention is weight 1
    for a zero coefficient and 0 otherwise.
    """
    edge = np.abs(np.asarray(getattr(current, "edge", current), dtype=float))
    if spec.kind == "l1":
        return np.ones_like(edge)
    if spec.lam == 0:
        return (edge == 0).astype(float)
    return scad_derivative(edge, spec.lam, spec.scad_a) / spec.lam


def composite_bic(fit_result: FitResult, cov: SampleCovariance | None = None,
                  scheme: ColoringScheme | None = None, df: str = "classes") -> float:
    """``2 l_c + log(n) df`` at the fitted parameters.

    ``df="classes"`` counts nonzero edge classes plus vertex classes;
    ``df="edges"`` counts the vertex pairs in nonzero classes instead of the
    classes themselves (needs ``scheme``).
    """
    n = fit_result.n if cov is None else cov.n
    if df == "classes":
        dof = fit_result.df
    elif df == "edges":
        if scheme is None:
            raise ValueError("df='edges' needs the coloring scheme")
        active = list(fit_result.active_set)
        dof = int(scheme.edge_sizes[active].sum()) + scheme.n_vertex_classes
    else:
        raise ValueError(f"df must be 'classes' or 'edges', got {df!r}")
    return 2.0 * fit_result.neg_loglik + np.log(n) * dof


def support_refit(cov: SampleCovariance, scheme: ColoringScheme, model: str, active,
                  tol: float = 1e-6, max_sweeps: int = 500) -> FitResult:
    """Unpenalized fit with the edge classes outside ``active`` held at zero.

    The returned parameters are expanded back to the full scheme.
    """
    active = sorted(int(s) for s in active)
    sub = ColoringScheme(scheme.p, scheme.vertex_classes,
                         tuple(scheme.edge_classes[s] for s in active), scheme.labels)
    res = fit(cov, sub, model, SolverConfig(tol=tol, max_sweeps=max_sweeps))
    edge = np.zeros(scheme.n_edge_classes)
    edge[active] = res.params.edge
    cls = type(res.params)
    vert = res.params.as_vector()[len(active):]
    res.params = cls(edge, vert)
    res.active_set = tuple(int(s) for s in np.flatnonzero(edge != 0.0))
    return res


def _check_model(model: str) -> str:
    model = model.lower()
    if model not in MODELS:
        raise ValueError(f"model must be 'rcon' or 'rcor', got {model!r}")
    return model


def lambda_max(cov: SampleCovariance, scheme: ColoringScheme, model: str = "rcon") -> float:
    """Smallest ``lam`` for which the default start is a fixed point with every edge zero.

    With all edges at zero the vertex updates return the start values, so
    the edge linear terms there decide the threshold.
    """
    model = _check_model(model)
    if scheme.n_edge_classes == 0:
        return 0.0
    if model == "rcon":
        state = RconState(cov, scheme, default_rcon_init(cov, scheme))
    else:
        state = RcorState(cov, scheme, default_rcor_init(cov, scheme))
    lin = [state.edge_linear_term(s) for s in range(scheme.n_edge_classes)]
    return float(np.max(np.abs(lin)))


def default_grid(lam_max: float, num: int = 30, ratio: float = 0.01) -> np.ndarray:
    """``num`` log-spaced values from ``lam_max`` down to ``ratio * lam_max``."""
    if lam_max <= 0:
        return np.zeros(1)
    return np.geomspace(lam_max, ratio * lam_max, num)


def fit(cov: SampleCovariance, scheme: ColoringScheme, model: str = "rcon",
        cfg: SolverConfig = SolverConfig()) -> FitResult:
    """Dispatch to :func:`fit_rcon` or :func:`fit_rcor`."""
    model = _check_model(model)
    return (fit_rcon if model == "rcon" else fit_rcor)(cov, scheme, cfg)


def fit_penalized(
    cov: SampleCovariance, scheme: ColoringScheme, model: str, spec: PenaltySpec,
    tol: float = 1e-6, max_sweeps: int = 500, init=None,
) -> FitResult:
    """L1 fit, plus one LLA reweighting step when ``spec.kind == "scad"``."""
    base = SolverConfig(lam=spec.lam, tol=tol, max_sweeps=max_sweeps, init=init)
    res = fit(cov, scheme, model, base)
    if spec.kind == "scad":
        w = lla_weights(res.params, spec)
        cfg = SolverConfig(lam=spec.lam, weights=w, tol=tol, max_sweeps=max_sweeps,
                           init=res.params)
        l1 = res
        res = fit(cov, scheme, model, cfg)
        res.diagnostics["l1_warm_start"] = l1.params.to_dict()
    return res


@dataclass
class TuningReport:
    """Fits along a descending ``lam`` grid and the composite-BIC choice."""

    model: str
    penalty: PenaltySpec
    grid: np.ndarray
    fits: list
    cbic: np.ndarray
    selected_index: int
    warm_start: bool = True
    notes: list = field(default_factory=list)
    df_convention: str = "classes"
    refit: bool = False

    @property
    def selected_lambda(self) -> float:
        return float(self.grid[self.selected_index])

    @property
    def selected_fit(self) -> FitResult:
        return self.fits[self.selected_index]

    @property
    def df(self) -> np.ndarray:
        return np.array([f.df for f in self.fits])

    def rows(self) -> list[dict]:
        return [
            {
                "lambda": float(lam),
                "cbic": float(b),
                "df": f.df,
                "n_active": len(f.active_set),
                "objective": f.objective,
                "neg_loglik": f.neg_loglik,
                "converged": f.converged,
                "sweeps": f.sweeps_used,
            }
            for lam, b, f in zip(self.grid, self.cbic, self.fits)
        ]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "penalty": self.penalty.kind,
            "scad_a": self.penalty.scad_a,
            "warm_start": self.warm_start,
            "df_convention": self.df_convention,
            "refit": self.refit,
            "selected_lambda": self.selected_lambda,
            "selected_index": self.selected_index,
            "selected_params": self.selected_fit.params.to_dict(),
            "path": self.rows(),
            "notes": list(self.notes),
        }


def _cold_fit(lam, cov, scheme, model, kind, scad_a, tol, max_sweeps):
    return fit_penalized(cov, scheme, model, PenaltySpec(kind, lam, scad_a), tol, max_sweeps)


def select_index(cbic: np.ndarray, grid: np.ndarray) -> int:
    """Minimal cBIC; ties go to the larger ``lam``."""
    best = np.min(cbic)
    ties = np.flatnonzero(cbic == best)
    return int(ties[np.argmax(grid[ties])])


def tune_lambda(
    cov: SampleCovariance,
    scheme: ColoringScheme,
    grid=None,
    model: str = "rcon",
    penalty: str | PenaltySpec = "l1",
    tol: float = 1e-6,
    max_sweeps: int = 500,
    warm_start: bool = True,
    workers: int | None = 1,
    df: str = "classes",
    refit: bool = False,
) -> TuningReport:
    """Fit every ``lam`` in ``grid`` (largest first) and pick the composite-BIC minimizer.

    Parameters
    ----------
    grid : array_like, optional
        Defaults to :func:`default_grid` of :func:`lambda_max`.
    penalty : {"l1", "scad"} or PenaltySpec
    warm_start : bool
        Start each fit from the previous (larger ``lam``) solution.  Only
        cold starts are spread over ``workers``.
    df : {"classes", "edges"}
        Degrees-of-freedom convention of :func:`composite_bic`.
    refit : bool
        Evaluate the criterion at an unpenalized refit on each active set
        instead of at the penalized estimate.
    """
    model = _check_model(model)
    spec = penalty if isinstance(penalty, PenaltySpec) else PenaltySpec(str(penalty))
    if grid is None:
        grid = default_grid(lambda_max(cov, scheme, model))
    grid = np.sort(np.asarray(grid, dtype=float).reshape(-1))[::-1]
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("lambda grid must hold finite nonnegative values")

    if warm_start:
        fits = []
        init = None
        for lam in grid:
            res = fit_penalized(cov, scheme, model, PenaltySpec(spec.kind, lam, spec.scad_a),
                                tol, max_sweeps, init=init)
            fits.append(res)
            init = res.params
    else:
        job = partial(_cold_fit, cov=cov, scheme=scheme, model=model, kind=spec.kind,
                      scad_a=spec.scad_a, tol=tol, max_sweeps=max_sweeps)
        fits = parallel_map(job, list(grid), workers)

    notes = []
    if not any(f.converged for f in fits):
        raise NumericalError(
            "no fit on the lambda grid converged; last changes: "
            + ", ".join(f"{f.last_delta:.3g}" for f in fits)
        )
    sizes = [len(f.active_set) for f in fits]
    for i in range(1, len(sizes)):
        if sizes[i] < sizes[i - 1]:
            msg = f"active set shrank from {sizes[i - 1]} to {sizes[i]} as lambda decreased to {grid[i]:.4g}"
            logger.info(msg)
            notes.append(msg)
    refits: dict = {}
    cbic = np.full(len(fits), np.inf)
    for i, f in enumerate(fits):
        if not f.converged:
            continue
        target = f
        if refit:
            if f.active_set not in refits:
                refits[f.active_set] = support_refit(cov, scheme, model, f.active_set, tol,
                                                     max_sweeps)
            target = refits[f.active_set]
        cbic[i] = composite_bic(target, cov, scheme, df)
    return TuningReport(model, PenaltySpec(spec.kind, 0.0, spec.scad_a), grid, fits, cbic,
                        select_index(cbic, grid), warm_start, notes, df, refit)
