"""Ground-truth colored models, Gaussian sampling and estimator comparisons.

Each replicate draws its own random coloring, builds the true
concentration matrix from fixed class values, samples data and scores the
requested estimators.  Everything random flows from one integer seed
through :func:`symggm._parallel.replicate_rng`, so reports do not depend on
the worker count.
"""

from __future__ import annotations

import json
import logging
import traceback
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from ._parallel import parallel_map, replicate_rng
from .coloring import ColoringScheme
from .covariance import SampleCovariance, naive_estimator, sample_covariance
from .exceptions import DataError, SymGGMError
from .params import RconParams, RcorParams, assemble_concentration, assemble_from_rcor
from .penalty import PenaltySpec, default_grid, fit, lambda_max, tune_lambda
from .solver import SolverConfig

__all__ = [
    "ScenarioConfig",
    "TrueModel",
    "ExperimentReport",
    "PRESETS",
    "preset",
    "random_coloring",
    "build_true_model",
    "sample_gaussian",
    "evaluate_fit",
    "run_replicate",
    "run_experiment",
]

logger = logging.getLogger(__name__)

ESTIMATORS = ("composite", "naive", "penalized")

RCON_EDGE = [0.0] * 25 + [0.2591, 0.1628, -0.1934, 0.0980, 0.0518]
RCON_VERTEX = [
    1.3180, 1.8676, 1.788004, 1.7626, 1.6550, 1.1538, 1.3975, 1.7877, 1.7090, 1.6931,
    1.46313, 1.5131, 1.7084, 1.7344, 1.1441, 1.8059, 1.7446, 1.8522, 1.3146, 1.1001,
]
RCOR_EDGE = [0.0] * 26 + [0.1628, -0.1534, 0.0980, 0.0518]
RCOR_VERTEX_THETA = [
    3.0740, 3.6966, 3.7772, 3.5475, 3.2841, 3.4699, 3.7235, 3.5987, 3.3313, 3.8183,
    3.9236, 3.9008, 3.9011, 3.0470, 3.0139, 3.2072, 3.8438, 3.4823, 3.9373, 3.0125,
]


@dataclass
class ScenarioConfig:
    """One simulation setting.

    ``vertex_values`` are concentrations when ``vertex_param == "theta"`` and
    conditional variances when it is ``"sigma"``; ``edge_values`` are
    concentrations for RCON and partial correlations for RCOR.
    """

    n: int
    p: int
    model: str = "rcon"
    edge_values: list = field(default_factory=lambda: list(RCON_EDGE))
    vertex_values: list = field(default_factory=lambda: list(RCON_VERTEX))
    vertex_param: str = "theta"
    replicates: int = 20
    seed: int = 0
    estimators: list = field(default_factory=lambda: ["composite", "naive"])
    penalty: str = "l1"
    grid_size: int = 30
    grid_ratio: float = 0.01
    cbic_df: str = "classes"
    cbic_refit: bool = False
    tol: float = 1e-6
    max_sweeps: int = 500
    center: bool = True
    min_eig: float = 0.05
    max_redraws: int = 20
    name: str = "custom"

    def __post_init__(self):
        self.model = self.model.lower()
        if self.model not in ("rcon", "rcor"):
            raise DataError(f"model must be 'rcon' or 'rcor', got {self.model!r}")
        if self.vertex_param not in ("theta", "sigma"):
            raise DataError(f"vertex_param must be 'theta' or 'sigma', got {self.vertex_param!r}")
        if self.n < 2 or self.p < 1 or self.replicates < 1:
            raise DataError("need n >= 2, p >= 1 and at least one replicate")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise DataError(f"unknown estimators {bad}; choose from {list(ESTIMATORS)}")
        l, k = self.n_edge_classes, self.n_vertex_classes
        if l > self.p * (self.p - 1) // 2:
            raise DataError(f"{l} edge classes cannot be filled by {self.p * (self.p - 1) // 2} pairs")
        if k > self.p or k < 1:
            raise DataError(f"{k} vertex classes cannot be filled by {self.p} vertices")
        if any(v <= 0 for v in self.vertex_values):
            raise DataError("vertex values must be positive")
        if self.model == "rcor" and any(abs(v) >= 1 for v in self.edge_values):
            raise DataError("partial correlations must lie inside (-1, 1)")

    @property
    def n_edge_classes(self) -> int:
        return len(self.edge_values)

    @property
    def n_vertex_classes(self) -> int:
        return len(self.vertex_values)

    def true_params(self):
        edge = np.asarray(self.edge_values, dtype=float)
        vert = np.asarray(self.vertex_values, dtype=float)
        if self.model == "rcon":
            return RconParams(edge, vert if self.vertex_param == "theta" else 1.0 / vert)
        return RcorParams(edge, 1.0 / vert if self.vertex_param == "theta" else vert)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if "preset" in raw:
            base = preset(raw["preset"]).to_dict()
            base.update({k: v for k, v in raw.items() if k != "preset"})
            raw = base
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown scenario fields {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise DataError(f"invalid scenario: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)


PRESETS = {
    # unpenalized RCON, composite vs naive
    "rcon-compare": dict(n=1000, p=40, model="rcon", edge_values=RCON_EDGE,
                         vertex_values=RCON_VERTEX, replicates=20),
    # unpenalized RCOR; vertex values given as concentrations
    "rcor-compare": dict(n=1000, p=40, model="rcor", edge_values=RCOR_EDGE,
                         vertex_values=RCOR_VERTEX_THETA, vertex_param="theta", replicates=20),
    # L1 + composite BIC model selection
    "rcon-select": dict(n=500, p=60, model="rcon", edge_values=RCON_EDGE,
                         vertex_values=RCON_VERTEX, replicates=20, estimators=["penalized"]),
}


def preset(name: str, **overrides) -> ScenarioConfig:
    """Desk-scale scenario for one of the reference simulation settings."""
    if name not in PRESETS:
        raise DataError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    raw = {**PRESETS[name], "name": name, **overrides}
    raw["edge_values"] = list(raw["edge_values"])
    raw["vertex_values"] = list(raw["vertex_values"])
    return ScenarioConfig(**raw)


def _surjective(labels: np.ndarray, k: int) -> bool:
    return np.unique(labels).size == k


def random_coloring(p: int, n_edge: int, n_vertex: int, rng=None, max_tries: int = 1000
                    ) -> ColoringScheme:
    """Uniform random class labels for every vertex and every pair.

    Draws are repeated until every class is nonempty.  If that keeps
    failing (class counts close to the number of items) the last draw is
    patched by giving each class one randomly chosen member.
    """
    if n_vertex < 1 or n_vertex > p:
        raise DataError(f"cannot split {p} vertices into {n_vertex} nonempty classes")
    n_pairs = p * (p - 1) // 2
    if n_edge < 0 or n_edge > n_pairs:
        raise DataError(f"cannot split {n_pairs} pairs into {n_edge} nonempty classes")
    rng = np.random.default_rng(rng)

    def draw(count, k):
        for _ in range(max_tries):
            lab = rng.integers(k, size=count)
            if _surjective(lab, k):
                return lab
        lab = rng.integers(k, size=count)
        lab[rng.permutation(count)[:k]] = np.arange(k)
        return lab

    vlab = draw(p, n_vertex)
    iu = np.triu_indices(p, 1)
    elab = draw(n_pairs, n_edge) if n_edge else np.zeros(0, dtype=int)
    vclasses = tuple(tuple(int(v) for v in np.flatnonzero(vlab == m)) for m in range(n_vertex))
    eclasses = tuple(
        tuple((int(iu[0][t]), int(iu[1][t])) for t in np.flatnonzero(elab == s))
        for s in range(n_edge)
    )
    return ColoringScheme(p, vclasses, eclasses)


@dataclass(frozen=True, eq=False)
class TrueModel:
    """Assembled truth plus the record of any diagonal inflation."""

    scheme: ColoringScheme
    params: object
    theta: np.ndarray
    inflation: float = 1.0
    inflation_steps: int = 0

    @property
    def inflated(self) -> bool:
        return self.inflation_steps > 0


def build_true_model(params, scheme: ColoringScheme, min_eig: float = 0.05,
                     step: float = 1.05, max_factor: float = 10.0) -> TrueModel:
    """Assemble the true concentration matrix and make it safely positive definite.

    RCON truths whose smallest eigenvalue is below ``min_eig`` get all
    vertex concentrations multiplied by ``step`` until it is not.  RCOR
    truths cannot be repaired that way (the partial correlations fix the
    correlation structure), so a non-PD RCOR truth is rejected.

    Raises
    ------
    DataError
        When the required inflation exceeds ``max_factor`` or an RCOR truth is
        not positive definite.
    """
    if isinstance(params, RcorParams):
        theta = assemble_from_rcor(params, scheme)
        eig = np.linalg.eigvalsh(theta)[0]
        if eig <= 0:
            raise DataError(f"RCOR truth is not positive definite (min eigenvalue {eig:.4g})")
        return TrueModel(scheme, params, theta)

    theta = assemble_concentration(params, scheme)
    factor, steps = 1.0, 0
    while np.linalg.eigvalsh(theta)[0] < min_eig:
        factor *= step
        steps += 1
        if factor > max_factor:
            raise DataError(f"diagonal inflation beyond {max_factor}x needed for positive definiteness")
        params = RconParams(params.theta_E, params.theta_V * step)
        theta = assemble_concentration(params, scheme)
    if steps:
        logger.info("true model diagonal inflated by %.4f (%d steps)", factor, steps)
    return TrueModel(scheme, params, theta, factor, steps)


def sample_gaussian(theta0: np.ndarray, n: int, rng=None) -> np.ndarray:
    """``n`` rows from ``N(0, theta0^{-1})``.

    With ``theta0 = L L^T`` the rows are ``L^{-T} z`` for standard normal ``z``.
    """
    try:
        L = np.linalg.cholesky(theta0)
    except np.linalg.LinAlgError:
        raise DataError("concentration matrix is not positive definite") from None
    rng = np.random.default_rng(rng)
    Z = rng.standard_normal((n, theta0.shape[0]))
    return np.linalg.solve(L.T, Z.T).T


def _edge_counts(edge_hat, edge_true, sizes):
    true_nz = edge_true != 0
    est_nz = edge_hat != 0
    fn = int(np.sum(sizes[true_nz & ~est_nz]))
    fp = int(np.sum(sizes[~true_nz & est_nz]))
    return fn, fp


def evaluate_fit(estimate, truth, scheme: ColoringScheme) -> dict:
    """Error metrics of one estimate against the truth.

    ``sse`` is the squared error of the class-parameter vector (edge values
    followed by vertex concentrations).  ``sse_matrix`` is the squared
    Frobenius error of the assembled concentration matrices.  For RCOR,
    ``rho_error`` and ``sqrt_sigma_error`` are Euclidean norms over classes.
    ``fn`` / ``fp`` count vertex pairs (not classes) whose zero/nonzero
    status is wrong; ``n_true_edges`` counts pairs in nonzero classes.
    """
    params = getattr(estimate, "params", estimate)
    if type(params) is not type(truth):
        raise DataError("estimate and truth use different parametrizations")
    if len(params.edge) != scheme.n_edge_classes or len(truth.edge) != scheme.n_edge_classes:
        raise DataError("parameter lengths do not match the scheme")
    sizes = scheme.edge_sizes
    out = {}
    if isinstance(truth, RconParams):
        diff = params.as_vector() - truth.as_vector()
        out["sse"] = float(diff @ diff)
        D = assemble_concentration(params, scheme) - assemble_concentration(truth, scheme)
    else:
        out["rho_error"] = float(np.linalg.norm(params.rho_E - truth.rho_E))
        out["sqrt_sigma_error"] = float(np.linalg.norm(np.sqrt(params.sigma_V) - np.sqrt(truth.sigma_V)))
        D = assemble_from_rcor(params, scheme) - assemble_from_rcor(truth, scheme)
    out["sse_matrix"] = float(np.sum(D * D))
    out["fn"], out["fp"] = _edge_counts(np.asarray(params.edge), np.asarray(truth.edge), sizes)
    nz = np.asarray(truth.edge) != 0
    out["n_true_edges"] = int(np.sum(sizes[nz]))
    out["n_zero_edges"] = scheme.p * (scheme.p - 1) // 2 - out["n_true_edges"]
    return out


def _draw_truth(cfg: ScenarioConfig, rng) -> TrueModel:
    last = None
    for _ in range(cfg.max_redraws):
        scheme = random_coloring(cfg.p, cfg.n_edge_classes, cfg.n_vertex_classes, rng)
        try:
            return build_true_model(cfg.true_params(), scheme, cfg.min_eig)
        except DataError as exc:
            last = exc
    raise DataError(f"no admissible truth after {cfg.max_redraws} colorings: {last}")


def run_replicate(index: int, cfg: ScenarioConfig) -> list[dict]:
    """All estimator rows for replicate ``index``; failures become rows with ``error`` set."""
    rng = replicate_rng(cfg.seed, index)
    base = {"replicate": index}
    try:
        truth = _draw_truth(cfg, rng)
        X = sample_gaussian(truth.theta, cfg.n, rng)
        cov = sample_covariance(X, center=cfg.center)
    except SymGGMError as exc:
        return [{**base, "estimator": e, "error": str(exc)} for e in cfg.estimators]
    base["inflation"] = truth.inflation
    rows = []
    for name in cfg.estimators:
        row = {**base, "estimator": name}
        try:
            row.update(_run_estimator(name, cov, truth, cfg))
            row["error"] = ""
        except (SymGGMError, np.linalg.LinAlgError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            logger.debug(traceback.format_exc())
        rows.append(row)
    return rows


def _run_estimator(name: str, cov: SampleCovariance, truth: TrueModel, cfg: ScenarioConfig) -> dict:
    scheme = truth.scheme
    extra = {}
    if name == "naive":
        est = naive_estimator(cov, scheme, cfg.model)
    elif name == "composite":
        res = fit(cov, scheme, cfg.model, SolverConfig(tol=cfg.tol, max_sweeps=cfg.max_sweeps))
        est = res.params
        extra = {"converged": res.converged, "sweeps": res.sweeps_used}
    else:
        grid = default_grid(lambda_max(cov, scheme, cfg.model), cfg.grid_size, cfg.grid_ratio)
        rep = tune_lambda(cov, scheme, grid, cfg.model, PenaltySpec(cfg.penalty),
                          tol=cfg.tol, max_sweeps=cfg.max_sweeps, df=cfg.cbic_df,
                          refit=cfg.cbic_refit)
        est = rep.selected_fit.params
        extra = {"converged": rep.selected_fit.converged, "lambda": rep.selected_lambda,
                 "n_active_classes": len(rep.selected_fit.active_set)}
    return {**evaluate_fit(est, truth.params, scheme), **extra}


METRICS = ("sse", "sse_matrix", "rho_error", "sqrt_sigma_error", "fn", "fp",
           "n_true_edges", "n_zero_edges", "lambda", "inflation")


@dataclass
class ExperimentReport:
    """Per-replicate rows and per-estimator mean / standard deviation."""

    config: ScenarioConfig
    rows: list

    @property
    def failures(self) -> list:
        return [r for r in self.rows if r.get("error")]

    def values(self, estimator: str, metric: str) -> np.ndarray:
        """Metric across successful replicates, in replicate order."""
        return np.array([r[metric] for r in self.rows
                         if r["estimator"] == estimator and not r.get("error") and metric in r],
                        dtype=float)

    def summary(self) -> list[dict]:
        out = []
        for est in self.config.estimators:
            row = {"estimator": est, "n": self.config.n, "p": self.config.p,
                   "replicates_ok": int(sum(1 for r in self.rows
                                            if r["estimator"] == est and not r.get("error")))}
            for m in METRICS:
                v = self.values(est, m)
                if v.size:
                    row[f"{m}_mean"] = float(v.mean())
                    row[f"{m}_sd"] = float(v.std(ddof=1)) if v.size > 1 else 0.0
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "summary": self.summary(),
                "rows": self.rows, "n_failures": len(self.failures)}


def run_experiment(cfg: ScenarioConfig, workers: int | None = 1) -> ExperimentReport:
    """Run every replicate of ``cfg``; hard failures are recorded, not raised."""
    chunks = parallel_map(partial(run_replicate, cfg=cfg), range(cfg.replicates), workers)
    rows = [r for chunk in chunks for r in chunk]
    report = ExperimentReport(cfg, rows)
    if report.failures:
        logger.warning("%d of %d estimator runs failed", len(report.failures), len(rows))
    return report
