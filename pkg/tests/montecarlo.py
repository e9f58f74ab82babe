"""Monte-Carlo checks of the sandwich standard errors on a p=20 RCON model."""

from functools import partial

import numpy as np
from scipy import stats

from symggm import (
    RconParams,
    SolverConfig,
    build_true_model,
    fit_rcon,
    hessian_zz,
    random_coloring,
    sample_covariance,
    sample_gaussian,
    sandwich_inference,
)
from symggm.covariance import SampleCovariance
from symggm._parallel import parallel_map, replicate_rng
from symggm.simulation import RCON_EDGE, RCON_VERTEX

EDGE = [0.0] * 5 + RCON_EDGE[25:]
VERTEX = RCON_VERTEX[:5]
P, N = 20, 2000
Z95 = stats.norm.ppf(0.975)


def truth():
    scheme = random_coloring(P, len(EDGE), len(VERTEX), 0)
    return build_true_model(RconParams(EDGE, VERTEX), scheme)


def _replicate(index, tm, seed, m):
    rng = replicate_rng(seed, index)
    X = sample_gaussian(tm.theta, N, rng)
    res = fit_rcon(sample_covariance(X), tm.scheme, SolverConfig(tol=1e-9))
    if m == 0:
        return res.params.as_vector(), None
    rep = sandwich_inference(X, res, tm.scheme, m=m, seed=index)
    return res.params.as_vector(), rep.se


def coverage_study(replicates=100, m=200, seed=2024, workers=None):
    """Pooled count (per 100) of 95% Wald intervals that cover the true edge values."""
    tm = truth()
    out = parallel_map(partial(_replicate, tm=tm, seed=seed, m=m), range(replicates), workers)
    l = len(EDGE)
    est = np.array([o[0][:l] for o in out])
    se = np.array([o[1][:l] for o in out])
    target = tm.params.theta_E
    covered = np.abs(est - target) <= Z95 * se
    return {"per_100": 100 * covered.mean(), "per_class": covered.mean(axis=0),
            "se_ratio": se.mean(axis=0) / est.std(axis=0, ddof=1)}


def normality_study(replicates=400, seed=7, workers=None):
    """Skewness of each component of ``sqrt(n) H (theta_hat - theta_0)``."""
    tm = truth()
    out = parallel_map(partial(_replicate, tm=tm, seed=seed, m=0), range(replicates), workers)
    est = np.array([o[0] for o in out])
    # population sensitivity: the objective evaluated at C = Sigma
    H = hessian_zz(tm.params, SampleCovariance(np.linalg.inv(tm.theta), N), tm.scheme,
                   active=range(len(EDGE)))
    z = np.sqrt(N) * (est - tm.params.as_vector()) @ H.T
    return stats.skew(z, axis=0)
