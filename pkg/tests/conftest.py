import numpy as np
import pytest

from symggm.coloring import ColoringScheme
from symggm.covariance import sample_covariance
from symggm.params import RconParams, RcorParams


def random_scheme(p, rng, n_edge=None, n_vertex=None, zero_frac=0.25) -> ColoringScheme:
    """Random coloring with some structural zeros; every class nonempty."""
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    n_edge = n_edge or max(1, len(pairs) // 2)
    n_vertex = n_vertex or max(1, p // 2)
    vlab = rng.permutation(np.r_[np.arange(n_vertex), rng.integers(n_vertex, size=p - n_vertex)])
    n_zero = int(zero_frac * (len(pairs) - n_edge))
    pool = np.r_[np.arange(n_edge), np.full(n_zero, -1),
                 rng.integers(n_edge, size=len(pairs) - n_edge - n_zero)]
    elab = rng.permutation(pool)
    vc = tuple(tuple(int(v) for v in np.flatnonzero(vlab == m)) for m in range(n_vertex))
    ec = tuple(tuple(pairs[t] for t in np.flatnonzero(elab == s)) for s in range(n_edge))
    return ColoringScheme(p, vc, ec)


def random_cov(p, rng, n=200, center=True):
    W = rng.normal(size=(p, p))
    L = np.linalg.cholesky(W @ W.T / p + 0.5 * np.eye(p))
    X = rng.normal(size=(n, p)) @ L.T
    return sample_covariance(X, center=center)


def random_rcon(scheme, rng, scale=0.15) -> RconParams:
    return RconParams(rng.uniform(-scale, scale, scheme.n_edge_classes),
                      rng.uniform(0.8, 2.0, scheme.n_vertex_classes))


def random_rcor(scheme, rng, scale=0.3) -> RcorParams:
    return RcorParams(rng.uniform(-scale, scale, scheme.n_edge_classes),
                      rng.uniform(0.5, 2.0, scheme.n_vertex_classes))


def instance(seed, p, model="rcon", n=200):
    rng = np.random.default_rng(seed)
    scheme = random_scheme(p, rng)
    cov = random_cov(p, rng, n)
    params = random_rcon(scheme, rng) if model == "rcon" else random_rcor(scheme, rng)
    return scheme, cov, params


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
