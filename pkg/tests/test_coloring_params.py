import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symggm import (
    ColoringError,
    RconParams,
    RcorParams,
    assemble_concentration,
    assemble_from_rcor,
    atomic_coloring,
    disassemble_concentration,
    edge_generator,
    load_coloring,
    partial_correlations,
    structural_zero_indicator,
    validate_coloring,
    vertex_generator,
)
from symggm.datasets import data_path, math_scheme

from conftest import random_rcon, random_rcor, random_scheme


def test_math_scheme_has_four_structural_zeros():
    scheme = math_scheme()
    assert scheme.p == 5
    assert scheme.n_vertex_classes == 3 and scheme.n_edge_classes == 4
    assert len(scheme.structural_zeros) == 4
    labels = [scheme.vertex_label(j) for j in range(5)]
    assert labels == ["me", "ve", "al", "an", "st"]


def test_math_scheme_by_index_matches_labels():
    raw = {"p": 5,
           "vertex_classes": [[3], [1, 5], [2, 4]],
           "edge_classes": [[[3, 4]], [[4, 5]], [[1, 2], [1, 3]], [[2, 3], [3, 5]]]}
    scheme = validate_coloring(raw)
    assert len(scheme.structural_zeros) == 4
    named = math_scheme()
    assert set(map(frozenset, scheme.vertex_classes)) == set(map(frozenset, named.vertex_classes))
    assert set(scheme.edge_classes) == set(named.edge_classes)


def test_atomic_p3_from_json():
    raw = {"p": 3, "vertex_classes": [[1], [2], [3]],
           "edge_classes": [[[1, 2]], [[1, 3]], [[2, 3]]]}
    scheme = validate_coloring(raw)
    assert scheme.structural_zeros == ()
    assert scheme.edge_classes == atomic_coloring(3).edge_classes


@pytest.mark.parametrize("raw, fragment", [
    ({"p": 3, "vertex_classes": [[1], [2], [3]], "edge_classes": [[[1, 1]]]}, "edge class 1"),
    ({"p": 3, "vertex_classes": [[1, 2], [2], [3]], "edge_classes": []}, "vertex class 2"),
    ({"p": 3, "vertex_classes": [[1], [2], [4]], "edge_classes": []}, "vertex class 3"),
    ({"p": 3, "vertex_classes": [[1], [2], [3]], "edge_classes": [[[1, 2]], [[2, 1]]]}, "edge class 2"),
    ({"p": 3, "vertex_classes": [[1], [2], [3]], "edge_classes": [[]]}, "edge class 1"),
    ({"p": 3, "vertex_classes": [[1], [2]], "edge_classes": []}, "3"),
])
def test_invalid_colorings_name_the_class(raw, fragment):
    with pytest.raises(ColoringError, match=fragment):
        validate_coloring(raw)


def test_load_coloring_reports_bad_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ColoringError):
        load_coloring(bad)


def test_bundled_scheme_file_roundtrip():
    raw = json.loads(data_path("mathmarks_scheme.json").read_text())
    scheme = validate_coloring(raw)
    again = validate_coloring(scheme.to_dict())
    assert again.edge_classes == scheme.edge_classes
    assert again.vertex_classes == scheme.vertex_classes


def test_edge_generator_single_pair():
    scheme = validate_coloring({"p": 3, "vertex_classes": [[1, 2, 3]], "edge_classes": [[[1, 2]]]})
    T = edge_generator(scheme, 0)
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 0] = 1
    np.testing.assert_array_equal(T, expected)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 9))
def test_generators_partition_off_diagonal(seed, p):
    scheme = random_scheme(p, np.random.default_rng(seed))
    T = scheme.edge_generators
    total = T.sum(axis=0) + structural_zero_indicator(scheme)
    np.testing.assert_array_equal(total, np.ones((p, p)) - np.eye(p))
    assert set(np.unique(T)) <= {0.0, 1.0}
    for s in range(scheme.n_edge_classes):
        np.testing.assert_array_equal(T[s], T[s].T)
    # distinct classes never overlap
    assert T.sum(axis=0).max() <= 1
    V = sum(vertex_generator(scheme, m) for m in range(scheme.n_vertex_classes))
    np.testing.assert_array_equal(V, np.eye(p))


def test_identity_assembly():
    scheme = atomic_coloring(3)
    theta = assemble_concentration(RconParams(np.zeros(3), np.ones(3)), scheme)
    np.testing.assert_array_equal(theta, np.eye(3))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 8))
def test_assembly_roundtrip(seed, p):
    rng = np.random.default_rng(seed)
    scheme = random_scheme(p, rng)
    params = random_rcon(scheme, rng)
    theta = assemble_concentration(params, scheme)
    np.testing.assert_array_equal(theta, theta.T)
    back = disassemble_concentration(theta, scheme)
    np.testing.assert_allclose(back.as_vector(), params.as_vector(), rtol=0, atol=1e-15)
    zeros = structural_zero_indicator(scheme) > 0
    assert np.all(theta[zeros] == 0)


def test_rcor_assembly_small_cases():
    scheme = atomic_coloring(2)
    theta = assemble_from_rcor(RcorParams([0.5], [1.0, 1.0]), scheme)
    np.testing.assert_allclose(theta, [[1.0, -0.5], [-0.5, 1.0]])
    theta = assemble_from_rcor(RcorParams([0.0], [2.0, 4.0]), scheme)
    np.testing.assert_allclose(theta, np.diag([0.5, 0.25]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 8))
def test_partial_correlations_invert_rcor_assembly(seed, p):
    rng = np.random.default_rng(seed)
    scheme = random_scheme(p, rng)
    params = random_rcor(scheme, rng)
    rho = partial_correlations(assemble_from_rcor(params, scheme))
    for s, cls in enumerate(scheme.edge_classes):
        for i, j in cls:
            assert rho[i, j] == pytest.approx(params.rho_E[s], abs=1e-14)
    sigma = 1.0 / np.diag(assemble_from_rcor(params, scheme))
    np.testing.assert_allclose(sigma, params.sigma_V[scheme.vertex_class_of])


@pytest.mark.parametrize("bad", [
    lambda: RconParams([0.1], [0.0]),
    lambda: RconParams([np.nan], [1.0]),
    lambda: RcorParams([1.0], [1.0]),
    lambda: RcorParams([0.1], [-1.0]),
])
def test_parameter_domain_checks(bad):
    with pytest.raises(ValueError):
        bad()


def test_permuted_scheme_relabels_consistently():
    rng = np.random.default_rng(3)
    scheme = random_scheme(6, rng)
    perm = rng.permutation(6)
    params = random_rcon(scheme, rng)
    a = assemble_concentration(params, scheme)
    b = assemble_concentration(params, scheme.permuted(perm))
    np.testing.assert_array_equal(b, a[np.ix_(perm, perm)])
