"""Smoke tests for the python extension module."""
import math

import numpy as np
import pytest

import fdsketch


@pytest.fixture(scope="module")
def matrix():
    rng = np.random.default_rng(7)
    return rng.standard_normal((300, 24))


def test_fd_sketch_covariance_bound(matrix):
    ell = 8
    sk = fdsketch.FdSketch(ell, matrix.shape[1], "fast")
    sk.append(matrix)
    b, delta = sk.finalize()
    assert b.shape == (ell, matrix.shape[1])
    assert delta >= 0.0
    err = fdsketch.covariance_error(matrix, b)
    assert err <= fdsketch.fd_bound_covar(ell) + 1e-8

    # the dense numpy cross-check of the same guarantee
    diff = matrix.T @ matrix - b.T @ b
    eigs = np.linalg.eigvalsh(diff)
    assert eigs.min() >= -1e-8 * np.sum(matrix**2)
    assert eigs.max() <= delta + 1e-8 * np.sum(matrix**2)


def test_variants_and_append_row(matrix):
    row = matrix[0]
    for variant in ("simple", "fast", "bounded"):
        sk = fdsketch.FdSketch(4, matrix.shape[1], variant)
        sk.append(row)
        assert sk.rows_seen == 1
        b, delta = sk.finalize()
        # a single row is preserved up to rotation/sign conventions
        assert np.allclose(b.T @ b, np.outer(row, row), atol=1e-12)
        assert delta == 0.0


def test_merge_keeps_guarantees(matrix):
    half = matrix.shape[0] // 2
    s1 = fdsketch.FdSketch(8, matrix.shape[1])
    s2 = fdsketch.FdSketch(8, matrix.shape[1])
    s1.append(matrix[:half])
    s2.append(matrix[half:])
    merged = fdsketch.merge(s1, s2)
    assert merged.rows_seen == matrix.shape[0]
    b, delta = merged.finalize()
    assert fdsketch.covariance_error(matrix, b) <= 1.0 / 8 + 1e-8
    assert delta >= s1.delta + s2.delta


def test_projection_error_and_bounds(matrix):
    b = fdsketch.sketch(matrix, "fd-fast", ell=12)
    ratio = fdsketch.projection_error(matrix, b, 4)
    assert 1.0 - 1e-6 <= ratio <= fdsketch.fd_bound_proj(12, 4) + 1e-8


def test_baselines_shapes_and_unbiased_norm(matrix):
    for algo in ("sample", "hash", "project", "brute", "naive"):
        b = fdsketch.sketch(matrix, algo, ell=6, seed=3)
        assert b.shape == (6, matrix.shape[1])
    z = fdsketch.sketch(matrix, "naive", ell=6)
    assert not z.any()


def test_thin_svd_reconstruction():
    rng = np.random.default_rng(11)
    m = rng.standard_normal((5, 9))
    u, sigma, vt = fdsketch.thin_svd(m)
    rebuilt = u @ np.diag(sigma) @ vt
    assert np.allclose(rebuilt, m, atol=1e-10 * np.linalg.norm(m))
    assert np.allclose(sigma, np.linalg.svd(m, compute_uv=False), atol=1e-9)


def test_synthetic_shape_and_determinism():
    a1 = fdsketch.gen_synthetic(n=50, d=16, m=3, zeta=10.0, seed=2)
    a2 = fdsketch.gen_synthetic(n=50, d=16, m=3, zeta=10.0, seed=2)
    assert a1.shape == (50, 16)
    assert (a1 == a2).all()


def test_matrix_file_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    m = rng.standard_normal((7, 3))
    path = str(tmp_path / "m.fdmx")
    fdsketch.write_matrix(path, m)
    assert (fdsketch.read_matrix(path) == m).all()


def test_sketch_file_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    m = rng.standard_normal((40, 6))
    sk = fdsketch.FdSketch(3, 6)
    sk.append(m)
    path = str(tmp_path / "s.fdsk")
    sk.save(path)
    loaded = fdsketch.FdSketch.load(path)
    assert loaded.rows_seen == 40
    b1, d1 = sk.finalize()
    b2, d2 = loaded.finalize()
    assert (b1 == b2).all()
    assert d1 == d2


def test_frequent_items_bound():
    ell, n = 5, 4000
    rng = np.random.default_rng(13)
    items = rng.zipf(1.7, size=n) % 60
    fi = fdsketch.FiSummary(ell)
    truth = {}
    for item in items:
        fi.update(int(item))
        truth[int(item)] = truth.get(int(item), 0) + 1
    for item, f in truth.items():
        err = f - fi.estimate(item)
        assert 0.0 <= err <= n / ell


def test_input_validation():
    with pytest.raises(ValueError):
        fdsketch.FdSketch(1, 4)
    with pytest.raises(ValueError):
        fdsketch.sketch(np.zeros((3, 3)), "bogus", ell=2)
    sk = fdsketch.FdSketch(2, 4)
    with pytest.raises(ValueError):
        sk.append(np.ones(3))
