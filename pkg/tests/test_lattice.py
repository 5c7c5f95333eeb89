import math

import numpy as np
import pytest
import scipy.linalg

from llsh import lattice as lat
from llsh.errors import DegenerateBasisError, InvalidArgumentError


def lu_abs_det(mat):
    # independent determinant via an explicit LU factorization
    _, _, u = scipy.linalg.lu(mat)
    return float(np.abs(np.prod(np.diag(u))))


def test_normalize_identity():
    L = lat.normalize_det(lat.basis_zk(4))
    assert np.array_equal(L.basis.columns, np.eye(4))
    assert np.array_equal(L.reduced_basis.columns, np.eye(4))


def test_normalize_already_det_one():
    b = lat.Basis(np.diag([2.0, 0.5]))
    L = lat.normalize_det(b)
    # determinant already 1: basis unchanged, reduction may reorder columns
    assert np.array_equal(L.basis.columns, np.diag([2.0, 0.5]))
    norms = sorted(np.linalg.norm(L.reduced_basis.columns, axis=0))
    assert norms == pytest.approx([0.5, 2.0], rel=1e-12)


def test_normalize_random_det_via_lu():
    rng = np.random.default_rng(2)
    for _ in range(20):
        b = lat.Basis(rng.normal(size=(6, 6)))
        L = lat.normalize_det(b)
        assert abs(lu_abs_det(L.basis.columns) - 1.0) < 1e-9


def test_normalize_rejects_singular():
    # |det| below the 1e-30 floor, even though the Basis proxy accepts it
    with pytest.raises(DegenerateBasisError):
        lat.normalize_det(lat.Basis(np.diag([1.0, 1.0, 1.0, 1e-35])))
    # exactly dependent columns are rejected at Basis construction
    cols = np.eye(4)
    cols[:, 3] = cols[:, 2]
    with pytest.raises(DegenerateBasisError):
        lat.Basis(cols)


def test_basis_validation():
    with pytest.raises(InvalidArgumentError):
        lat.Basis(np.zeros((3, 2)))
    with pytest.raises(DegenerateBasisError):
        lat.Basis(np.zeros((3, 3)))
    with pytest.raises(InvalidArgumentError):
        lat.Basis(np.full((2, 2), np.nan))


def test_lll_identity_fixed_point():
    out = lat.lll_reduce(lat.basis_zk(5))
    assert np.array_equal(out.columns, np.eye(5))


def test_lll_delta_range():
    with pytest.raises(InvalidArgumentError):
        lat.lll_reduce(lat.basis_zk(3), delta=0.2)
    with pytest.raises(InvalidArgumentError):
        lat.lll_reduce(lat.basis_zk(3), delta=1.0)


def test_lll_finds_short_vector():
    # columns b1 = (1, 0.999), b2 = (0, 0.001): shortest vector is (0, 0.001)
    basis = lat.Basis(np.array([[1.0, 0.0], [0.999, 0.001]]))
    reduced = lat.lll_reduce(basis)
    # brute-force shortest over the coefficient box [-50, 50]^2
    zs = np.stack(np.meshgrid(np.arange(-50, 51), np.arange(-50, 51)), -1).reshape(-1, 2)
    zs = zs[np.any(zs != 0, axis=1)]
    norms = np.linalg.norm(zs @ basis.columns.T, axis=1)
    shortest = norms.min()
    assert np.linalg.norm(reduced.columns[:, 0]) == pytest.approx(shortest, rel=1e-12)


def test_lll_gm_quality_vs_enumeration():
    from llsh import randlat

    for seed in range(5):
        L = randlat.sample_gm(randlat.GmParams(k=8, seed=seed))
        b1 = np.linalg.norm(L.reduced_basis.columns[:, 0])
        # brute minimum over the +-3 coefficient box of the reduced basis
        # is an upper bound on lambda_1 reachable by the oracle
        axes = [np.arange(-3, 4)] * 8
        zs = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 8)
        zs = zs[np.any(zs != 0, axis=1)]
        norms = np.linalg.norm(zs @ L.reduced_basis.columns.T, axis=1)
        lam1_ub = norms.min()
        assert b1 <= 2 ** ((8 - 1) / 2) * lam1_ub * (1 + 1e-9)


def test_lll_idempotent_norm_multiset():
    rng = np.random.default_rng(9)
    for _ in range(10):
        b = lat.Basis(rng.normal(size=(7, 7)))
        once = lat.lll_reduce(b)
        twice = lat.lll_reduce(once)
        n1 = sorted(np.linalg.norm(once.columns, axis=0))
        n2 = sorted(np.linalg.norm(twice.columns, axis=0))
        assert np.allclose(n1, n2, rtol=1e-9)


def test_lll_lovasz_and_size_conditions():
    rng = np.random.default_rng(31)
    delta = 0.99
    for _ in range(10):
        b = lat.Basis(rng.normal(size=(8, 8)) * 3)
        red = lat.lll_reduce(b, delta)
        q, r = np.linalg.qr(red.columns)
        d = np.abs(np.diag(r))
        mu = np.zeros((8, 8))
        for i in range(8):
            for j in range(i):
                mu[i, j] = (red.columns[:, i] @ (q[:, j] * np.sign(r[j, j]))) / d[j]
        assert np.max(np.abs(np.tril(mu, -1))) <= 0.5 + 1e-9
        for i in range(1, 8):
            assert d[i] ** 2 >= (delta - mu[i, i - 1] ** 2) * d[i - 1] ** 2 - 1e-9 * d[i - 1] ** 2


def test_sample_fundamental_zk_uniform():
    from scipy.stats import kstest

    L = lat.lattice_zk(3)
    rng = np.random.default_rng(4)
    pts = np.array([lat.sample_fundamental(L, rng) for _ in range(100_000)])
    critical = 1.628 / math.sqrt(len(pts))  # 1% critical value
    for dim in range(3):
        stat = kstest(pts[:, dim], "uniform").statistic
        assert stat < critical


def test_sample_fundamental_draws_differ():
    L = lat.lattice_zk(5)
    rng = np.random.default_rng(6)
    a = lat.sample_fundamental(L, rng)
    b = lat.sample_fundamental(L, rng)
    assert not np.array_equal(a, b)


def test_sample_fundamental_mean():
    basis = lat.Basis(np.array([[1.0, 0.0], [0.5, 1.0]]))
    L = lat.Lattice(basis)
    rng = np.random.default_rng(12)
    pts = np.array([lat.sample_fundamental(L, rng) for _ in range(100_000)])
    expected = basis.columns @ np.array([0.5, 0.5])
    # per-coordinate std of B u is bounded by row norms / sqrt(12)
    se = np.linalg.norm(basis.columns, axis=1) / math.sqrt(12 * len(pts))
    assert np.all(np.abs(pts.mean(axis=0) - expected) <= 3 * se)


def test_basis_file_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    b = lat.Basis(rng.normal(size=(5, 5)))
    path = tmp_path / "basis.txt"
    lat.save_basis(b, path)
    again = lat.load_basis(path)
    assert np.array_equal(b.columns, again.columns)


def test_load_lattice_normalizes(tmp_path):
    from llsh import randlat

    params = randlat.GmParams(k=6, seed=11)
    raw = randlat.gm_raw_basis(params, np.random.default_rng(11))
    path = tmp_path / "gm.txt"
    lat.save_basis(raw, path)
    L = lat.load_lattice(path)
    assert abs(lu_abs_det(L.basis.columns) - 1.0) < 1e-9


def test_load_basis_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("")
    with pytest.raises(InvalidArgumentError):
        lat.load_basis(path)
    path.write_text("2\n1 0\n")
    with pytest.raises(InvalidArgumentError):
        lat.load_basis(path)
    path.write_text("2\n1 0 0\n0 1 0\n")
    with pytest.raises(InvalidArgumentError):
        lat.load_basis(path)


def test_unimodular_invariant():
    # reduced = basis * U with integer unimodular U, checked in the
    # well-conditioned frame
    rng = np.random.default_rng(13)
    for _ in range(10):
        b = lat.Basis(rng.normal(size=(6, 6)))
        L = lat.normalize_det(b)
        u = np.linalg.solve(L.reduced_basis.columns, L.basis.columns)
        assert np.max(np.abs(u - np.rint(u))) < 1e-6
        assert abs(abs(np.linalg.det(np.rint(u))) - 1.0) < 1e-6


def test_e8_basis_det_one():
    assert abs(lu_abs_det(lat.basis_e8().columns) - 1.0) < 1e-12


def test_dk_basis_det_two():
    for k in (2, 3, 6, 11):
        assert abs(lu_abs_det(lat.basis_dk(k).columns) - 2.0) < 1e-9
