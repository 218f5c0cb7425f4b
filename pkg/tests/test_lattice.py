import math

import numpy as np
import pytest

import oddkit
from oddkit import LatticeMatrix

from conftest import (
    dense_derivation,
    dense_difference,
    dense_modulate,
    offset_grid,
    random_matrix,
    single_diagonal,
)


def test_construction_validates():
    with pytest.raises(ValueError):
        LatticeMatrix(3, 4)
    with pytest.raises(ValueError):
        LatticeMatrix(1, 0)
    with pytest.raises(IndexError):
        LatticeMatrix(1, 2, {(5,): np.ones(0)})
    with pytest.raises(ValueError):
        LatticeMatrix(1, 2, {(1,): np.ones(3)})  # shape must be 2W+1-|m| = 4


def test_zero_diagonals_dropped():
    a = LatticeMatrix(1, 2, {(0,): np.ones(5), (1,): np.zeros(4)})
    assert a.offsets() == [(0,)]
    assert a == LatticeMatrix(1, 2, {(0,): np.ones(5)})


def test_immutable():
    a = LatticeMatrix.identity(1, 2)
    with pytest.raises(AttributeError):
        a.window = 3
    with pytest.raises((ValueError, RuntimeError)):
        a.side_diagonal(0)  # read view of stored array
        a._diags[(0,)][0] = 5.0


def test_identity_side_diagonals():
    a = LatticeMatrix.identity(1, 3)
    assert np.array_equal(a.side_diagonal(0), np.ones(7))
    assert np.array_equal(a.side_diagonal(1), np.zeros(6))
    with pytest.raises(IndexError):
        a.side_diagonal(7)


def test_side_diagonal_of_exponential_profile():
    # A(k, l) = 2^{-|k-l|} on W=4; offset 2 gives seven 0.25 entries
    w = 4
    diff = offset_grid(1, w)[..., 0]
    a = LatticeMatrix.from_dense(2.0 ** (-np.abs(diff)), window=w)
    d = a.side_diagonal(2)
    assert d.shape == (7,)
    assert np.allclose(d, 0.25)


def test_band_truncate():
    a = random_matrix(1, 3)
    assert oddkit.band_truncate(a, 0) == LatticeMatrix.zeros(1, 3)
    eye = LatticeMatrix.identity(1, 3)
    assert oddkit.band_truncate(eye, 1) == eye
    b = LatticeMatrix(
        1, 3, {(0,): np.ones(7), (1,): np.ones(6), (2,): np.ones(5)}
    )
    assert oddkit.band_truncate(b, 2).offsets() == [(0,), (1,)]
    # matches dense masking
    diff = offset_grid(1, 3)[..., 0]
    dense = a.to_dense().copy()
    dense[np.abs(diff) >= 4] = 0.0
    assert oddkit.band_truncate(a, 4).allclose(LatticeMatrix.from_dense(dense, window=3))


def test_bandwidth():
    assert oddkit.bandwidth(LatticeMatrix.zeros(1, 2)) == 0
    assert oddkit.bandwidth(LatticeMatrix.identity(1, 2)) == 1
    b = LatticeMatrix(1, 3, {(0,): np.ones(7), (-2,): np.ones(5)})
    assert oddkit.bandwidth(b) == 3


def test_multiply_identity_and_single_diagonals():
    a = random_matrix(2, 3)
    eye = LatticeMatrix.identity(1, 3)
    assert oddkit.multiply(eye, a).allclose(a)
    u = single_diagonal(3, 1)
    v = single_diagonal(3, 2)
    prod = oddkit.multiply(u, v)
    assert prod.offsets() == [(3,)]
    assert np.allclose(prod.side_diagonal(3), 1.0)


def test_multiply_matches_dense():
    for dim, w in ((1, 4), (2, 2)):
        a = random_matrix(10 + dim, w, dim=dim)
        b = random_matrix(20 + dim, w, dim=dim)
        got = oddkit.multiply(a, b).to_dense()
        assert np.allclose(got, a.to_dense() @ b.to_dense(), atol=1e-12)


def test_matmul_operator():
    a = random_matrix(3, 2)
    b = random_matrix(4, 2)
    assert (a @ b).allclose(oddkit.multiply(a, b))


def test_adjoint():
    for dim, w in ((1, 4), (2, 2)):
        a = random_matrix(30 + dim, w, dim=dim)
        assert oddkit.adjoint(oddkit.adjoint(a)) == a
        assert np.allclose(oddkit.adjoint(a).to_dense(), a.to_dense().conj().T)


def test_arithmetic_matches_dense():
    a = random_matrix(5, 3)
    b = random_matrix(6, 3)
    assert np.allclose((a + b).to_dense(), a.to_dense() + b.to_dense())
    assert np.allclose((a - b).to_dense(), a.to_dense() - b.to_dense())
    assert np.allclose((2.5j * a).to_dense(), 2.5j * a.to_dense())
    assert np.allclose((-a).to_dense(), -a.to_dense())
    with pytest.raises(ValueError):
        a + random_matrix(5, 4)


def test_envelope_matches_dense_sup():
    a = random_matrix(7, 3, density=0.6)
    offs, env = a.envelope()
    dense = a.to_dense()
    diff = offset_grid(1, 3)[..., 0]
    for off, e in zip(offs, env):
        mask = diff == off[0]
        assert math.isclose(e, float(np.abs(dense[mask]).max()))


def test_modulate_fixed_points():
    a = random_matrix(8, 3)
    assert oddkit.modulate(a, 0.0) == a
    assert oddkit.modulate(a, 1.0) == a  # periodicity, bit exact
    d2 = random_matrix(9, 2, dim=2)
    assert oddkit.modulate(d2, (0.0, 1.0)) == d2


def test_modulate_single_diagonal_quarter_turn():
    u = single_diagonal(3, 1, value=1.0)
    got = oddkit.modulate(u, 0.25).side_diagonal(1)
    assert np.allclose(got, 1j)


def test_modulate_matches_dense():
    for dim, w in ((1, 4), (2, 2)):
        a = random_matrix(40 + dim, w, dim=dim)
        diff = offset_grid(dim, w)
        for t in ([0.3] if dim == 1 else [(0.3, -0.2)]):
            got = oddkit.modulate(a, t).to_dense()
            assert np.allclose(got, dense_modulate(a.to_dense(), diff, t), atol=1e-13)


def test_modulate_group_law():
    a = random_matrix(11, 3)
    lhs = oddkit.modulate(oddkit.modulate(a, 0.37), -0.18)
    assert lhs.allclose(oddkit.modulate(a, 0.19), rtol=1e-12, atol=1e-14)


def test_difference_trivial_cases():
    a = random_matrix(12, 3)
    assert oddkit.difference(a, 0.0) == LatticeMatrix.zeros(1, 3)
    d = LatticeMatrix(1, 3, {(0,): np.ones(7)})
    assert oddkit.difference(d, 0.41, 2) == LatticeMatrix.zeros(1, 3)


def test_difference_single_diagonal_half_turn():
    u = single_diagonal(3, 1)
    got = oddkit.difference(u, 0.5).side_diagonal(1)
    assert np.allclose(got, -2.0)  # e^{i pi} - 1


def test_difference_matches_dense():
    for dim, w in ((1, 4), (2, 2)):
        a = random_matrix(50 + dim, w, dim=dim)
        diff = offset_grid(dim, w)
        t = 0.23 if dim == 1 else (0.23, 0.11)
        for order in (1, 2, 3):
            got = oddkit.difference(a, t, order).to_dense()
            want = dense_difference(a.to_dense(), diff, t, order)
            assert np.allclose(got, want, atol=1e-12)


def test_difference_binomial_identity():
    a = random_matrix(13, 3)
    t = 0.29
    for k in (1, 2, 3):
        acc = LatticeMatrix.zeros(1, 3)
        for j in range(k + 1):
            acc = acc + ((-1.0) ** (k - j) * math.comb(k, j)) * oddkit.modulate(a, j * t)
        assert oddkit.difference(a, t, k).allclose(acc, rtol=1e-12, atol=1e-13)


def test_derivation_trivial_cases():
    a = random_matrix(14, 3)
    assert oddkit.derivation(a, 0) == a
    d = LatticeMatrix(1, 3, {(0,): np.ones(7)})
    assert oddkit.derivation(d, 2) == LatticeMatrix.zeros(1, 3)


def test_derivation_single_diagonal():
    u = single_diagonal(3, 2)
    got = oddkit.derivation(u, 1).side_diagonal(2)
    assert np.allclose(got, 4j * np.pi)


def test_derivation_matches_dense():
    a1 = random_matrix(15, 4)
    diff1 = offset_grid(1, 4)
    assert np.allclose(
        oddkit.derivation(a1, 2).to_dense(),
        dense_derivation(a1.to_dense(), diff1, 2),
        atol=1e-10,
    )
    a2 = random_matrix(16, 2, dim=2)
    diff2 = offset_grid(2, 2)
    assert np.allclose(
        oddkit.derivation(a2, (1, 1)).to_dense(),
        dense_derivation(a2.to_dense(), diff2, (1, 1)),
        atol=1e-10,
    )


def test_leibniz_identity_small():
    a = random_matrix(17, 3)
    b = random_matrix(18, 3)
    t = 0.41
    lhs = oddkit.difference(a @ b, t)
    rhs = oddkit.modulate(a, t) @ oddkit.difference(b, t) + oddkit.difference(a, t) @ b
    assert lhs.allclose(rhs, rtol=1e-11, atol=1e-12)


def test_dense_round_trip():
    for dim, w in ((1, 4), (2, 2)):
        a = random_matrix(60 + dim, w, dim=dim, density=0.5)
        assert LatticeMatrix.from_dense(a.to_dense(), dim=dim, window=w) == a


def test_json_round_trip_bit_exact(tmp_path):
    for dim, w in ((1, 5), (2, 2)):
        a = random_matrix(70 + dim, w, dim=dim, density=0.7)
        path = tmp_path / f"m{dim}.json"
        oddkit.save_json(a, path)
        assert oddkit.load_json(path) == a  # == is bit-exact equality
    d = oddkit.to_json_dict(a)
    assert d["dim"] == 2 and d["window"] == 2
    assert oddkit.from_json_dict(d) == a


def test_csv_import(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("# k, l, re, im\n0,0,1.0,0.0\n1,0,0.5,-0.5\n-2,1,0.0,2.0\n")
    a = oddkit.load_csv(path)
    assert a.window == 2
    dense = a.to_dense()
    assert dense[2, 2] == 1.0
    assert dense[3, 2] == 0.5 - 0.5j
    assert dense[0, 3] == 2.0j


def test_equality_and_hash():
    a = random_matrix(19, 2)
    b = LatticeMatrix(1, 2, dict(a.diagonals()))
    assert a == b and hash(a) == hash(b)
    assert a != LatticeMatrix.identity(1, 2)
    assert a != "not a matrix"
