import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mdsclt.matrixcore import (SymmetricMatrix, double_center, norms,
                               read_matrix_csv, svd_small, top_eigs,
                               write_matrix_csv)


def centered_gram(points):
    """Oracle: P Z Z^T P computed literally with P = I - 11^T/n."""
    z = np.asarray(points, float)
    n = z.shape[0]
    p = np.eye(n) - np.ones((n, n)) / n
    return p @ z @ z.T @ p


TRIANGLE = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])


class TestSymmetricMatrix:
    def test_mirrors_upper_triangle_bit_exact(self):
        a = np.array([[1.0, 2.0, 3.0], [9.0, 4.0, 5.0], [9.0, 9.0, 6.0]])
        m = SymmetricMatrix(a)
        assert np.array_equal(m.data, m.data.T)
        assert m.data[1, 0] == 2.0  # lower triangle overwritten from upper

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.zeros((2, 3)))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.array([[0.0, np.inf], [np.inf, 0.0]]))

    def test_hollow_flag_enforced(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.eye(2), hollow=True)
        m = SymmetricMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), hollow=True)
        assert m.hollow

    def test_from_array_rejects_asymmetry(self):
        a = np.array([[0.0, 1.0], [2.0, 0.0]])
        with pytest.raises(ValueError):
            SymmetricMatrix.from_array(a)

    def test_from_array_averages_tiny_asymmetry(self):
        a = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
        m = SymmetricMatrix.from_array(a)
        assert m.data[0, 1] == m.data[1, 0]

    def test_data_read_only(self):
        m = SymmetricMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0


class TestDoubleCenter:
    def test_zero_input(self):
        b = double_center(SymmetricMatrix(np.zeros((2, 2))))
        assert np.array_equal(b.data, np.zeros((2, 2)))

    def test_n2_closed_form(self):
        # hand expansion of -1/2 P [[0,c^2],[c^2,0]] P
        c2 = 7.3
        b = double_center(SymmetricMatrix(np.array([[0.0, c2], [c2, 0.0]])))
        expect = np.array([[c2 / 4, -c2 / 4], [-c2 / 4, c2 / 4]])
        assert np.allclose(b.data, expect, rtol=0, atol=1e-14)

    def test_rejects_n1(self):
        with pytest.raises(ValueError):
            double_center(SymmetricMatrix(np.zeros((1, 1))))

    def test_triangle_eigenvalues_match_centered_gram(self):
        d = np.linalg.norm(TRIANGLE[:, None] - TRIANGLE[None, :], axis=2)
        b = double_center(SymmetricMatrix(d**2, hollow=True))
        oracle = np.sort(np.linalg.eigvalsh(centered_gram(TRIANGLE)))[::-1]
        got = np.sort(np.linalg.eigvalsh(b.data))[::-1]
        assert np.allclose(got, oracle, atol=1e-9)
        # frozen values: roots of the centered second-moment char polynomial
        assert got[0] == pytest.approx(12.964148, abs=1e-5)
        assert got[1] == pytest.approx(3.7025187, abs=1e-5)
        assert abs(got[2]) < 1e-9

    def test_rows_sum_to_zero(self, rng):
        a = rng.standard_normal((9, 9))
        b = double_center(SymmetricMatrix(a + a.T))
        scale = np.linalg.norm(b.data, "fro")
        assert np.abs(b.data.sum(axis=1)).max() <= 1e-9 * max(scale, 1.0)

    def test_projection_fixes_centered_matrix(self, rng):
        """P B P == B when B is already row- and column-centered."""
        a = rng.standard_normal((8, 8))
        b = double_center(SymmetricMatrix(a + a.T)).data
        n = 8
        p = np.eye(n) - np.ones((n, n)) / n
        assert np.allclose(p @ b @ p, b, atol=1e-9)

    def test_equals_centered_gram_for_point_clouds(self, rng):
        z = rng.standard_normal((20, 3))
        diff = z[:, None] - z[None, :]
        dsq = (diff**2).sum(axis=2)
        np.fill_diagonal(dsq, 0.0)
        b = double_center(SymmetricMatrix(dsq, hollow=True))
        oracle = centered_gram(z)
        assert np.linalg.norm(b.data - oracle, "fro") <= \
            1e-8 * np.linalg.norm(oracle, "fro")


class TestTopEigs:
    def test_identity(self):
        pair = top_eigs(SymmetricMatrix(np.eye(3)), 2)
        assert np.allclose(pair.values, [1.0, 1.0])
        assert pair.degenerate

    def test_diagonal(self):
        pair = top_eigs(SymmetricMatrix(np.diag([5.0, 2.0, -1.0])), 2)
        assert np.allclose(pair.values, [5.0, 2.0])
        assert np.allclose(np.abs(pair.vectors),
                           [[1, 0], [0, 1], [0, 0]], atol=1e-12)

    def test_triangle_char_poly_oracle(self):
        # eigenvalues of B equal those of the centered scatter [[6,-4],[-4,32/3]]
        d = np.linalg.norm(TRIANGLE[:, None] - TRIANGLE[None, :], axis=2)
        b = double_center(SymmetricMatrix(d**2, hollow=True))
        pair = top_eigs(b, 2)
        oracle = np.sort(np.roots([1.0, -(6.0 + 32.0 / 3.0),
                                   6.0 * 32.0 / 3.0 - 16.0]))[::-1]
        assert np.allclose(pair.values, oracle.real, atol=1e-9)

    def test_residual_and_orthonormality(self, rng):
        a = rng.standard_normal((40, 40))
        m = SymmetricMatrix(a + a.T)
        pair = top_eigs(m, 5)
        for i in range(5):
            res = np.linalg.norm(m.data @ pair.vectors[:, i]
                                 - pair.values[i] * pair.vectors[:, i])
            assert res <= 1e-8 * max(1.0, abs(pair.values[i]))
        gram = pair.vectors.T @ pair.vectors
        assert np.linalg.norm(gram - np.eye(5), "fro") <= 1e-10

    def test_iterative_path_matches_dense(self, rng):
        """n > dense cutoff routes through the sparse solver; answers agree."""
        z = rng.standard_normal((300, 4))
        g = centered_gram(z)
        pair = top_eigs(SymmetricMatrix.from_array(g, rtol=1e-6), 3)
        dense = np.sort(np.linalg.eigvalsh(g))[::-1][:3]
        assert np.allclose(pair.values, dense, rtol=1e-8)
        for i in range(3):
            res = np.linalg.norm(g @ pair.vectors[:, i]
                                 - pair.values[i] * pair.vectors[:, i])
            assert res <= 1e-8 * max(1.0, abs(pair.values[i]))

    def test_deterministic_bit_identical(self, rng):
        a = rng.standard_normal((30, 30))
        m = SymmetricMatrix(a + a.T)
        p1, p2 = top_eigs(m, 4), top_eigs(m, 4)
        assert np.array_equal(p1.values, p2.values)
        assert np.array_equal(p1.vectors, p2.vectors)

    def test_sign_convention(self, rng):
        a = rng.standard_normal((15, 15))
        pair = top_eigs(SymmetricMatrix(a + a.T), 3)
        for j in range(3):
            col = pair.vectors[:, j]
            assert col[np.argmax(np.abs(col))] >= 0

    def test_k_out_of_range(self):
        m = SymmetricMatrix(np.eye(3))
        with pytest.raises(ValueError):
            top_eigs(m, 0)
        with pytest.raises(ValueError):
            top_eigs(m, 4)


class TestSvdSmall:
    def test_identity(self):
        w1, s, w2 = svd_small(np.eye(2))
        assert np.allclose(s, [1.0, 1.0])

    def test_orthogonal_input(self):
        m = np.array([[0.0, -1.0], [1.0, 0.0]])
        w1, s, w2 = svd_small(m)
        assert np.allclose(s, [1.0, 1.0])
        assert np.allclose(w1 @ w2.T, m, atol=1e-12)

    def test_rotated_diagonal_roundtrip(self):
        th = np.pi / 6
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        m = rot @ np.diag([2.0, 0.5])
        w1, s, w2 = svd_small(m)
        assert np.allclose(s, [2.0, 0.5])
        assert np.linalg.norm(w1 @ np.diag(s) @ w2.T - m, "fro") <= 1e-10

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            svd_small(np.eye(33))


class TestNorms:
    def test_identity(self):
        out = norms(np.eye(3))
        assert out["spectral"] == pytest.approx(1.0)
        assert out["frobenius"] == pytest.approx(np.sqrt(3.0))
        assert out["two_to_inf"] == pytest.approx(1.0)

    def test_single_row(self):
        out = norms(np.array([[3.0, 4.0]]))
        assert out == {"spectral": pytest.approx(5.0),
                       "frobenius": pytest.approx(5.0),
                       "two_to_inf": pytest.approx(5.0)}

    def test_spectral_vs_power_iteration(self, rng):
        m = rng.standard_normal((10, 4))
        # power iteration on m^T m to 1e-12
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        mtm = m.T @ m
        prev = 0.0
        for _ in range(10000):
            w = mtm @ v
            lam = np.linalg.norm(w)
            v = w / lam
            if abs(lam - prev) < 1e-12 * max(lam, 1.0):
                break
            prev = lam
        assert norms(m)["spectral"] == pytest.approx(np.sqrt(lam), rel=1e-10)


finite_mats = arrays(np.float64, (4, 4),
                     elements=st.floats(-100, 100, allow_nan=False))


@given(a=finite_mats, b=finite_mats)
@settings(max_examples=60, deadline=None)
def test_product_norm_bound(a, b):
    """||AB||_F <= min(||A|| ||B||_F, ||B|| ||A||_F) on random instances."""
    lhs = np.linalg.norm(a @ b, "fro")
    na, nb = norms(a), norms(b)
    bound = min(na["spectral"] * nb["frobenius"],
                nb["spectral"] * na["frobenius"])
    assert lhs <= bound * (1 + 1e-9) + 1e-9


@given(a=finite_mats)
@settings(max_examples=40, deadline=None)
def test_constructed_matrix_exactly_symmetric(a):
    m = SymmetricMatrix(a)
    assert np.array_equal(m.data, m.data.T)


def test_csv_roundtrip(tmp_path, rng):
    a = rng.standard_normal((6, 6))
    m = SymmetricMatrix(a + a.T)
    path = tmp_path / "m.csv"
    write_matrix_csv(path, m)
    back = read_matrix_csv(path)
    assert np.allclose(back.data, m.data, rtol=1e-15)


def test_csv_reader_rejects_asymmetric(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n2,0\n")
    with pytest.raises(ValueError):
        read_matrix_csv(path)
