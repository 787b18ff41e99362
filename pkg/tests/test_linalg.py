import numpy as np
import pytest

from madmm.errors import (
    DimensionMismatch,
    NonpositiveDiagonal,
    NonSymmetric,
    SingularMatrix,
)
from madmm.linalg import (
    block_sgs_split,
    eigenvalues,
    matrix_rank_elim,
    sgs_split,
    solve_linear,
)

COUNTER_A = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 2.0], [1.0, 2.0, 2.0]])


def cofactor_det(m):
    """Recursive cofactor determinant; independent of the LU path."""
    n = m.shape[0]
    if n == 1:
        return m[0, 0]
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * m[0, j] * cofactor_det(minor)
    return total


def bisect_root(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestSolveLinear:
    def test_identity(self):
        x = solve_linear(np.eye(3), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(x, [1.0, 2.0, 3.0], atol=1e-14)

    def test_diagonal(self):
        x = solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 8.0]))
        np.testing.assert_allclose(x, [1.0, 2.0], atol=1e-14)

    def test_counterexample_matrix(self):
        x = solve_linear(COUNTER_A, np.array([3.0, 4.0, 5.0]))
        np.testing.assert_allclose(x, [1.0, 1.0, 1.0], atol=1e-12)

    def test_matrix_rhs(self):
        inv = solve_linear(COUNTER_A, np.eye(3))
        np.testing.assert_allclose(inv @ COUNTER_A, np.eye(3), atol=1e-12)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrix):
            solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))

    def test_non_square_raises(self):
        with pytest.raises(DimensionMismatch):
            solve_linear(np.ones((2, 3)), np.ones(2))

    def test_residual_property_random(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(1, 21))
            m = rng.standard_normal((n, n)) + n * np.eye(n)
            rhs = rng.standard_normal(n)
            x = solve_linear(m, rhs)
            assert np.linalg.norm(m @ x - rhs) <= 1e-10 * (1 + np.linalg.norm(rhs))


class TestEigenvalues:
    def test_diagonal(self):
        vals = eigenvalues(np.diag([1.0, 2.0, 3.0]))
        np.testing.assert_allclose([v.real for v in vals], [1.0, 2.0, 3.0], atol=1e-12)
        assert all(abs(v.imag) < 1e-12 for v in vals)

    def test_rotation(self):
        vals = eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
        np.testing.assert_allclose([v.imag for v in vals], [-1.0, 1.0], atol=1e-12)
        np.testing.assert_allclose([v.real for v in vals], [0.0, 0.0], atol=1e-12)

    def test_counterexample_gram_vs_bisection_oracle(self):
        # char poly of A^T A is t^3 - 18 t^2 + 9 t - 1 (trace 18, minor sum 9, det 1)
        ata = COUNTER_A.T @ COUNTER_A
        np.testing.assert_allclose(ata, [[3, 4, 5], [4, 6, 7], [5, 7, 9]])

        def p(t):
            return cofactor_det(t * np.eye(3) - ata)

        roots = []
        grid = np.linspace(1e-9, 20.0, 20001)
        vals = [p(t) for t in grid]
        for i in range(len(grid) - 1):
            if vals[i] * vals[i + 1] < 0:
                roots.append(bisect_root(p, grid[i], grid[i + 1]))
        assert len(roots) == 3
        solver_vals = sorted(v.real for v in eigenvalues(ata))
        np.testing.assert_allclose(solver_vals, sorted(roots), atol=1e-9)
        assert all(r > 0 for r in roots)

    def test_product_matches_cofactor_det(self):
        rng = np.random.default_rng(5)
        for _ in range(15):
            n = int(rng.integers(1, 9))
            m = rng.standard_normal((n, n))
            det = cofactor_det(m)
            prod = np.prod(np.array(eigenvalues(m)))
            assert abs(prod - det) <= 1e-6 * max(1.0, abs(det))

    def test_dimension_cap(self):
        with pytest.raises(DimensionMismatch):
            eigenvalues(np.eye(65))


class TestSgsSplit:
    def test_diagonal_case(self):
        g = np.diag([3.0, 5.0])
        split = sgs_split(g)
        assert np.all(split.lower == 0.0)
        np.testing.assert_allclose(split.gtilde, g, atol=0)

    def test_two_by_two_exact(self):
        g = np.array([[2.0, 1.0], [1.0, 2.0]])
        split = sgs_split(g)
        np.testing.assert_allclose(split.diag, [2.0, 2.0])
        assert split.lower[1, 0] == 1.0
        np.testing.assert_allclose(split.gtilde, [[2.0, 1.0], [1.0, 2.5]], atol=0)
        np.testing.assert_allclose(split.lower + split.lower.T + split.dmat, g, atol=0)

    def test_two_by_two_preconditioned_spectrum(self):
        # Roots of the 2x2 characteristic polynomial of Gt^-1 G, found by
        # the quadratic formula: 0.75 and exactly 1.  The unit eigenvalue
        # is structural (the first row of L is always zero), so the open
        # interval (0,1) only holds for the remaining spectrum.
        g = np.array([[2.0, 1.0], [1.0, 2.0]])
        split = sgs_split(g)
        h = solve_linear(split.gtilde, g)
        tr, det = h[0, 0] + h[1, 1], h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
        disc = np.sqrt(tr * tr - 4 * det)
        oracle = sorted([(tr - disc) / 2, (tr + disc) / 2])
        np.testing.assert_allclose(oracle, [0.75, 1.0], atol=1e-12)
        solver_vals = sorted(v.real for v in eigenvalues(h))
        np.testing.assert_allclose(solver_vals, oracle, atol=1e-10)

    def test_non_symmetric_raises(self):
        with pytest.raises(NonSymmetric):
            sgs_split(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_nonpositive_diagonal_raises(self):
        with pytest.raises(NonpositiveDiagonal):
            sgs_split(np.array([[0.0, 1.0], [1.0, 2.0]]))

    def test_gap_is_psd(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(2, 12))
            b = rng.standard_normal((n, n + 2))
            g = b @ b.T + 0.1 * np.eye(n)
            split = sgs_split(g)
            gap = split.gtilde - g
            for _ in range(100):
                v = rng.standard_normal(n)
                assert v @ gap @ v >= -1e-12

    def test_preconditioned_spectrum_in_unit_interval(self):
        # Corrected form of the (0,1) claim: the spectrum lies in (0, 1],
        # the top eigenvalue equals 1 to machine precision (eigenvector
        # e1), and everything else stays strictly below 1.
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(2, 21))
            b = rng.standard_normal((n, n + 2))
            g = b @ b.T + 0.1 * np.eye(n)
            split = sgs_split(g)
            h = solve_linear(split.gtilde, g)
            np.testing.assert_allclose(h[:, 0], np.eye(n)[:, 0], atol=1e-12)
            vals = sorted(v.real for v in eigenvalues(h))
            assert all(abs(v.imag) < 1e-9 for v in eigenvalues(h))
            assert vals[0] > 0.0
            assert abs(vals[-1] - 1.0) <= 1e-11
            assert all(v < 1.0 for v in vals[:-1])


class TestBlockSplitAndRank:
    def test_scalar_blocks_match_elementwise(self):
        rng = np.random.default_rng(23)
        b = rng.standard_normal((5, 7))
        g = b @ b.T + 0.2 * np.eye(5)
        s1 = sgs_split(g)
        s2 = block_sgs_split(g, [1] * 5)
        np.testing.assert_allclose(s1.gtilde, s2.gtilde, atol=1e-12)

    def test_block_identity(self):
        rng = np.random.default_rng(29)
        b = rng.standard_normal((6, 8))
        g = b @ b.T + 0.2 * np.eye(6)
        split = block_sgs_split(g, [2, 3, 1])
        dblock = g - split.lower - split.lower.T  # what the split treats as D
        assert np.all(dblock[np.ix_([0, 1], [2, 3, 4, 5])] == 0.0)
        assert np.all(dblock[np.ix_([2, 3, 4], [0, 1, 5])] == 0.0)
        # gtilde - g must be PSD for the block split as well
        gap = np.linalg.eigvalsh(split.gtilde - g)
        assert gap[0] >= -1e-9

    def test_rank_elimination(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]])
        assert matrix_rank_elim(a) == 2
        assert matrix_rank_elim(np.zeros((3, 3))) == 0
        assert matrix_rank_elim(np.eye(4)) == 4
