"""Child-sum operator powers, norms, and the mixing matrix."""

import numpy as np
import pytest

from treeconc.delta import delta_profile
from treeconc.spectral import (
    MixingMatrix,
    TreeOperator,
    breadth_first_order,
    mixing_matrix,
    mixing_norms,
    partial_sum_norm,
    q_apply,
    q_power_norm_exact,
    q_power_norm_iterative,
)
from treeconc.tree import GeneratorSpec, RootedTree, build_from_parent_array, generate

from oracles import random_parent_array


def dary(d, k):
    return generate(GeneratorSpec("dary", degree=d, depth=k))


def threeone(k):
    return generate(GeneratorSpec("threeone", depth=k))


def path(length):
    return generate(GeneratorSpec("path", length=length))


EDGE = build_from_parent_array([-1, 0])
STAR2 = build_from_parent_array([-1, 0, 0])


class TestApply:
    def test_ones_on_dary22(self):
        t = dary(2, 2)
        out = q_apply(t, np.ones(t.n), 1)
        assert out[0] == 2.0
        assert list(out[1:3]) == [2.0, 2.0]
        assert np.all(out[3:] == 0.0)

    def test_power_zero_is_identity(self):
        t = dary(2, 2)
        f = np.arange(t.n, dtype=float)
        assert np.array_equal(q_apply(t, f, 0), f)

    def test_leaf_indicator_moves_to_parent(self):
        t = dary(2, 2)
        f = np.zeros(t.n)
        f[3] = 1.0
        out = q_apply(t, f, 1)
        want = np.zeros(t.n)
        want[t.parent[3]] = 1.0
        assert np.array_equal(out, want)

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            q_apply(EDGE, np.ones(2), -1)

    @pytest.mark.parametrize("seed", range(4))
    def test_adjoint_identity(self, seed):
        rng = np.random.default_rng(seed)
        t = RootedTree(random_parent_array(int(rng.integers(2, 150)), rng))
        op = TreeOperator(t)
        f = rng.standard_normal(t.n)
        g = rng.standard_normal(t.n)
        assert op.apply(f) @ g == pytest.approx(f @ op.apply_adjoint(g), abs=1e-12 * t.n)

    def test_adjoint_reads_parent(self):
        op = TreeOperator(STAR2)
        g = np.array([5.0, 7.0, 9.0])
        assert list(op.apply_adjoint(g)) == [0.0, 5.0, 5.0]


class TestPowerNorms:
    def test_dary23_j2(self):
        assert q_power_norm_exact(dary(2, 3), 2) == pytest.approx(2.0)

    def test_j_zero_is_one(self):
        assert q_power_norm_exact(path(4), 0) == 1.0
        assert q_power_norm_iterative(path(4), 0) == 1.0

    def test_threeone6_j3(self):
        assert q_power_norm_exact(threeone(6), 3) == pytest.approx(np.sqrt(27))

    def test_beyond_depth_is_zero(self):
        assert q_power_norm_exact(path(3), 9) == 0.0

    def test_path_norms_are_one(self):
        t = path(10)
        for j in range(1, 11):
            assert q_power_norm_iterative(t, j, seed=3) == pytest.approx(1.0, abs=1e-6)

    def test_dary_iterative_close(self):
        assert q_power_norm_iterative(dary(2, 3), 2, seed=1) == pytest.approx(2.0, rel=1e-6)

    @pytest.mark.parametrize("seed", range(5))
    def test_exact_matches_iterative_random(self, seed):
        rng = np.random.default_rng(50 + seed)
        t = RootedTree(random_parent_array(int(rng.integers(2, 100)), rng))
        for j in range(6):
            exact = q_power_norm_exact(t, j)
            est = q_power_norm_iterative(t, j, seed=seed)
            assert est == pytest.approx(exact, rel=1e-6, abs=1e-9)


class TestPartialSumNorm:
    def test_b_zero_is_one(self):
        for k in (0, 3, 11):
            assert partial_sum_norm(path(6), 0.0, k) == pytest.approx(1.0)

    def test_chain_geometric_bound(self):
        val = partial_sum_norm(path(20), 0.5, 20)
        assert val <= 2.0
        assert val > 1.0

    def test_monotone_in_k(self):
        t = dary(2, 5)
        vals = [partial_sum_norm(t, 0.6, k, seed=2) for k in range(6)]
        assert np.all(np.diff(vals) >= -1e-9)

    def test_threeone_divergence_regime(self):
        # decay^2 * local growth 3 > 1 here, so the geometric sums blow up
        # along growing truncations (on a fixed finite tree the operator is
        # nilpotent and the sums saturate instead)
        lo = partial_sum_norm(threeone(6), 0.7, 6, seed=4)
        hi = partial_sum_norm(threeone(12), 0.7, 12, seed=4)
        assert hi > 1.5 * lo

    def test_matches_dense_matrix_norm(self):
        rng = np.random.default_rng(77)
        t = RootedTree(random_parent_array(40, rng))
        b, k = 0.55, 5
        dense_q = np.zeros((t.n, t.n))
        for v in range(1, t.n):
            dense_q[t.parent[v], v] = 1.0
        acc = np.zeros_like(dense_q)
        power = np.eye(t.n)
        for j in range(k + 1):
            acc += (b**j) * power
            power = dense_q @ power
        want = np.linalg.norm(acc, 2)
        assert partial_sum_norm(t, b, k, seed=6) == pytest.approx(want, rel=1e-9)


class TestMixingMatrix:
    def test_single_edge(self):
        m = mixing_matrix(EDGE, 0.5)
        assert np.array_equal(m.entries, np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_b_zero_identity(self):
        m = mixing_matrix(dary(2, 2), 0.0)
        assert np.array_equal(m.entries, np.eye(7))

    def test_star2_rows(self):
        m = mixing_matrix(STAR2, 0.5)
        assert list(m.entries[0]) == [1.0, 0.5, 0.5]
        assert list(m.entries[1]) == [0.0, 1.0, 0.0]
        assert list(m.entries[2]) == [0.0, 0.0, 1.0]

    def test_upper_triangular_unit_diagonal(self):
        rng = np.random.default_rng(8)
        t = RootedTree(random_parent_array(90, rng))
        m = mixing_matrix(t, 0.4)
        assert np.allclose(np.diag(m.entries), 1.0)
        assert np.allclose(np.tril(m.entries, -1), 0.0)

    def test_entries_are_ancestor_powers(self):
        rng = np.random.default_rng(15)
        t = RootedTree(random_parent_array(40, rng))
        b = 0.3
        m = mixing_matrix(t, b)
        for i in range(t.n):
            for j in range(t.n):
                vi, vj = int(m.order[i]), int(m.order[j])
                want = b ** t.distance(vi, vj) if t.is_ancestor(vi, vj) else 0.0
                assert m.entries[i, j] == pytest.approx(want)

    def test_respects_requested_order(self):
        t = STAR2
        order = np.array([0, 2, 1])
        m = mixing_matrix(t, 0.5, order=order)
        assert list(m.entries[0]) == [1.0, 0.5, 0.5]

    def test_non_bfs_order_rejected(self):
        t = build_from_parent_array([-1, 0, 1])
        with pytest.raises(ValueError, match="breadth-first"):
            mixing_matrix(t, 0.5, order=np.array([0, 2, 1]))

    def test_guard(self):
        t = dary(2, 12)  # 8191 vertices
        with pytest.raises(ValueError, match="guarded"):
            mixing_matrix(t, 0.5)


class TestMixingNorms:
    def test_single_edge_values(self):
        m = mixing_matrix(EDGE, 0.5)
        norms = mixing_norms(m)
        assert norms.inf_norm == pytest.approx(1.5)
        assert np.linalg.norm(norms.row_sums) == pytest.approx(np.sqrt(3.25))

    def test_b_zero_all_unit(self):
        m = mixing_matrix(STAR2, 0.0)
        norms = mixing_norms(m)
        assert norms.inf_norm == 1.0
        assert norms.two_norm == pytest.approx(1.0)
        assert np.array_equal(norms.row_sums, np.ones(3))

    def test_dary22_matches_profile(self):
        t = dary(2, 2)
        norms = mixing_norms(mixing_matrix(t, 0.5))
        prof = delta_profile(t, 0.5)
        assert norms.inf_norm == pytest.approx(prof.delta.max())
        assert np.sum(norms.row_sums**2) == pytest.approx(prof.delta_sq)

    @pytest.mark.parametrize("seed", range(4))
    def test_corollary_identities_random(self, seed):
        rng = np.random.default_rng(500 + seed)
        t = RootedTree(random_parent_array(int(rng.integers(2, 120)), rng))
        b = float(rng.choice([0.3, 0.6, 0.9]))
        prof = delta_profile(t, b)
        for use_rng in (None, rng):
            order = breadth_first_order(t, use_rng)
            norms = mixing_norms(mixing_matrix(t, b, order=order))
            assert norms.inf_norm == pytest.approx(prof.delta.max(), abs=1e-9)
            assert np.linalg.norm(norms.row_sums) == pytest.approx(prof.big_delta, abs=1e-9)
            # the aggregate-over-sqrt(n) ratio never beats the full l2 norm
            assert prof.big_delta / np.sqrt(t.n) <= norms.two_norm + 1e-9

    def test_two_norm_matches_dense_svd(self):
        rng = np.random.default_rng(91)
        t = RootedTree(random_parent_array(60, rng))
        m = mixing_matrix(t, 0.45)
        want = np.linalg.norm(m.entries, 2)
        assert mixing_norms(m).two_norm == pytest.approx(want, rel=1e-9)
