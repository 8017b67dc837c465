"""Exact transport, relative entropy, Lipschitz extension."""

import math

import numpy as np
import pytest

from treeconc.broadcast import ExactMeasure, StateSpace
from treeconc.transport import (
    WeightedHamming,
    decode_ranks,
    mcshane_extension,
    min_cost_transport,
    product_coupling_identity,
    relative_entropy,
    wasserstein,
)

from oracles import wasserstein_linprog

BINARY = StateSpace.discrete(2)


def measure(n, probs):
    return ExactMeasure(space=BINARY, n=n, probs=np.asarray(probs, dtype=float))


def point_mass(n, rank):
    probs = np.zeros(2**n)
    probs[rank] = 1.0
    return measure(n, probs)


def uniform(n):
    return measure(n, np.full(2**n, 2.0**-n))


def random_measure(n, rng, sparse=False):
    raw = rng.random(2**n)
    if sparse:
        raw *= rng.random(2**n) < 0.4
        if raw.sum() == 0:
            raw[0] = 1.0
    return measure(n, raw / raw.sum())


def hamming_metric(n):
    return WeightedHamming.uniform(n, BINARY.metric)


class TestDecode:
    def test_rank_layout_big_endian(self):
        states = decode_ranks(np.array([0, 1, 2, 3]), 2, 2)
        assert states.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_three_states(self):
        states = decode_ranks(np.array([5]), 2, 3)
        assert states.tolist() == [[1, 2]]


class TestMinCostTransport:
    def test_identical_is_free(self):
        p = np.array([0.25, 0.75])
        cost = 1.0 - np.eye(2)
        value, flow, _, _ = min_cost_transport(p, p, cost)
        assert value == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(flow, np.diag(p))

    def test_total_variation_on_discrete(self):
        p = np.array([0.9, 0.1])
        q = np.array([0.4, 0.6])
        value, _, _, _ = min_cost_transport(p, q, 1.0 - np.eye(2))
        assert value == pytest.approx(0.5)

    def test_mass_mismatch_rejected(self):
        with pytest.raises(ValueError, match="masses differ"):
            min_cost_transport(np.array([0.7, 0.2]), np.array([0.5, 0.5]), np.eye(2))

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_linprog(self, seed):
        rng = np.random.default_rng(seed)
        m, k = int(rng.integers(2, 14)), int(rng.integers(2, 14))
        mu = rng.random(m)
        mu /= mu.sum()
        nu = rng.random(k)
        nu /= nu.sum()
        cost = rng.random((m, k))
        value, flow, u, w = min_cost_transport(mu, nu, cost)
        want = wasserstein_linprog(mu, nu, cost)
        assert value == pytest.approx(want, abs=1e-8)
        assert np.allclose(flow.sum(axis=1), mu, atol=1e-12)
        assert np.allclose(flow.sum(axis=0), nu, atol=1e-12)


class TestWasserstein:
    def test_identity_zero_with_diagonal_plan(self):
        mu = random_measure(3, np.random.default_rng(1))
        dist, plan = wasserstein(mu, mu)
        assert dist == pytest.approx(0.0, abs=1e-12)
        assert np.allclose(plan.coupling, np.diag(mu.probs))
        assert plan.certified

    def test_point_masses(self):
        n = 4
        metric = hamming_metric(n)
        x, y = 3, 12
        dist, plan = wasserstein(point_mass(n, x), point_mass(n, y), metric)
        want = metric.distance(decode_ranks(np.array([x]), n, 2)[0],
                               decode_ranks(np.array([y]), n, 2)[0])
        assert dist == pytest.approx(want)
        assert plan.coupling.shape == (1, 1)

    def test_single_bit_half(self):
        dist, _ = wasserstein(point_mass(1, 1), uniform(1))
        assert dist == pytest.approx(0.5)

    def test_mismatched_spaces_rejected(self):
        with pytest.raises(ValueError, match="mismatched"):
            wasserstein(uniform(2), uniform(3))

    @pytest.mark.parametrize("seed", range(6))
    def test_against_linprog_oracle(self, seed):
        rng = np.random.default_rng(40 + seed)
        n = int(rng.integers(1, 5))
        mu = random_measure(n, rng, sparse=True)
        nu = random_measure(n, rng, sparse=True)
        dist, plan = wasserstein(mu, nu)
        cost = hamming_metric(n).pairwise(
            decode_ranks(plan.mu_support, n, 2), decode_ranks(plan.nu_support, n, 2)
        )
        want = wasserstein_linprog(
            mu.probs[plan.mu_support] / mu.probs[plan.mu_support].sum(),
            nu.probs[plan.nu_support] / nu.probs[plan.nu_support].sum(),
            cost,
        )
        assert dist == pytest.approx(want, abs=1e-8)
        assert plan.certified

    @pytest.mark.parametrize("seed", range(4))
    def test_plan_feasibility_and_cost(self, seed):
        rng = np.random.default_rng(60 + seed)
        mu = random_measure(4, rng)
        nu = random_measure(4, rng)
        dist, plan = wasserstein(mu, nu)
        assert np.allclose(plan.coupling.sum(axis=1), mu.probs[plan.mu_support], atol=1e-9)
        assert np.allclose(plan.coupling.sum(axis=0), nu.probs[plan.nu_support], atol=1e-9)
        cost = hamming_metric(4).pairwise(
            decode_ranks(plan.mu_support, 4, 2), decode_ranks(plan.nu_support, 4, 2)
        )
        assert dist == pytest.approx(float((plan.coupling * cost).sum()), rel=1e-12)
        assert plan.dual_feasibility_slack >= -1e-9
        assert plan.slackness_gap <= 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_metric_axioms(self, seed):
        rng = np.random.default_rng(80 + seed)
        a, b, c = (random_measure(3, rng, sparse=True) for _ in range(3))
        dab, _ = wasserstein(a, b)
        dba, _ = wasserstein(b, a)
        dac, _ = wasserstein(a, c)
        dcb, _ = wasserstein(c, b)
        assert dab == pytest.approx(dba, abs=1e-9)
        assert dab <= dac + dcb + 1e-9

    def test_duality_spot_check(self):
        rng = np.random.default_rng(7)
        n = 3
        metric = hamming_metric(n)
        for _ in range(3):
            mu = random_measure(n, rng, sparse=True)
            nu = random_measure(n, rng, sparse=True)
            dist, _ = wasserstein(mu, nu)
            best = -np.inf
            for _ in range(500):
                anchors = rng.choice(2**n, size=int(rng.integers(1, 5)), replace=False)
                vals = {int(a): float(rng.uniform(0, 1)) for a in anchors}
                f = mcshane_extension(vals, metric, h=2)
                best = max(best, float(f @ mu.probs - f @ nu.probs))
                assert best <= dist + 1e-9
            assert best > 0 or dist == pytest.approx(0.0, abs=1e-12)

    def test_duality_tight_on_two_point_supports(self):
        # each measure sits on two configurations; among 500 random
        # extensions at least one potential must come within 5% of optimal
        rng = np.random.default_rng(19)
        n = 3
        metric = hamming_metric(n)
        for _ in range(3):
            ranks = rng.choice(2**n, size=4, replace=False)
            probs_mu = np.zeros(2**n)
            probs_nu = np.zeros(2**n)
            a, c = rng.uniform(0.2, 0.8, size=2)
            probs_mu[ranks[0]], probs_mu[ranks[1]] = a, 1 - a
            probs_nu[ranks[2]], probs_nu[ranks[3]] = c, 1 - c
            mu, nu = measure(n, probs_mu), measure(n, probs_nu)
            dist, _ = wasserstein(mu, nu)
            best = -np.inf
            for _ in range(500):
                anchors = rng.choice(2**n, size=int(rng.integers(1, 5)), replace=False)
                vals = {int(r): float(rng.uniform(0, 1)) for r in anchors}
                f = mcshane_extension(vals, metric, h=2)
                best = max(best, float(f @ mu.probs - f @ nu.probs))
            assert best <= dist + 1e-9
            assert best >= 0.95 * dist


class TestRelativeEntropy:
    def test_equal_measures(self):
        mu = uniform(3)
        assert relative_entropy(mu, mu) == pytest.approx(0.0, abs=1e-15)

    def test_point_vs_uniform(self):
        n = 4
        assert relative_entropy(point_mass(n, 5), uniform(n)) == pytest.approx(n * math.log(2))

    def test_absolute_continuity_failure(self):
        assert relative_entropy(point_mass(2, 1), point_mass(2, 2)) == math.inf

    @pytest.mark.parametrize("seed", range(4))
    def test_nonnegative_zero_iff_equal(self, seed):
        rng = np.random.default_rng(seed)
        mu = random_measure(3, rng)
        nu = random_measure(3, rng)
        assert relative_entropy(mu, nu) > 0
        assert relative_entropy(mu, mu) <= 1e-12


class TestMcShane:
    def test_idempotent_on_lipschitz_input(self):
        n = 3
        metric = hamming_metric(n)
        base = mcshane_extension({0: 0.2, 5: 0.9}, metric, h=2)
        full = {r: float(base[r]) for r in range(2**n)}
        again = mcshane_extension(full, metric, h=2)
        assert np.allclose(again, base, atol=1e-12)

    def test_cone_function(self):
        n = 3
        metric = hamming_metric(n)
        f = mcshane_extension({5: 0.0}, metric, h=2)
        states = decode_ranks(np.arange(8), n, 2)
        anchor = decode_ranks(np.array([5]), n, 2)[0]
        want = [(states[r] != anchor).sum() / n for r in range(8)]
        assert np.allclose(f, want)

    def test_random_anchors_give_lipschitz_output(self):
        rng = np.random.default_rng(23)
        n = 3
        metric = hamming_metric(n)
        anchors = rng.choice(8, size=4, replace=False)
        vals = {int(a): float(rng.uniform(-1, 1)) for a in anchors}
        f = mcshane_extension(vals, metric, h=2)
        states = decode_ranks(np.arange(8), n, 2)
        for x in range(8):
            for y in range(8):
                d = (states[x] != states[y]).sum() / n
                assert abs(f[x] - f[y]) <= d + 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="anchor"):
            mcshane_extension({}, hamming_metric(2), h=2)


class TestProductIdentity:
    def test_equal_coordinates_give_zero(self):
        mus = [np.array([0.3, 0.7]), np.array([0.5, 0.5])]
        lhs, rhs = product_coupling_identity(mus, mus, np.ones(2), BINARY.metric)
        assert lhs == pytest.approx(0.0, abs=1e-12)
        assert rhs == pytest.approx(0.0, abs=1e-12)

    def test_single_moving_coordinate(self):
        mus = [np.array([1.0, 0.0]), np.array([1.0, 0.0])]
        nus = [np.array([0.5, 0.5]), np.array([1.0, 0.0])]
        lhs, rhs = product_coupling_identity(mus, nus, np.ones(2), BINARY.metric)
        assert lhs == pytest.approx(0.25)
        assert rhs == pytest.approx(0.25)

    def test_weighted_version(self):
        mus = [np.array([1.0, 0.0]), np.array([1.0, 0.0])]
        nus = [np.array([0.5, 0.5]), np.array([1.0, 0.0])]
        lhs, rhs = product_coupling_identity(mus, nus, np.array([2.0, 1.0]), BINARY.metric)
        assert lhs == pytest.approx(0.5)
        assert rhs == pytest.approx(0.5)

    @pytest.mark.parametrize("seed", range(6))
    def test_identity_on_random_products(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(1, 4))
        mus, nus = [], []
        for _ in range(n):
            a = rng.random(2)
            b = rng.random(2)
            mus.append(a / a.sum())
            nus.append(b / b.sum())
        weights = rng.uniform(0.5, 3.0, size=n)
        lhs, rhs = product_coupling_identity(mus, nus, weights, BINARY.metric)
        assert abs(lhs - rhs) <= 1e-9
