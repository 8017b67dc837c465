"""Inequality checkers: hand instances, report mechanics, determinism."""

import math

import numpy as np
import pytest

from treeconc.broadcast import IsingModel, exact_measure
from treeconc.verify import (
    InequalityReport,
    check_exp_moment,
    check_mixing_corollary,
    check_optimality_chain,
    check_t1,
    check_tail,
    condition_on_vertex,
    default_t1_family,
    magnetization_observable,
    mcshane_observables,
    run_all_checks,
    tilt_measure,
    verification_corpus,
)
from treeconc.tree import GeneratorSpec, RootedTree, build_from_parent_array, generate

SINGLE = build_from_parent_array([-1])
EDGE = build_from_parent_array([-1, 0])
STAR2 = build_from_parent_array([-1, 0, 0])


class TestReport:
    def test_passed_recomputable(self):
        r = InequalityReport("x", 3, -5e-10, {})
        assert r.passed
        r2 = InequalityReport("x", 3, -2e-9, {})
        assert not r2.passed

    def test_json_shape(self):
        d = InequalityReport("tail_bound", 4, 0.25, {"eps": 0.1}).to_dict()
        assert set(d) == {"name", "instances", "worst_slack", "passed", "witness"}


class TestExpMoment:
    def test_single_vertex_hand_slack(self):
        model = IsingModel(SINGLE, 0.25)
        rep = check_exp_moment(model, functions=[magnetization_observable(1)], lambdas=(2.0,))
        assert rep.worst_slack == pytest.approx(math.exp(0.5) - math.cosh(1.0), rel=1e-12)
        assert rep.passed

    def test_lambda_zero_equality_linear_route(self):
        model = IsingModel(STAR2, 0.25)
        rep = check_exp_moment(model, functions=[magnetization_observable(3)], lambdas=(0.0,))
        assert rep.worst_slack == 0.0

    def test_product_case_dominated(self):
        tree = generate(GeneratorSpec("dary", degree=2, depth=2))
        model = IsingModel(tree, 0.5)  # b = 0, product measure
        rep = check_exp_moment(model, functions=[magnetization_observable(tree.n)])
        assert rep.passed
        assert rep.worst_slack >= 0.0

    def test_mcshane_functions_within_bound(self):
        tree = generate(GeneratorSpec("threeone", depth=2))
        model = IsingModel(tree, 0.2)
        fns = [magnetization_observable(tree.n)] + mcshane_observables(tree.n, 6, seed=3)
        rep = check_exp_moment(model, functions=fns)
        assert rep.passed
        assert rep.instances_checked == 7 * 7

    def test_non_lipschitz_rejected(self):
        from treeconc.verify import TabulatedObservable

        model = IsingModel(EDGE, 0.25)
        bad = TabulatedObservable("bad", np.array([0.0, 0.0, 0.0, 3.0]))
        with pytest.raises(ValueError, match="not 1-Lipschitz"):
            check_exp_moment(model, functions=[bad])


class TestT1:
    def test_equal_measures_zero_both_sides(self):
        model = IsingModel(EDGE, 0.25)
        nu = exact_measure(model)
        rep = check_t1(model, mus=[("nu_itself", nu)])
        assert rep.worst_slack == pytest.approx(0.0, abs=1e-9)

    def test_single_bit_hand_instance(self):
        model = IsingModel(SINGLE, 0.5)  # nu uniform on one bit
        nu = exact_measure(model)
        from treeconc.broadcast import ExactMeasure

        point = ExactMeasure(space=nu.space, n=1, probs=np.array([0.0, 1.0]))
        rep = check_t1(model, mus=[("delta1", point)])
        want = math.sqrt(math.log(2) / 2) - 0.5
        assert rep.worst_slack == pytest.approx(want, rel=1e-9)

    def test_point_mass_on_single_edge(self):
        model = IsingModel(EDGE, 0.25)
        nu = exact_measure(model)
        fam = [fam for fam in default_t1_family(nu) if fam[0] == "point[3]"]
        rep = check_t1(model, mus=fam)
        # dbar to a point mass integrates the distance; entropy is -log nu(x)
        dbar = float(sum(nu.probs[r] * (bin(r ^ 3).count("1") / 2) for r in range(4)))
        bound = (np.sqrt(3.25) / 2) * math.sqrt(-math.log(3 / 8) / 2)
        assert rep.worst_slack == pytest.approx(bound - dbar, rel=1e-9)
        assert rep.passed

    def test_default_family_all_pass(self):
        model = IsingModel(STAR2, 0.25)
        rep = check_t1(model)
        assert rep.passed
        # 8 point masses + 4 tilts + 6 conditionings
        assert rep.instances_checked == 18

    def test_guard(self):
        big = generate(GeneratorSpec("dary", degree=2, depth=3))
        with pytest.raises(ValueError, match="guarded"):
            check_t1(IsingModel(big, 0.25))

    def test_tilt_and_conditioning_helpers(self):
        nu = exact_measure(IsingModel(EDGE, 0.25))
        t = tilt_measure(nu, 0.5)
        assert t.probs.sum() == pytest.approx(1.0)
        assert t.probs[3] > nu.probs[3]  # more mass on all-ones
        c = condition_on_vertex(nu, 0, 1)
        assert c.probs[0] == 0.0 and c.probs[1] == 0.0
        assert c.probs.sum() == pytest.approx(1.0)


class TestTail:
    def test_single_edge_hand_instance(self):
        model = IsingModel(EDGE, 0.25)
        rep = check_tail(model, epsilons=(0.5,))
        bound = 2 * math.exp(-2 * 4 * 0.25 / 3.25)
        assert rep.witness["tail"] == pytest.approx(0.75)
        assert rep.worst_slack == pytest.approx(bound - 0.75, rel=1e-9)

    def test_eps_beyond_range(self):
        model = IsingModel(EDGE, 0.25)
        rep = check_tail(model, epsilons=(0.6,))
        assert rep.witness["tail"] == 0.0
        assert rep.worst_slack > 0

    def test_binomial_case(self):
        tree = generate(GeneratorSpec("path", length=11))  # n = 12
        model = IsingModel(tree, 0.5)
        rep = check_tail(model, epsilons=(0.25,))
        from math import comb

        tail = 2 * sum(comb(12, m) for m in range(4)) / 2**12
        assert rep.witness["tail"] == pytest.approx(tail, abs=1e-12)
        assert rep.passed

    def test_monte_carlo_advisory(self):
        model = IsingModel(STAR2, 0.25)
        rep = check_tail(model, epsilons=(0.25,), mc_samples=20000, seed=5)
        assert "monte_carlo_tail" in rep.witness
        assert abs(rep.witness["monte_carlo_tail"] - rep.witness["tail"]) < 0.02


class TestOptimalityChain:
    def test_b_zero_equalities(self):
        rep = check_optimality_chain(STAR2, 0.5)
        assert rep.passed
        assert rep.worst_slack == pytest.approx(0.0, abs=1e-12)

    def test_star2_hand_values(self):
        rep = check_optimality_chain(STAR2, 0.25)
        assert rep.passed  # 5.5 >= 0.75 * 6 with margin 1.0

    def test_dary22_hand_values(self):
        rep = check_optimality_chain(generate(GeneratorSpec("dary", degree=2, depth=2)), 0.25)
        assert rep.passed  # 18 >= 0.75 * 21 with margin 2.25


class TestMixingCorollary:
    def test_single_edge(self):
        rep = check_mixing_corollary(EDGE, 0.5)
        assert rep.passed

    def test_b_zero(self):
        rep = check_mixing_corollary(STAR2, 0.0)
        assert rep.passed

    def test_threeone_multiple_orders(self):
        tree = generate(GeneratorSpec("threeone", depth=4))
        rep = check_mixing_corollary(tree, 0.6, n_orders=3, seed=2)
        assert rep.passed
        assert rep.instances_checked == 4 * 3  # (canonical + 3 orders) x 3 checks


class TestDriver:
    def test_corpus_deterministic(self):
        a = verification_corpus(3)
        b = verification_corpus(3)
        assert [name for name, _ in a] == [name for name, _ in b]
        for (_, ta), (_, tb) in zip(a, b):
            assert np.array_equal(ta.parent, tb.parent)

    def test_run_all_passes_and_repeats(self):
        reports = run_all_checks(seed=7)
        assert all(r.passed for r in reports)
        again = run_all_checks(seed=7)
        for r1, r2 in zip(reports, again):
            assert r1.worst_slack == r2.worst_slack
            assert r1.instances_checked == r2.instances_checked
