"""
Tests for relations module.
"""

from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from src.exceptions import (
    DimensionMismatchError,
    NotHermitianError,
    NotPSDError,
    UnknownRelationError,
)
from src.linalg_core import is_psd, min_eigenvalue
from src.quantum_model import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityState,
    ObservableTuple,
    center,
    conjugate,
    moment_matrices,
)
from src.relations import (
    BLOCK_RELATIONS,
    PAIR_RELATIONS,
    RELATION_IDS,
    STATE_RELATIONS,
    BoundReport,
    ChainReport,
    RelationEvaluator,
    gram_negative_example,
    gram_negative_scan,
    square_order_counterexample,
)
from src.sampling import random_density, random_observables, random_psd, random_unitary


def random_instance(instance_seed: int, dim: int, count: int):
    rng = np.random.default_rng(instance_seed)
    state = random_density(dim, rng)
    return state, center(state, random_observables(dim, count, rng))


class TestReports:
    """Test cases for the tolerance verdict of reports."""

    def test_verdict_within_tolerance(self):
        """Test lhs <= rhs + tol * max(1, |rhs|)."""
        assert BoundReport.evaluate("x", 1.0 + 0.5e-9, 1.0).satisfied
        assert not BoundReport.evaluate("x", 1.0 + 2e-9, 1.0).satisfied
        assert BoundReport.evaluate("x", 1000.0 + 5e-7, 1000.0).satisfied

    def test_margin_and_tightness(self):
        report = BoundReport.evaluate("x", 3.0, 4.0)
        assert report.margin == pytest.approx(1.0)
        assert report.tightness == pytest.approx(0.75)

    def test_degenerate_is_satisfied(self):
        assert BoundReport.evaluate("x", 2.0, 1.0, degenerate=True).satisfied

    def test_chain_monotonicity(self):
        """Test that a decreasing step fails the chain."""
        assert ChainReport.evaluate("c", [("a", 1.0), ("b", 2.0), ("c", 2.0)]).satisfied
        chain = ChainReport.evaluate("c", [("a", 1.0), ("b", 0.5), ("c", 2.0)])
        assert not chain.satisfied
        assert chain.margin == pytest.approx(-0.5)
        assert chain.value("c") == 2.0

    def test_chain_equal_tail(self):
        """Test that an equal tail rejects a strict last step."""
        values = [("a", 1.0), ("b", 2.0), ("c", 3.0)]
        assert ChainReport.evaluate("c", values).satisfied
        chain = ChainReport.evaluate("c", values, equal_tail=True)
        assert not chain.satisfied
        assert chain.tail_deviation == pytest.approx(1.0)
        assert chain.to_dict()["equal_tail"] is True
        assert ChainReport.evaluate(
            "c", [("a", 1.0), ("b", 3.0), ("c", 3.0 + 1e-12)], equal_tail=True
        ).satisfied

    def test_to_dict_is_plain(self):
        """Test that witnesses serialize to plain Python values."""
        report = RelationEvaluator().geometric_mean_majorization(np.diag([3.0, 1.0]), np.diag([1.0, 3.0]))
        payload = report.to_dict()
        assert payload["witness"]["unitary"]["rows"] == 2
        assert isinstance(payload["witness"]["regularized"], bool)


class TestPairRelations:
    """Test cases for inequalities on pairs of PSD matrices."""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.evaluator = RelationEvaluator()

    def test_det_sum_difference_commuting(self):
        """Test diag(2, 1), diag(1, 2) gives lhs 1 and rhs 81."""
        report = self.evaluator.det_sum_difference(np.diag([2.0, 1.0]), np.diag([1.0, 2.0]))
        assert report.lhs == pytest.approx(1.0)
        assert report.rhs == pytest.approx(81.0)
        assert report.satisfied

    def test_det_sum_difference_equal(self):
        A = random_psd(3, np.random.default_rng(0))
        report = self.evaluator.det_sum_difference(A, A)
        assert report.lhs == pytest.approx(0.0, abs=1e-20)

    def test_pair_validation(self):
        """Test NotPSDError and DimensionMismatchError."""
        with pytest.raises(NotPSDError):
            self.evaluator.det_sum_difference(np.diag([1.0, -1.0]), np.eye(2))
        with pytest.raises(DimensionMismatchError):
            self.evaluator.det_sum_difference(np.eye(2), np.eye(3))

    def test_geometric_mean_majorization_commuting(self):
        """Test diag(3, 1), diag(1, 3): gap 2I, scaled by ||A + B|| = 4."""
        report = self.evaluator.geometric_mean_majorization(np.diag([3.0, 1.0]), np.diag([1.0, 3.0]))
        assert report.satisfied
        assert report.witness["gap_min_eigenvalue"] == pytest.approx(2.0)
        assert report.lhs == pytest.approx(-0.5)
        np.testing.assert_allclose(report.witness["unitary"], np.diag([1.0, -1.0]), atol=1e-12)

    def test_geometric_mean_majorization_equal(self):
        """Test that A = B leaves gap A + B."""
        A = np.diag([2.0, 1.0])
        report = self.evaluator.geometric_mean_majorization(A, A)
        assert report.satisfied
        assert report.witness["gap_min_eigenvalue"] == pytest.approx(2.0)

    def test_diagonal_product_bound(self):
        """Test diag(2, 1), diag(1, 2) gives lhs 1 and rhs 9."""
        report = self.evaluator.diagonal_product_bound(np.diag([2.0, 1.0]), np.diag([1.0, 2.0]))
        assert report.lhs == pytest.approx(1.0)
        assert report.rhs == pytest.approx(9.0)

    def test_diagonal_product_bound_equal(self):
        A = np.diag([2.0, 1.0])
        assert self.evaluator.diagonal_product_bound(A, A).lhs == 0.0

    @seed(3)
    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=6))
    def test_random_pairs_satisfied(self, instance_seed, dim):
        """Test every pair relation on random Wishart pairs."""
        rng = np.random.default_rng(instance_seed)
        pair = (random_psd(dim, rng), random_psd(dim, rng))
        for relation in PAIR_RELATIONS:
            for report in self.evaluator.evaluate(relation, pair=pair):
                assert report.satisfied, (relation, report.lhs, report.rhs)


class TestSquareOrder:
    """Test cases for the counterexample search."""

    def test_dim_one_has_no_counterexample(self):
        assert square_order_counterexample(1, trials=50, seed=0) is None

    def test_finds_counterexample_in_dim_two(self):
        """Test that 1000 seeded trials find a PSD pair violating the square order."""
        result = square_order_counterexample(2, trials=1000, seed=0)
        assert result is not None
        A, B = result
        assert is_psd(A) and is_psd(B)
        gap = (A + B) @ (A + B) - (A - B) @ (A - B)
        assert min_eigenvalue((gap + gap.conj().T) / 2) < -1e-6

    def test_commuting_pairs_never_qualify(self):
        """Test that a floor above any possible commutator norm yields no witness."""
        assert square_order_counterexample(2, trials=100, seed=0, commutator_floor=10.0) is None


class TestStateRelations:
    """Test cases for uncertainty relations on states and observable tuples."""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.evaluator = RelationEvaluator()
        self.state = DensityState.basis(2, 0)
        self.pair = ObservableTuple.of(SIGMA_X, SIGMA_Y)
        self.commuting = ObservableTuple.of(SIGMA_Z, np.diag([1.0, 3.0]))

    def test_pauli_robertson(self):
        """Test equality lhs = rhs = 1 for sigma_x, sigma_y on |0><0|."""
        report = self.evaluator.robertson_sup(self.state, self.pair)
        assert report.lhs == pytest.approx(1.0, abs=1e-9)
        assert report.rhs == pytest.approx(1.0, abs=1e-9)
        assert report.satisfied

    def test_pauli_schrodinger_heisenberg(self):
        report = self.evaluator.schrodinger_heisenberg(self.state, SIGMA_X, SIGMA_Y)
        assert report.lhs == pytest.approx(1.0, abs=1e-9)
        assert report.rhs == pytest.approx(1.0, abs=1e-9)

    def test_schrodinger_heisenberg_trace_state(self):
        """Test lhs 0 under the maximally mixed state."""
        report = self.evaluator.schrodinger_heisenberg(
            DensityState.maximally_mixed(2), SIGMA_X, SIGMA_Y
        )
        assert report.lhs == pytest.approx(0.0, abs=1e-15)

    def test_pauli_norm_bound(self):
        """Test the operator norm equality and the full norm family."""
        reports = self.evaluator.norm_bound(self.state, self.pair)
        assert len(reports) == 2 + 4
        assert all(r.satisfied for r in reports)
        operator = next(r for r in reports if r.witness["norm"] == "schatten_inf")
        assert operator.lhs == pytest.approx(1.0)
        assert operator.rhs == pytest.approx(1.0)

    def test_pauli_frobenius_chain(self):
        """Test the chain [2, 2, 4, 4]."""
        chain = self.evaluator.frobenius_chain(self.state, self.pair)
        np.testing.assert_allclose([v for _, v in chain.values], [2, 2, 4, 4], atol=1e-9)
        assert chain.satisfied

    def test_pauli_variance_bounds(self):
        """Test equality in the variance product, variance mean and row sum bounds."""
        for name in ("variance_product_bound", "variance_mean_bound", "row_sum_bound"):
            report = getattr(self.evaluator, name)(self.state, self.pair)
            assert report.lhs == pytest.approx(1.0, abs=1e-9), name
            assert report.rhs == pytest.approx(1.0, abs=1e-9), name
        assert self.evaluator.row_sum_bound(self.state, self.pair).witness == {
            "covariance_norm": "operator"
        }

    def test_commuting_tuple_has_zero_lhs(self):
        """Test lhs 0 for commuting observables."""
        state = DensityState.pure([1.0, 1.0])
        tuple_ = center(state, self.commuting)
        for name in (
            "robertson_sup",
            "hadamard_commutator_bound",
            "variance_product_bound",
            "variance_mean_bound",
            "row_sum_bound",
        ):
            report = getattr(self.evaluator, name)(state, tuple_)
            assert report.lhs == pytest.approx(0.0, abs=1e-12), name
        assert self.evaluator.frobenius_chain(state, tuple_).lhs == pytest.approx(0.0, abs=1e-12)

    def test_odd_tuple_robertson_vanishes(self):
        """Test that an odd skew determinant gives lhs 0."""
        state, tuple_ = random_instance(5, 4, 3)
        report = self.evaluator.robertson_sup(state, tuple_)
        assert report.lhs < 1e-9 * max(1.0, report.rhs)
        assert report.witness["odd"]

    def test_degenerate_variance(self):
        """Test the degenerate flag when one variance vanishes."""
        tuple_ = ObservableTuple.of(SIGMA_Z, SIGMA_X)
        report = self.evaluator.variance_product_bound(self.state, tuple_)
        assert report.degenerate
        assert report.satisfied

    def test_variance_bounds_need_two_observables(self):
        with pytest.raises(DimensionMismatchError):
            self.evaluator.variance_mean_bound(self.state, ObservableTuple.of(SIGMA_X))


class TestStateRelationProperties:
    """Property tests on random states and tuples."""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.evaluator = RelationEvaluator()

    @seed(5)
    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=2, max_value=5),
        st.integers(min_value=2, max_value=5),
    )
    def test_random_instances_satisfied(self, instance_seed, dim, count):
        """Test that every state relation holds on random instances."""
        state, tuple_ = random_instance(instance_seed, dim, count)
        for relation in STATE_RELATIONS + BLOCK_RELATIONS:
            for report in self.evaluator.evaluate(relation, state, tuple_):
                assert report.satisfied, (relation, report.lhs, report.rhs)

    @seed(6)
    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=5))
    def test_robertson_equals_det_pair(self, instance_seed, dim):
        """Test robertson_sup against det_sum_difference(M, M^T)."""
        state, tuple_ = random_instance(instance_seed, dim, 2)
        moments = moment_matrices(state, tuple_)
        robertson = self.evaluator.robertson_sup(state, tuple_)
        pair_report = self.evaluator.det_sum_difference(moments.gram, moments.gram.T)
        assert robertson.lhs == pytest.approx(pair_report.lhs, abs=1e-10)
        assert robertson.rhs == pytest.approx(pair_report.rhs, abs=1e-10)

    @seed(7)
    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=5))
    def test_two_observable_verdicts_agree(self, instance_seed, dim):
        """Test that Robertson and Schrodinger-Heisenberg agree for n = 2."""
        state, tuple_ = random_instance(instance_seed, dim, 2)
        robertson = self.evaluator.robertson_sup(state, tuple_)
        x, y = tuple_.matrices
        schrodinger = self.evaluator.schrodinger_heisenberg(state, x, y)
        assert robertson.satisfied == schrodinger.satisfied
        assert robertson.lhs == pytest.approx(schrodinger.lhs**2, rel=1e-8, abs=1e-12)

    @seed(8)
    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=2, max_value=5),
        st.integers(min_value=2, max_value=5),
    )
    def test_variance_bookkeeping(self, instance_seed, dim, count):
        """Test the rescaled pair evaluation and the mean bound against the product bound."""
        state, tuple_ = random_instance(instance_seed, dim, count)
        product = self.evaluator.variance_product_bound(state, tuple_)
        mean = self.evaluator.variance_mean_bound(state, tuple_)
        assert product.witness["consistency_deviation"] < 1e-10 * max(1.0, product.rhs)
        assert mean.lhs**2 == pytest.approx(product.lhs, rel=1e-9, abs=1e-12)
        assert product.rhs <= mean.rhs**2 * (1 + 1e-9)

    @seed(9)
    @settings(max_examples=30, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=2, max_value=6),
        st.integers(min_value=2, max_value=5),
    )
    def test_frobenius_chain_tail_equality(self, instance_seed, dim, count):
        """Test (tr Cov)^2 == (sum of variances)^2 for uncentered random tuples."""
        rng = np.random.default_rng(instance_seed)
        state = random_density(dim, rng)
        tuple_ = random_observables(dim, count, rng)
        chain = self.evaluator.frobenius_chain(state, tuple_)
        assert chain.equal_tail
        assert chain.satisfied
        assert chain.tail_deviation <= 1e-9 * max(1.0, chain.rhs)

    def test_scaling_keeps_verdicts(self):
        """Test that x -> 2x leaves every verdict unchanged."""
        for instance_seed in range(10):
            state, tuple_ = random_instance(instance_seed, 3, 3)
            scaled = ObservableTuple.of(*(2 * x for x in tuple_.matrices))
            for relation in STATE_RELATIONS:
                original = self.evaluator.evaluate(relation, state, tuple_)
                rescaled = self.evaluator.evaluate(relation, state, scaled)
                assert [r.satisfied for r in original] == [r.satisfied for r in rescaled]

    def test_unitary_invariance(self):
        """Test that a common unitary conjugation changes no report value."""
        rng = np.random.default_rng(21)
        for _ in range(10):
            state = random_density(3, rng)
            tuple_ = center(state, random_observables(3, 3, rng))
            new_state, new_tuple = conjugate(state, tuple_, random_unitary(3, rng))
            for relation in STATE_RELATIONS:
                before = self.evaluator.evaluate(relation, state, tuple_)
                after = self.evaluator.evaluate(relation, new_state, new_tuple)
                for a, b in zip(before, after):
                    assert b.lhs == pytest.approx(a.lhs, rel=1e-9, abs=1e-12), relation
                    assert b.rhs == pytest.approx(a.rhs, rel=1e-9, abs=1e-12), relation


class TestBlockRelations:
    """Test cases for block commutator trace inequalities."""

    def setup_method(self):
        """Set up test fixtures before each test method."""
        self.evaluator = RelationEvaluator()

    def test_pauli_pair(self):
        """Test lhs 8 and rhs 8 for sigma_x, sigma_y."""
        report = self.evaluator.block_commutator_trace_bound([SIGMA_X, SIGMA_Y])
        assert report.lhs == pytest.approx(8.0, abs=1e-9)
        assert report.rhs == pytest.approx(8.0, abs=1e-9)
        assert report.satisfied

    def test_pauli_triple(self):
        """Test lhs 16 and rhs 24 for sigma_x, sigma_y, sigma_z."""
        report = self.evaluator.block_commutator_trace_bound([SIGMA_X, SIGMA_Y, SIGMA_Z])
        assert report.lhs == pytest.approx(16.0, abs=1e-9)
        assert report.rhs == pytest.approx(24.0, abs=1e-9)

    def test_commuting_tuple(self):
        """Test that commuting matrices give lhs 0 and vice versa."""
        commuting = [SIGMA_Z, np.diag([2.0, 5.0])]
        assert self.evaluator.block_commutator_trace_bound(commuting).lhs == 0.0
        assert self.evaluator.block_commutator_trace_bound([SIGMA_X, SIGMA_Z]).lhs > 0

    def test_two_observable_chain(self):
        """Test the chain [8, 8, 8, 8] for sigma_x, sigma_y."""
        chain = self.evaluator.two_observable_trace_bound(SIGMA_X, SIGMA_Y)
        np.testing.assert_allclose([v for _, v in chain.values], [8, 8, 8, 8], atol=1e-9)
        assert chain.satisfied
        assert self.evaluator.two_observable_trace_bound(SIGMA_Z, SIGMA_Z).lhs == 0.0

    def test_pinching_step_pauli_triple(self):
        """Test lhs 16 and rhs 6 sqrt(8) with the pinching and concavity checks."""
        report = self.evaluator.pinching_trace_step([SIGMA_X, SIGMA_Y, SIGMA_Z])
        assert report.lhs == pytest.approx(16.0, abs=1e-9)
        assert report.rhs == pytest.approx(6 * np.sqrt(8), abs=1e-9)
        assert report.witness["pinching_deviation"] < 1e-12
        assert report.witness["concavity_holds"]

    def test_pinching_step_pauli_pair(self):
        """Test the exact pinching for two matrices: lhs 8, rhs 8, concavity with equality."""
        report = self.evaluator.pinching_trace_step([SIGMA_X, SIGMA_Y])
        assert report.lhs == pytest.approx(8.0, abs=1e-9)
        assert report.rhs == pytest.approx(8.0, abs=1e-9)
        assert report.witness["concavity_holds"]
        assert report.satisfied

    def test_pinching_step_random_pairs(self):
        """Test that D^(1/2) equals the averaged |A| for pairs and the verdict holds."""
        rng = np.random.default_rng(47)
        for _ in range(50):
            matrices = random_observables(3, 2, rng).matrices
            report = self.evaluator.pinching_trace_step(matrices)
            assert report.witness["pinching_exact"]
            assert report.witness["concavity_holds"]
            assert abs(report.witness["concavity_min_eigenvalue"]) < 1e-9 * max(1.0, report.rhs)
            assert report.satisfied

    @patch("src.relations.loewner_leq", return_value=False)
    def test_pinching_verdict_includes_concavity(self, mock_loewner_leq):
        """Test that a failed concavity check fails the report despite lhs <= rhs."""
        report = self.evaluator.pinching_trace_step([SIGMA_X, SIGMA_Y, SIGMA_Z])
        assert report.lhs <= report.rhs
        assert not report.satisfied
        mock_loewner_leq.assert_called_once()

    def test_pinching_step_commuting(self):
        report = self.evaluator.pinching_trace_step([SIGMA_Z, np.diag([1.0, 4.0])])
        assert report.lhs == pytest.approx(0.0, abs=1e-12)
        assert report.rhs == pytest.approx(0.0, abs=1e-6)
        assert report.satisfied

    def test_pinching_step_below_full_bound(self):
        """Test lhs <= pinching rhs <= block trace bound rhs on random tuples."""
        rng = np.random.default_rng(31)
        for _ in range(20):
            matrices = random_observables(3, 3, rng).matrices
            step = self.evaluator.pinching_trace_step(matrices)
            full = self.evaluator.block_commutator_trace_bound(matrices)
            assert step.satisfied
            assert step.witness["concavity_holds"]
            assert step.rhs <= full.rhs * (1 + 1e-9)

    def test_trace_state_refinement(self):
        """Test that the trace state hides the commutator the block norm sees."""
        chain = self.evaluator.trace_state_refinement([SIGMA_X, SIGMA_Y])
        assert chain.value("trace_state_commutator_norm") == pytest.approx(0.0, abs=1e-15)
        assert chain.value("block_commutator_norm") == pytest.approx(8.0)
        assert chain.satisfied

    def test_validation(self):
        """Test the Hermitian and dimension checks."""
        with pytest.raises(NotHermitianError):
            self.evaluator.block_commutator_trace_bound([SIGMA_X, np.array([[0, 1], [0, 0]])])
        with pytest.raises(DimensionMismatchError):
            self.evaluator.block_commutator_trace_bound([SIGMA_X, np.eye(3)])
        with pytest.raises(DimensionMismatchError):
            self.evaluator.pinching_trace_step([SIGMA_X])


class TestDispatchAndExamples:
    """Test cases for relation dispatch and the Gram example."""

    def test_relation_groups_partition_ids(self):
        assert len(set(RELATION_IDS)) == len(RELATION_IDS)
        assert set(RELATION_IDS) == set(STATE_RELATIONS + PAIR_RELATIONS + BLOCK_RELATIONS)

    def test_unknown_relation(self):
        with pytest.raises(UnknownRelationError):
            RelationEvaluator().evaluate("heisenberg_limit")

    def test_not_applicable_is_empty(self):
        """Test empty results for relations whose inputs are missing."""
        evaluator = RelationEvaluator()
        single = ObservableTuple.of(SIGMA_X)
        state = DensityState.basis(2, 0)
        assert evaluator.evaluate("variance_mean_bound", state, single) == []
        assert evaluator.evaluate("pinching_trace_step", state, single) == []
        assert evaluator.evaluate("det_sum_difference", state, single) == []

    def test_gram_example_at_zero(self):
        """Test G = [[1, 1], [1, 1/4]] with det -3/4 at theta = 0."""
        G, determinant = gram_negative_example(0.0)
        np.testing.assert_allclose(G, [[1, 1], [1, 0.25]], atol=1e-15)
        assert determinant == pytest.approx(-0.75, abs=1e-12)
        assert not is_psd(G)

    def test_gram_example_grid(self):
        """Test a negative determinant at pi/2 and on a 64-point grid."""
        assert gram_negative_example(np.pi / 2)[1] < 0
        grid = gram_negative_scan(np.linspace(0, 2 * np.pi, 64, endpoint=False))
        assert len(grid) == 64
        assert all(d < 0 for _, d in grid)
