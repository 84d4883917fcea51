import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caqrp.errors import ValidationError
from caqrp.mcdm import (
    CriterionSpec,
    DecisionMatrix,
    ahp_weights,
    apply_weights,
    criteria_from,
    ideal_solutions,
    normalize_matrix,
    parse_ratio,
    relative_closeness,
    separation_measures,
    topsis_rank,
    validate_pairwise,
)
from conftest import NEIGHBORS, WORKED_A, WORKED_KINDS, WORKED_R, WORKED_V, WORKED_W, WORKED_X
from oracles import ahp_by_hand, topsis_bruteforce

NAMES = ("psim", "stability", "rengy", "load")


def worked_matrix(values):
    return DecisionMatrix(NEIGHBORS, criteria_from(NAMES, WORKED_KINDS, WORKED_W), values)


class TestNormalize:
    def test_psim_column_matches_worked_example(self):
        R = normalize_matrix(WORKED_X)
        np.testing.assert_allclose(R[:, 0], [0.612, 0.680, 0.340, 0.068, 0.204], atol=1e-3)

    def test_single_row(self):
        assert normalize_matrix([[5.0]]).tolist() == [[1.0]]

    def test_three_four_five(self):
        np.testing.assert_allclose(normalize_matrix([[3.0], [4.0]]).ravel(), [0.6, 0.8])

    def test_zero_column_stays_zero(self):
        R = normalize_matrix([[0.0, 1.0], [0.0, 2.0]])
        assert R[:, 0].tolist() == [0.0, 0.0]

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError):
            normalize_matrix([[1.0, np.nan]])


class TestWeightsAndIdeals:
    def test_weighting_entry(self):
        V = apply_weights([[0.612, 0, 0, 0]], WORKED_W)
        assert V[0, 0] == pytest.approx(0.144, abs=1e-3)

    def test_unit_weight_is_identity(self):
        R = [[0.2], [0.9]]
        assert apply_weights(R, [1.0]).tolist() == R

    def test_zero_row(self):
        V = apply_weights([[0, 0, 0, 0], [1, 1, 1, 1]], WORKED_W)
        assert V[0].tolist() == [0, 0, 0, 0]

    def test_weight_length_mismatch(self):
        with pytest.raises(ValidationError):
            apply_weights([[1.0, 2.0]], [1.0])

    def test_weighted_matrix_matches_worked_example(self):
        np.testing.assert_allclose(apply_weights(WORKED_R, WORKED_W), WORKED_V, atol=1.5e-3)

    def test_worked_example_ideals(self):
        a_plus, a_minus = ideal_solutions(WORKED_V, WORKED_KINDS)
        np.testing.assert_allclose(a_plus, [0.160, 0.310, 0.057, 0.009], atol=1e-3)
        np.testing.assert_allclose(a_minus, [0.016, 0.175, 0.006, 0.075], atol=1e-3)

    def test_single_alternative_ideals_coincide(self):
        a_plus, a_minus = ideal_solutions([[0.1, 0.2]], ["benefit", "cost"])
        assert a_plus.tolist() == a_minus.tolist() == [0.1, 0.2]

    def test_two_rows_benefit(self):
        a_plus, a_minus = ideal_solutions([[0.3], [0.7]], ["benefit"])
        assert (a_plus.tolist(), a_minus.tolist()) == ([0.7], [0.3])


class TestSeparationAndCloseness:
    def setup_method(self):
        self.V = apply_weights(WORKED_R, WORKED_W)
        self.a_plus, self.a_minus = ideal_solutions(self.V, WORKED_KINDS)

    def test_n1_and_n2_separations(self):
        s_plus, s_minus = separation_measures(self.V, self.a_plus, self.a_minus)
        assert s_plus[0] == pytest.approx(0.055, abs=2e-3)
        assert s_minus[0] == pytest.approx(0.170, abs=2e-3)
        assert s_plus[1] == pytest.approx(0.103, abs=2e-3)
        assert s_minus[1] == pytest.approx(0.168, abs=2e-3)

    def test_row_at_positive_ideal(self):
        s_plus, _ = separation_measures([[0.4, 0.1]], [0.4, 0.1], [0.0, 0.3])
        assert s_plus[0] == 0.0

    def test_closeness_examples(self):
        rc = relative_closeness([0.055, 0.0, 0.0], [0.170, 0.3, 0.0])
        assert rc[0] == pytest.approx(0.756, abs=5e-3)
        assert rc[1] == 1.0
        assert rc[2] == 0.5


class TestTopsisRank:
    def test_table_two_from_printed_normalized_matrix(self):
        result = topsis_rank(worked_matrix(WORKED_R), prenormalized=True)
        np.testing.assert_allclose(result.closeness, [0.756, 0.619, 0.300, 0.480, 0.373], atol=0.01)
        assert result.rank.tolist() == [1, 2, 5, 3, 4]
        assert result.top(3) == ["n1", "n2", "n4"]

    def test_full_pipeline_from_raw_matrix(self):
        # Expected values come from the brute-force oracle; the printed R does
        # not follow from the printed X in the Stability column.
        _, _, rc_oracle, ranks_oracle = topsis_bruteforce(WORKED_X, WORKED_KINDS, WORKED_W)
        np.testing.assert_allclose(rc_oracle, [0.348, 0.666, 0.448, 0.649, 0.596], atol=1e-3)
        result = topsis_rank(worked_matrix(WORKED_X))
        np.testing.assert_allclose(result.closeness, rc_oracle, atol=1e-12)
        assert result.rank.tolist() == ranks_oracle
        assert set(result.top(3)) == {"n2", "n4", "n5"}

    def test_dominating_alternative_wins(self):
        crit = criteria_from(("a", "b"), ("benefit", "cost"), (0.5, 0.5))
        result = topsis_rank(DecisionMatrix(["x", "y"], crit, [[1.0, 5.0], [2.0, 3.0]]))
        assert result.order == ["y", "x"]

    def test_identical_alternatives_tie_in_input_order(self):
        crit = criteria_from(("a",), ("benefit",), (1.0,))
        result = topsis_rank(DecisionMatrix(["p", "q", "r"], crit, [[2.0], [2.0], [2.0]]))
        assert result.closeness.tolist() == [0.5, 0.5, 0.5]
        assert result.order == ["p", "q", "r"]

    def test_rejects_bad_weight_sum(self):
        with pytest.raises(ValidationError):
            DecisionMatrix(["a"], [CriterionSpec("c", "benefit", 0.4)], [[1.0]])

    def test_rejects_negative_entries(self):
        with pytest.raises(ValidationError):
            DecisionMatrix(["a"], [CriterionSpec("c", "benefit", 1.0)], [[-1.0]])


def random_instance(rng, m=None, n=None):
    m = m or int(rng.integers(1, 11))
    n = n or int(rng.integers(1, 7))
    values = rng.uniform(0, 10, size=(m, n))
    # sprinkle exact zeros and duplicated rows to exercise degenerate paths
    values[rng.random((m, n)) < 0.05] = 0.0
    if m > 1 and rng.random() < 0.1:
        values[1] = values[0]
    kinds = [("benefit", "cost")[int(b)] for b in rng.integers(0, 2, size=n)]
    raw = rng.uniform(0.01, 1, size=n)
    weights = raw / raw.sum()
    crit = [CriterionSpec(f"c{j}", kinds[j], float(weights[j])) for j in range(n)]
    return DecisionMatrix(list(range(m)), crit, values)


class TestProperties:
    def test_oracle_agreement_random(self):
        rng = np.random.default_rng(20240501)
        for _ in range(300):
            X = random_instance(rng)
            sp, sm, rc, ranks = topsis_bruteforce(X.values.tolist(), X.kinds, X.weights.tolist())
            result = topsis_rank(X)
            np.testing.assert_allclose(result.s_plus, sp, atol=1e-9)
            np.testing.assert_allclose(result.s_minus, sm, atol=1e-9)
            np.testing.assert_allclose(result.closeness, rc, atol=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.lists(st.floats(0, 1e6), min_size=3, max_size=3), min_size=1, max_size=8))
    def test_unit_column_norms(self, rows):
        R = normalize_matrix(rows)
        norms = np.linalg.norm(R, axis=0)
        for j, col in enumerate(np.array(rows).T):
            expected = 0.0 if not np.any(col) else 1.0
            assert norms[j] == pytest.approx(expected, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_column_scale_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        X = random_instance(rng)
        j = int(rng.integers(0, len(X.criteria)))
        scaled = X.values.copy()
        scaled[:, j] *= c
        a = topsis_rank(X)
        b = topsis_rank(DecisionMatrix(X.alternatives, X.criteria, scaled))
        np.testing.assert_allclose(a.closeness, b.closeness, atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        X = random_instance(rng)
        # distinct rows so ties do not depend on position
        X.values += np.arange(len(X.alternatives))[:, None] * 1e-3
        perm = rng.permutation(len(X.alternatives))
        Y = DecisionMatrix([X.alternatives[i] for i in perm], X.criteria, X.values[perm])
        a, b = topsis_rank(X), topsis_rank(Y)
        assert b.rank.tolist() == a.rank[perm].tolist()

    def test_determinism(self):
        X = random_instance(np.random.default_rng(7), m=6, n=4)
        a, b = topsis_rank(X), topsis_rank(X)
        assert a.rank.tolist() == b.rank.tolist()
        assert a.closeness.tobytes() == b.closeness.tobytes()

    def test_closeness_bounds_and_unit_iff_at_ideal(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            result = topsis_rank(random_instance(rng))
            assert np.all((result.closeness >= 0) & (result.closeness <= 1))
            at_one = result.closeness == 1.0
            assert np.array_equal(at_one, (result.s_plus == 0) & (result.s_minus > 0))


class TestAhp:
    def test_worked_matrix_validates(self):
        assert validate_pairwise(WORKED_A) == []

    def test_worked_example_weights(self):
        w = ahp_weights(WORKED_A)
        np.testing.assert_allclose(w, [0.235, 0.550, 0.098, 0.117], atol=5e-3)
        np.testing.assert_allclose(w, ahp_by_hand(WORKED_A), atol=1e-12)
        assert abs(w.sum() - 1) < 1e-12

    def test_all_ones(self):
        assert validate_pairwise(np.ones((3, 3))) == []
        np.testing.assert_allclose(ahp_weights(np.ones((5, 5))), [0.2] * 5)

    def test_two_by_two(self):
        np.testing.assert_allclose(ahp_weights([[1, 3], [1 / 3, 1]]), [0.75, 0.25])

    def test_reciprocity_violation_reported_with_indices(self):
        problems = validate_pairwise([[1, 3, 1], [3, 1, 1], [1, 1, 1]])
        assert any("reciprocity" in p and "(1,2)" in p for p in problems)
        with pytest.raises(ValidationError):
            ahp_weights([[1, 3], [3, 1]])

    def test_scale_bounds_and_diagonal(self):
        problems = validate_pairwise([[2, 12], [1 / 12, 1]])
        assert any("diagonal" in p for p in problems)
        assert any("outside [1/9, 9]" in p for p in problems)

    def test_parse_ratio(self):
        assert parse_ratio("1/5") == pytest.approx(0.2)
        assert parse_ratio("3") == 3.0
        with pytest.raises(ValidationError):
            parse_ratio("x")

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.sampled_from([1 / 9, 1 / 7, 1 / 5, 1 / 3, 1, 3, 5, 7, 9]), min_size=6, max_size=6))
    def test_weights_sum_to_one(self, upper):
        n = 4
        A = np.ones((n, n))
        it = iter(upper)
        for j in range(n):
            for k in range(j + 1, n):
                A[j, k] = next(it)
                A[k, j] = 1 / A[j, k]
        assert abs(ahp_weights(A).sum() - 1) < 1e-12
