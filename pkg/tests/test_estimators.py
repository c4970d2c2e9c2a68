import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import romp
from romp.estimators import (
    SizeGuardError,
    brute_force,
    extreme_entry_mask,
    jp_fill,
    jp_row,
    justice_pursuit,
    lasso,
    matching_pursuit_omp,
    romp as romp_estimator,
    top_k_support,
    trimmed_inner_product,
)
from romp.model import DegenerateSystemError, support_set


def reference_trimmed(a, b, n1):
    """Independent pure-Python reference: sort by (|product|, index), sum kept."""
    q = [float(x) * float(y) for x, y in zip(a, b)]
    order = sorted(range(len(q)), key=lambda i: (abs(q[i]), i))
    return sum(q[i] for i in order[: len(q) - n1])


# dyadic values make products and sums exact, so reference and implementation
# must agree bit-for-bit regardless of summation order; ties are frequent
dyadic = st.integers(-16, 16).map(lambda v: v / 4.0)


class TestTrimmedInnerProduct:
    def test_hand_example_drop_largest(self):
        assert trimmed_inner_product([1, 2, 3], [1, 1, 1], 1) == 3.0

    def test_no_trimming_is_full_product(self):
        a = np.array([0.5, -2.0, 4.0])
        b = np.array([1.0, 3.0, 0.25])
        assert trimmed_inner_product(a, b, 0) == float(a @ b)

    def test_hand_example_with_signs(self):
        assert trimmed_inner_product([2, -1, 0, 5], [1, 3, 7, -1], 2) == 2.0

    def test_full_trim_gives_zero(self):
        assert trimmed_inner_product([1.0, 2.0], [3.0, 4.0], 2) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            trimmed_inner_product([1.0], [1.0, 2.0], 0)

    def test_budget_range(self):
        with pytest.raises(ValueError):
            trimmed_inner_product([1.0], [1.0], 2)

    @given(
        st.lists(st.tuples(dyadic, dyadic), min_size=1, max_size=20),
        st.data(),
    )
    @settings(max_examples=300, deadline=None)
    def test_matches_reference_including_ties(self, pairs, data):
        a = [x for x, _ in pairs]
        b = [y for _, y in pairs]
        n1 = data.draw(st.integers(0, len(pairs)))
        assert trimmed_inner_product(a, b, n1) == reference_trimmed(a, b, n1)

    @given(
        st.lists(st.tuples(dyadic, dyadic), min_size=1, max_size=15),
        st.integers(-6, 6),
        st.data(),
    )
    @settings(max_examples=200, deadline=None)
    def test_scaling_equivariance_powers_of_two(self, pairs, exp, data):
        # exact for c = +-2^m: |q| scaling preserves order, ties, and sums
        a = np.array([x for x, _ in pairs])
        b = np.array([y for _, y in pairs])
        n1 = data.draw(st.integers(0, len(pairs)))
        c = data.draw(st.sampled_from([1.0, -1.0])) * 2.0**exp
        assert trimmed_inner_product(c * a, b, n1) == c * trimmed_inner_product(a, b, n1)

    @given(st.lists(st.tuples(dyadic, dyadic), min_size=1, max_size=15), st.data())
    @settings(max_examples=200, deadline=None)
    def test_joint_permutation_invariance(self, pairs, data):
        a = np.array([x for x, _ in pairs])
        b = np.array([y for _, y in pairs])
        q = np.abs(a * b)
        if len(np.unique(q)) != len(q):  # distinct magnitudes only
            return
        n1 = data.draw(st.integers(0, len(pairs)))
        perm = data.draw(st.permutations(range(len(pairs))))
        perm = np.asarray(perm)
        assert trimmed_inner_product(a[perm], b[perm], n1) == trimmed_inner_product(a, b, n1)

    def test_equals_full_minus_top(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            N = int(rng.integers(1, 12))
            a = rng.integers(-8, 9, N) / 2.0
            b = rng.integers(-8, 9, N) / 2.0
            n1 = int(rng.integers(0, N + 1))
            q = a * b
            order = sorted(range(N), key=lambda i: (abs(q[i]), i))
            dropped = sum(q[i] for i in order[N - n1 :])
            assert trimmed_inner_product(a, b, n1) == float(q.sum()) - dropped


class TestTopKSupport:
    def test_mixed_signs(self):
        assert top_k_support(np.array([0.0, 5.0, -7.0, 1.0]), 2).indices == (1, 2)

    def test_all_zero_tie_break(self):
        assert top_k_support(np.zeros(5), 3).indices == (0, 1, 2)

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(1)
        v = rng.permutation(np.linspace(-3, 3, 20))  # distinct magnitudes? not quite
        v = rng.standard_normal(20)
        k = 6
        oracle = set(sorted(range(20), key=lambda i: -abs(v[i]))[:k])
        assert set(top_k_support(v, k).indices) == oracle

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            top_k_support(np.zeros(2), 3)


class TestRomp:
    def test_orthonormal_noiseless(self):
        X = np.eye(4)
        y = np.array([5.0, 0.0, 0.0, 0.0])
        res = romp_estimator(X, y, 1, 0)
        assert res.support_hat.indices == (0,)
        assert res.beta_hat[0] == 5.0

    def test_fully_trimmed_degenerate(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((6, 5))
        y = rng.standard_normal(6)
        res = romp_estimator(X, y, 2, 6)
        assert res.support_hat.indices == (0, 1)
        assert np.array_equal(res.beta_hat, np.zeros(5))

    def test_support_invariant_under_positive_scaling(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((30, 12))
        y = rng.standard_normal(30)
        base = romp_estimator(X, y, 4, 3).support_hat
        for c in (2.0, 0.25, 8.0):  # powers of two: exact score scaling
            assert romp_estimator(X, c * y, 4, 3).support_hat == base

    def test_k_too_large(self):
        with pytest.raises(ValueError):
            romp_estimator(np.eye(3), np.ones(3), 4, 0)

    def test_monte_carlo_recovery_feasibility_regime(self):
        # n=300, p=500, k=5, sigma=0.5, feasibility attack with 5 outliers
        from romp.corruption import attack_feasibility
        from romp.datagen import DesignDistribution, SignalScheme, assemble_instance

        wins = 0
        for seed in range(10):
            inst = assemble_instance(
                300, 5, 500, DesignDistribution("gaussian"),
                SignalScheme("pm_one", k=5), 0.5, seed,
            )
            att = attack_feasibility(inst, seed)
            res = romp_estimator(att.X, att.y, 5, 5)
            wins += res.support_hat == inst.truth.support
        assert wins >= 9


class TestOMP:
    def test_orthonormal_exact_recovery(self):
        rng = np.random.default_rng(3)
        Q, _ = np.linalg.qr(rng.standard_normal((20, 20)))
        beta = np.zeros(20)
        beta[[2, 5, 11]] = [1.0, -2.0, 0.5]
        y = Q @ beta
        res = matching_pursuit_omp(Q, y, 3)
        assert res.support_hat.indices == (2, 5, 11)
        assert np.allclose(res.beta_hat, beta, atol=1e-10)

    def test_zero_response(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((10, 6))
        res = matching_pursuit_omp(X, np.zeros(10), 3)
        assert res.support_hat.indices == (0, 1, 2)
        assert np.array_equal(res.beta_hat, np.zeros(6))

    def test_first_step_is_argmax(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((15, 8))
        y = rng.standard_normal(15)
        res = matching_pursuit_omp(X, y, 1)
        assert res.support_hat.indices == (int(np.argmax(np.abs(X.T @ y))),)

    def test_duplicate_columns_raise(self):
        X = np.ones((5, 2))
        X[:, 1] = X[:, 0]
        y = np.ones(5)
        with pytest.raises(DegenerateSystemError):
            matching_pursuit_omp(X, y, 2)


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class TestLasso:
    def test_lambda_zero_square_full_rank(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((8, 8)) + 3 * np.eye(8)
        y = rng.standard_normal(8)
        beta = lasso(X, y, 0.0)
        assert np.allclose(beta, np.linalg.solve(X, y), atol=1e-6)

    def test_orthonormal_soft_threshold(self):
        rng = np.random.default_rng(7)
        Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
        y = rng.standard_normal(12)
        lam = 0.3
        beta = lasso(Q, y, lam)
        assert np.allclose(beta, soft_threshold(Q.T @ y, lam), atol=1e-8)

    def test_lambda_above_max_gives_zero(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((10, 5))
        y = rng.standard_normal(10)
        lam = float(np.max(np.abs(X.T @ y)))
        assert np.array_equal(lasso(X, y, lam * 1.001), np.zeros(5))

    def test_kkt_conditions(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((40, 25)) / np.sqrt(40)
        beta_true = np.zeros(25)
        beta_true[[1, 7]] = [1.0, -1.0]
        y = X @ beta_true + 0.05 * rng.standard_normal(40)
        lam = 0.01
        beta, info = lasso(X, y, lam, full_output=True)
        assert info["kkt_violation"] <= 1e-6

    def test_objective_nonincreasing(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((30, 20))
        y = rng.standard_normal(30)
        _, info = lasso(X, y, 0.2, full_output=True)
        tr = info["objective_trace"]
        assert np.all(np.diff(tr) <= 1e-10 * np.maximum(1.0, tr[:-1]))

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            lasso(np.eye(2), np.ones(2), -1.0)


class TestJusticePursuit:
    def test_large_gamma_reduces_to_lasso(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((25, 15)) / 5.0
        y = rng.standard_normal(25)
        lam = 0.05
        beta_l = lasso(X, y, lam)
        beta_j, z = justice_pursuit(X, y, lam, float(np.linalg.norm(y)) * 2)
        assert np.array_equal(z, np.zeros(25))
        assert np.allclose(beta_j, beta_l, atol=1e-9)

    def test_zero_design_closed_form(self):
        y = np.array([3.0, -0.5, 0.2, -4.0])
        gam = 1.0
        beta, z = justice_pursuit(np.zeros((4, 3)), y, 0.1, gam)
        assert np.array_equal(beta, np.zeros(3))
        assert np.allclose(z, soft_threshold(-y, gam), atol=1e-12)

    def test_huge_lambda_closed_form(self):
        rng = np.random.default_rng(12)
        X = rng.standard_normal((6, 4))
        y = rng.standard_normal(6)
        gam = 0.3
        lam = 1e6
        beta, z = justice_pursuit(X, y, lam, gam)
        assert np.array_equal(beta, np.zeros(4))
        assert np.allclose(z, soft_threshold(-y, gam), atol=1e-10)

    def test_objective_nonincreasing(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((20, 10))
        y = rng.standard_normal(20)
        _, _, info = justice_pursuit(X, y, 0.1, 0.2, full_output=True)
        tr = info["objective_trace"]
        assert np.all(np.diff(tr) <= 1e-10 * np.maximum(1.0, tr[:-1]))

    def test_kkt_conditions(self):
        rng = np.random.default_rng(14)
        X = rng.standard_normal((30, 12)) / np.sqrt(30)
        y = rng.standard_normal(30)
        _, _, info = justice_pursuit(X, y, 0.02, 0.05, full_output=True)
        assert info["kkt_violation"] <= 1e-6


class TestJPPreprocessing:
    def test_fill_scale_equivalence_under_uniform_magnitudes(self):
        # all-equal-magnitude X with the extreme set covering everything:
        # filling to magnitude 1 is a global rescale, so the support matches
        # justice pursuit on X with lam rescaled accordingly
        rng = np.random.default_rng(15)
        n1 = 8
        N = 16  # n = N - n1 = 8, fraction covers all entries
        c = 0.25
        X = c * (2.0 * rng.integers(0, 2, size=(N, 10)) - 1.0)
        beta_true = np.zeros(10)
        beta_true[[0, 3]] = [2.0, -1.0]
        y = X @ beta_true + 0.01 * rng.standard_normal(N)
        lam, gam = 0.05, 10.0
        beta_fill, _ = jp_fill(X, y, n1, lam, gam)
        beta_ref, _ = justice_pursuit(X, y, lam * c, gam)
        assert np.array_equal(
            np.flatnonzero(beta_fill), np.flatnonzero(beta_ref)
        )

    def test_fill_zero_budget_is_identity(self):
        rng = np.random.default_rng(16)
        X = rng.standard_normal((12, 6))
        y = rng.standard_normal(12)
        b1, z1 = jp_fill(X, y, 0, 0.1, 0.2)
        b2, z2 = justice_pursuit(X, y, 0.1, 0.2)
        assert np.array_equal(b1, b2) and np.array_equal(z1, z2)

    def test_fill_targets_planted_cells(self):
        from romp.corruption import attack_sco
        from romp.datagen import DesignDistribution, SignalScheme, assemble_instance

        inst = assemble_instance(
            40, 4, 30, DesignDistribution("gaussian"), SignalScheme("pm_one", k=3), 0.5, 21
        )
        att = attack_sco(inst, 1000.0, seed=2)
        mask = extreme_entry_mask(att.X, 4)
        planted = (att.ledger.x_mask) & (att.X != 0.0)
        # every huge planted cell is in the extreme set
        assert np.all(mask[planted])

    def test_row_zero_budget_is_identity(self):
        rng = np.random.default_rng(17)
        X = rng.standard_normal((10, 5))
        y = rng.standard_normal(10)
        b1, z1 = jp_row(X, y, 0, 0.1, 0.2)
        b2, z2 = justice_pursuit(X, y, 0.1, 0.2)
        assert np.array_equal(b1, b2) and np.array_equal(z1, z2)

    def test_row_discards_huge_row(self):
        rng = np.random.default_rng(18)
        X = rng.standard_normal((10, 6))
        X[4] = 1e5
        y = rng.standard_normal(10)
        _, z, info = jp_row(X, y, 1, 0.1, 0.2, full_output=True)
        assert 4 not in info["kept_rows"]
        assert len(info["kept_rows"]) == 9

    def test_row_budget_limit(self):
        with pytest.raises(ValueError):
            jp_row(np.ones((3, 2)), np.ones(3), 3, 0.1, 0.1)


class TestBruteForce:
    def test_consistent_tiny_instance(self):
        rng = np.random.default_rng(19)
        X = rng.standard_normal((8, 6))
        beta = np.zeros(6)
        beta[[1, 4]] = [1.5, -0.5]
        y = X @ beta
        res = brute_force(X, y, 8, 2)
        assert res.support_hat.indices == (1, 4)
        assert res.diagnostics["objective"] < 1e-10

    def test_all_rows_full_support_equals_least_squares(self):
        rng = np.random.default_rng(20)
        X = rng.standard_normal((7, 3))
        y = rng.standard_normal(7)
        res = brute_force(X, y, 7, 3)
        from romp.model import least_squares

        assert np.allclose(res.beta_hat, least_squares(X, y), atol=1e-10)

    def test_size_guard_refusal(self):
        X = np.zeros((30, 20))
        with pytest.raises(SizeGuardError, match=r"\d+"):
            brute_force(X, np.zeros(30), 15, 10, size_guard=1000)

    def test_optimality_against_random_candidates(self):
        rng = np.random.default_rng(21)
        X = rng.standard_normal((7, 5))
        y = rng.standard_normal(7)
        n, k = 5, 2
        res = brute_force(X, y, n, k)
        best = res.diagnostics["objective"]
        from itertools import combinations

        rows_list = list(combinations(range(7), n))
        cols_list = list(combinations(range(5), k))
        for _ in range(100):
            rows = rows_list[rng.integers(len(rows_list))]
            cols = cols_list[rng.integers(len(cols_list))]
            A = X[np.ix_(rows, cols)]
            theta, *_ = np.linalg.lstsq(A, y[list(rows)], rcond=None)
            obj = np.linalg.norm(y[list(rows)] - A @ theta)
            assert best <= obj + 1e-9

    def test_handles_rank_deficient_submatrices(self):
        # zero blocks appear in attacked instances; objective stays defined
        X = np.zeros((6, 4))
        X[:3, :2] = np.eye(3, 2)
        y = np.array([1.0, 2.0, 0.0, 1.0, 1.0, 1.0])
        res = brute_force(X, y, 4, 2)
        assert np.isfinite(res.diagnostics["objective"])


class TestEstimatorResult:
    def test_romp_support_matches_nonzeros_generically(self):
        rng = np.random.default_rng(22)
        X = rng.standard_normal((25, 10))
        y = rng.standard_normal(25)
        res = romp_estimator(X, y, 3, 2)
        assert set(np.flatnonzero(res.beta_hat)) == set(res.support_hat.indices)

    def test_diagnostics_present(self):
        res = romp_estimator(np.eye(3), np.ones(3), 1, 0)
        for key in ("iterations", "objective", "converged", "wall_time_s"):
            assert key in res.diagnostics
