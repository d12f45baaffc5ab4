import numpy as np
import pytest
from conftest import (
    brute_box_min,
    exact_residual_sq,
    make_ilsb_instance,
    random_full_rank,
)

from intlowrank.boxed import (
    BoundTable,
    BoxConstraint,
    boxed_search,
    compute_bound_table,
    in_box_rounding,
    mch_reduce,
    solve_ilsb,
)
from intlowrank.exceptions import EmptyBoxError
from intlowrank.ils import SearchStats
from intlowrank.linalg import int_det


class TestBoxConstraint:
    def test_empty_interval_rejected(self):
        with pytest.raises(EmptyBoxError):
            BoxConstraint([0, 3], [4, 1])

    def test_uniform_and_contains(self):
        box = BoxConstraint.uniform(3, 0, 4)
        assert box.contains([0, 4, 2])
        assert not box.contains([0, 5, 2])
        assert np.array_equal(box.sizes, [5, 5, 5])

    def test_membership_is_per_coordinate(self):
        box = BoxConstraint([-1, 2], [1, 2])
        assert box.contains([1, 2])
        assert not box.contains([1, 1])


class TestInBoxRounding:
    @pytest.mark.parametrize(
        "c,lo,hi,nearest,second",
        [
            (2.3, 0, 4, 2, 3),
            (7.9, 0, 4, 4, 3),
            (1.0, 1, 1, 1, None),
            (-3.7, -2, 5, -2, -1),
            (2.5, 0, 4, 3, 2),
            (2.0, 0, 4, 2, 3),  # exact tie prefers the upper neighbour
        ],
    )
    def test_examples(self, c, lo, hi, nearest, second):
        assert in_box_rounding(c, lo, hi) == (nearest, second)

    def test_second_is_verified_by_exhaustion(self):
        rng = np.random.default_rng(20)
        for _ in range(200):
            lo = int(rng.integers(-5, 5))
            hi = lo + int(rng.integers(0, 6))
            c = float(rng.uniform(lo - 3, hi + 3))
            nearest, second = in_box_rounding(c, lo, hi)
            values = list(range(lo, hi + 1))
            best = min(values, key=lambda v: (abs(c - v), v))
            assert abs(c - nearest) == pytest.approx(abs(c - best))
            if second is None:
                assert lo == hi
            else:
                rest = [v for v in values if v != nearest]
                assert abs(c - second) == pytest.approx(min(abs(c - v) for v in rest))

    def test_empty_interval(self):
        with pytest.raises(EmptyBoxError):
            in_box_rounding(1.0, 3, 2)


def assert_boxed_reduction_contract(H, y, box, rp, permuted_box, rng, n_probe=15):
    n = rp.R.shape[0]
    Z = rp.Z
    # Z is a signed permutation (here: plain permutation) matrix
    assert abs(int_det(Z)) == 1
    assert np.array_equal(np.sort(np.abs(Z).sum(axis=0)), np.ones(n))
    assert np.array_equal(np.sort(np.abs(Z).sum(axis=1)), np.ones(n))
    # permuted bounds are the original ones routed through Z
    assert np.array_equal(Z.T @ box.lower, permuted_box.lower)
    assert np.array_equal(Z.T @ box.upper, permuted_box.upper)
    assert np.allclose(rp.R, np.triu(rp.R))
    assert np.all(np.abs(np.diag(rp.R)) > 0)
    for _ in range(n_probe):
        z = rng.integers(permuted_box.lower, permuted_box.upper + 1)
        x = Z @ z
        assert box.contains(x)
        lhs = float(np.sum((y - H @ x) ** 2))
        rhs = float(np.sum((rp.y_hat - rp.R @ z) ** 2) + rp.offset)
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))


class TestMCHReduce:
    def test_single_column_is_trivial(self):
        H = np.array([[3.0], [4.0]])
        box = BoxConstraint([0], [5])
        rp, pbox = mch_reduce(H, np.array([1.0, 2.0]), box)
        assert np.array_equal(rp.Z, np.eye(1))
        assert np.array_equal(pbox.lower, box.lower)
        assert np.array_equal(pbox.upper, box.upper)

    def test_contract_on_random_instances(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            n = int(rng.integers(2, 6))
            H, y, lo, hi = make_ilsb_instance(rng, n)
            box = BoxConstraint(lo, hi)
            rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
            assert_boxed_reduction_contract(H, y, box, rp, pbox, rng)

    def test_singleton_box_forces_unique_point(self):
        rng = np.random.default_rng(22)
        H = random_full_rank(rng, 5, 3)
        y = rng.integers(-9, 10, size=5)
        s = np.array([2, -1, 3])
        box = BoxConstraint(s, s)
        x, resid_sq = solve_ilsb(H.astype(float), y.astype(float), box)
        assert np.array_equal(x, s)
        assert resid_sq == pytest.approx(exact_residual_sq(H, y, s))


class TestBoundTable:
    def test_sign_straddling_gives_zero(self):
        rng = np.random.default_rng(23)
        R = np.triu(rng.normal(size=(3, 3))) + 3 * np.eye(3)
        box = BoxConstraint.uniform(3, -3, 3)
        table = compute_bound_table(R, np.zeros(3), box)
        assert np.array_equal(table.delta, np.zeros(3))
        assert np.array_equal(table.gamma, np.zeros(3))

    def test_scalar_example(self):
        # endpoints 7 - 4 = 3 and 7 - 2 = 5 share a sign, so delta = 3^2
        table = compute_bound_table(np.array([[2.0]]), np.array([7.0]), BoxConstraint([1], [2]))
        assert table.delta[0] == pytest.approx(9.0)
        assert table.gamma[0] == 0.0

    def test_soundness_by_exhaustion(self):
        rng = np.random.default_rng(24)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            H, y, lo, hi = make_ilsb_instance(rng, n, max_width=4)
            box = BoxConstraint(lo, hi)
            rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
            table = compute_bound_table(rp.R, rp.y_hat, pbox)
            grids = np.meshgrid(
                *[np.arange(l, u + 1) for l, u in zip(pbox.lower, pbox.upper)], indexing="ij"
            )
            Zs = np.stack([g.ravel() for g in grids], axis=1)
            terms = (rp.y_hat[None, :] - Zs @ rp.R.T) ** 2
            prefix = np.cumsum(terms, axis=1)
            for k in range(n):
                accumulated = prefix[:, k - 1] if k > 0 else np.zeros(len(Zs))
                assert np.all(accumulated >= table.gamma[k] - 1e-9)


class TestBoxedSearch:
    def test_all_singletons(self):
        rng = np.random.default_rng(25)
        H = random_full_rank(rng, 4, 3)
        y = rng.integers(-9, 10, size=4)
        s = np.array([1, 0, 2])
        box = BoxConstraint(s, s)
        rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
        z = boxed_search(rp, pbox, compute_bound_table(rp.R, rp.y_hat, pbox))
        assert np.array_equal(rp.Z @ z, s)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(26)
        for _ in range(80):
            n = int(rng.integers(1, 6))
            H, y, lo, hi = make_ilsb_instance(rng, n)
            x, _ = solve_ilsb(H.astype(float), y.astype(float), BoxConstraint(lo, hi))
            assert np.all(x >= lo) and np.all(x <= hi)
            assert exact_residual_sq(H, y, x) == brute_box_min(H, y, lo, hi)

    def test_tight_bounds_prune_a_subset_of_nodes(self):
        rng = np.random.default_rng(27)
        checked = 0
        for _ in range(40):
            n = int(rng.integers(2, 6))
            H, y, lo, hi = make_ilsb_instance(rng, n)
            box = BoxConstraint(lo, hi)
            rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
            table = compute_bound_table(rp.R, rp.y_hat, pbox)
            trace_tight, trace_plain = [], []
            z_tight = boxed_search(rp, pbox, table, trace=trace_tight)
            z_plain = boxed_search(rp, pbox, BoundTable.zero(n), trace=trace_plain)
            resid = lambda z: float(np.sum((rp.y_hat - rp.R @ z) ** 2))  # noqa: E731
            assert resid(z_tight) == pytest.approx(resid(z_plain))
            assert set(trace_tight) <= set(trace_plain)
            if table.gamma.max() > 0:
                checked += 1
        assert checked > 0  # the sweep must exercise nonzero bounds

    def test_bounds_strictly_decreasing(self):
        rng = np.random.default_rng(28)
        H, y, lo, hi = make_ilsb_instance(rng, 4)
        box = BoxConstraint(lo, hi)
        rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
        stats = SearchStats()
        boxed_search(rp, pbox, compute_bound_table(rp.R, rp.y_hat, pbox), stats=stats)
        assert all(b < a for a, b in zip(stats.betas, stats.betas[1:]))

    def test_wide_center_outside_box(self):
        # center far outside the box: enumeration walks monotonically inward
        from intlowrank.ils import ReducedProblem

        rp = ReducedProblem(
            R=np.array([[1.0]]), Z=np.eye(1, dtype=np.int64), y_hat=np.array([100.0]), offset=0.0
        )
        box = BoxConstraint([0], [4])
        z = boxed_search(rp, box, BoundTable.zero(1))
        assert np.array_equal(z, [4])


class TestSolveILSb:
    def test_feasible_unconstrained_optimum(self):
        H = np.array([[8.0, 1.0], [9.0, 2.0]])
        y = np.array([16.0, 17.0])
        x, resid_sq = solve_ilsb(H, y, BoxConstraint.uniform(2, 0, 3))
        assert np.array_equal(x, [2, 0])
        assert resid_sq == pytest.approx(1.0, abs=1e-10)

    def test_constructed_feasible_solution(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            n = int(rng.integers(1, 5))
            H = random_full_rank(rng, n + 1, n)
            x_true = rng.integers(0, 4, size=n)
            y = H @ x_true
            box = BoxConstraint.uniform(n, 0, 3)
            x, _ = solve_ilsb(H.astype(float), y.astype(float), box)
            assert exact_residual_sq(H, y, x) == 0

    def test_binding_box_changes_solution(self):
        H = np.array([[8.0, 1.0], [9.0, 2.0]])
        y = np.array([16.0, 17.0])
        box = BoxConstraint([0, 1], [3, 3])  # excludes the optimum (2, 0)
        x, resid_sq = solve_ilsb(H, y, box)
        assert box.contains(x)
        assert resid_sq > 1.0
        oracle = brute_box_min(H.astype(int), y.astype(int), box.lower, box.upper)
        assert exact_residual_sq(H.astype(int), y.astype(int), x) == oracle


class TestFiniteBound:
    def _problem(self):
        rng = np.random.default_rng(60)
        H, y, lo, hi = make_ilsb_instance(rng, 3)
        box = BoxConstraint(lo, hi)
        rp, pbox = mch_reduce(H.astype(float), y.astype(float), box)
        table = compute_bound_table(rp.R, rp.y_hat, pbox)
        return rp, pbox, table

    def test_exclusive_initial_bound_returns_none(self):
        rp, pbox, table = self._problem()
        assert boxed_search(rp, pbox, table, beta0=0.0) is None

    def test_generous_initial_bound_matches_default(self):
        rp, pbox, table = self._problem()
        z_default = boxed_search(rp, pbox, table)
        z_bounded = boxed_search(rp, pbox, table, beta0=1e12)
        resid = lambda z: float(np.sum((rp.y_hat - rp.R @ z) ** 2))  # noqa: E731
        assert resid(z_default) == pytest.approx(resid(z_bounded))


class TestFiniteEntries:
    def test_nan_rejected(self):
        box = BoxConstraint.uniform(2, 0, 3)
        H = np.array([[1.0, 0.0], [0.0, np.nan], [1.0, 1.0]])
        with pytest.raises(ValueError):
            solve_ilsb(H, np.zeros(3), box)

    def test_inf_target_rejected(self):
        box = BoxConstraint.uniform(2, 0, 3)
        H = np.eye(3)[:, :2] + 1.0
        H[2, 1] = 3.0
        with pytest.raises(ValueError):
            solve_ilsb(H, np.array([1.0, np.inf, 0.0]), box)
