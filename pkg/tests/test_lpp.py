import numpy as np
import pytest
from hypothesis import given, strategies as st

from melonlpp.errors import DomainError, InfeasibleError, UsageError
from melonlpp.lpp import (lpp_multi, lpp_multi_bruteforce, lpp_single, metric_composition_argmax,
                          optimizer_extract, passage_from_all, passage_to_all, shift_ordered,
                          verify_affine_shift, verify_metric_composition, verify_monotonicity,
                          verify_naive_bounds, verify_quadrangle, verify_refinement)
from melonlpp.paths import EndpointPair, tuple_length
from melonlpp.plcore import Ensemble, Grid, tol_abs
from melonlpp.sampler import RngState
from melonlpp.verify import feasible_instance, random_ensemble, random_pair

seeds = st.integers(0, 2**32 - 1)


def instance(seed, n_max=4, m_max=6, k_max=3, min_lines=1):
    return feasible_instance(RngState(seed, 7).generator(), n_max, m_max, k_max, min_lines)


@pytest.fixture
def fine_a():
    g = Grid.uniform(0, 0.5, 4)
    return Ensemble(g, np.stack([g.times, 2 * g.times]))


class TestSingle:
    def test_one_line(self):
        f = Ensemble(Grid.uniform(0, 1, 2), [[0, 1, 2]])
        assert lpp_single(f, 0, 1, 2, 1) == 2.0

    def test_single_jump(self, set_a):
        assert lpp_single(set_a, 0, 2, 2, 1) == 4.0

    def test_two_jumps(self):
        g = Grid.uniform(0, 0.5, 2)
        f = Ensemble(g, np.stack([0 * g.times, g.times, 0 * g.times]))
        assert lpp_single(f, 0, 3, 1, 1) == 1.0

    def test_infeasible_geometry(self, set_a):
        with pytest.raises(DomainError):
            lpp_single(set_a, 2, 2, 0, 1)
        with pytest.raises(DomainError):
            lpp_single(set_a, 0, 1, 2, 2)


class TestMulti:
    def test_two_paths(self, set_a):
        pair = EndpointPair([0, 0], 2, [2, 2], 1)
        assert lpp_multi(set_a, pair) == 6.0
        assert lpp_multi_bruteforce(set_a, pair) == 6.0

    def test_too_many_paths(self, set_a):
        with pytest.raises(InfeasibleError):
            lpp_multi(set_a, EndpointPair([0, 0, 0], 2, [2, 2, 2], 1))
        with pytest.raises(InfeasibleError):
            lpp_multi_bruteforce(set_a, EndpointPair([0, 0, 0], 2, [2, 2, 2], 1))

    def test_bruteforce_cap(self):
        f = Ensemble(Grid.uniform(0, 1, 20), np.zeros((2, 21)))
        with pytest.raises(UsageError):
            lpp_multi_bruteforce(f, EndpointPair([0], 2, [20], 1))

    def test_constant_is_zero(self, constant2):
        assert lpp_multi_bruteforce(constant2, EndpointPair([0, 1], 2, [1, 2], 1)) == 0.0

    def test_degenerate_interval(self):
        f = Ensemble(Grid(np.array([0.0])), np.full((3, 1), 5.0))
        assert lpp_multi_bruteforce(f, EndpointPair([0], 3, [0], 1)) == 0.0

    @given(seeds)
    def test_single_path_agrees(self, seed):
        f, pair = instance(seed, k_max=1)
        assert lpp_multi(f, pair) == pytest.approx(
            lpp_single(f, pair.xs[0], pair.n, pair.ys[0], pair.m), abs=1e-12)

    @given(seeds)
    def test_oracle_equivalence(self, seed):
        gen = RngState(seed, 11).generator()
        f = random_ensemble(gen, int(gen.integers(1, 4)), int(gen.integers(1, 7)))
        pair = random_pair(gen, f, int(gen.integers(1, 4)))
        try:
            a = lpp_multi(f, pair)
        except InfeasibleError:
            with pytest.raises(InfeasibleError):
                lpp_multi_bruteforce(f, pair)
            return
        assert abs(a - lpp_multi_bruteforce(f, pair)) <= tol_abs(a)

    @given(seeds)
    def test_refinement_invariance(self, seed):
        f, pair = instance(seed, m_max=5, k_max=2)
        assert verify_refinement(f, pair).passed

    @given(seeds, st.floats(-3, 3), st.floats(-3, 3))
    def test_affine_shift(self, seed, slope, const):
        f, pair = instance(seed)
        assert verify_affine_shift(f, pair, slope, const).passed

    def test_constant_shift_leaves_value(self, set_a):
        pair = EndpointPair([0, 0], 2, [2, 2], 1)
        assert lpp_multi(set_a + 7.5, pair) == lpp_multi(set_a, pair)


class TestOptimizer:
    def test_tie_broken_by_side(self, constant2):
        pair = EndpointPair([0], 2, [2], 1)
        right = optimizer_extract(constant2, pair, "rightmost")
        left = optimizer_extract(constant2, pair, "leftmost")
        assert right.tuple[0].jumps.tolist() == [2.0] and left.tuple[0].jumps.tolist() == [0.0]
        assert right.value == left.value == 0.0

    def test_unique(self, set_a):
        pair = EndpointPair([0], 2, [2], 1)
        for side in ("rightmost", "leftmost"):
            assert optimizer_extract(set_a, pair, side).tuple[0].jumps.tolist() == [2.0]

    def test_forced(self, set_a):
        pair = EndpointPair([0, 0], 2, [2, 2], 1)
        for side in ("rightmost", "leftmost"):
            assert optimizer_extract(set_a, pair, side).tuple.jump_matrix().ravel().tolist() == [0, 2]

    def test_bad_side(self, set_a):
        with pytest.raises(UsageError):
            optimizer_extract(set_a, EndpointPair([0], 2, [2], 1), "middle")

    @given(seeds)
    def test_valid_and_exact(self, seed):
        f, pair = instance(seed)
        for side in ("rightmost", "leftmost"):
            opt = optimizer_extract(f, pair, side)
            assert opt.value == pytest.approx(lpp_multi(f, pair), abs=1e-9)
            assert abs(tuple_length(f, opt.tuple) - opt.value) <= 1e3 * tol_abs(opt.value)


class TestComposition:
    def test_linear(self, set_a):
        z, v = metric_composition_argmax(set_a, EndpointPair([0], 2, [2], 1), 2)
        assert z.tolist() == [2.0] and v == 4.0

    def test_constant(self, constant2):
        z, v = metric_composition_argmax(constant2, EndpointPair([0, 1], 2, [1, 2], 1), 2)
        assert v == 0.0 and z.tolist() == [1.0, 2.0]

    def test_level_range(self, set_a):
        with pytest.raises(DomainError):
            metric_composition_argmax(set_a, EndpointPair([0], 2, [2], 1), 1)

    @given(seeds)
    def test_top_level_is_top_jump(self, seed):
        f, pair = instance(seed, k_max=1, min_lines=2)
        z, _ = metric_composition_argmax(f, pair, pair.n)
        assert z[0] == optimizer_extract(f, pair).tuple[0].jump(pair.n)

    @given(seeds)
    def test_value_matches(self, seed):
        f, pair = instance(seed, min_lines=2)
        assert verify_metric_composition(f, pair).passed

    @given(seeds)
    def test_profiles_are_consistent(self, seed):
        f, pair = instance(seed, k_max=2)
        A = passage_to_all(f, pair.xs, pair.n, pair.m)
        B = passage_from_all(f, pair.n, pair.ys, pair.m)
        yi = tuple(f.grid.index(t) for t in pair.ys)
        xi = tuple(f.grid.index(t) for t in pair.xs)
        v = lpp_multi(f, pair)
        assert A[yi] == pytest.approx(v, abs=1e-9) and B[xi] == pytest.approx(v, abs=1e-9)


class TestVerifiers:
    def test_quadrangle_example(self, fine_a):
        A = EndpointPair([0], 2, [2], 1)
        B = EndpointPair([0.5], 2, [1], 1)
        rep = verify_quadrangle(fine_a, A, B)
        assert rep.values == {"pq": 4.0, "pq_prime": 1.0, "left": 2.0, "right": 3.0}
        assert rep.slack == 0.0 and rep.passed

    @given(seeds)
    def test_quadrangle_self(self, seed):
        f, pair = instance(seed)
        rep = verify_quadrangle(f, pair, pair)
        assert rep.passed and abs(rep.slack) <= tol_abs(rep.values["pq"])

    def test_monotonicity_example(self, set_a):
        A, B = EndpointPair([0], 2, [1], 1), EndpointPair([0], 2, [2], 1)
        rep = verify_monotonicity(set_a, A, B, 0)
        assert rep.passed
        assert rep.values["rightmost"] == {"a": [[1.0]], "b": [[2.0]]}

    def test_monotonicity_self(self, set_a):
        pair = EndpointPair([0, 0], 2, [2, 2], 1)
        assert verify_monotonicity(set_a, pair, pair, 0).passed

    def test_shift_order(self):
        A = EndpointPair([0], 2, [1], 1)
        B = EndpointPair([0, 1], 2, [1, 2], 1)
        # padding puts +inf above A's last entry, so only s = -1 works here
        assert shift_ordered(A, B, -1)
        assert not shift_ordered(A, B, 0) and not shift_ordered(A, B, 1)
        assert shift_ordered(B, B, 0)

    def test_naive_bounds_example(self, set_a):
        rep = verify_naive_bounds(set_a, EndpointPair([0, 0], 2, [2, 2], 1))
        checks = {c["check"]: c for c in rep.values["checks"]}
        assert checks["upper"]["lhs"] == 6.0 and checks["upper"]["rhs"] == 8.0
        assert checks["lower"]["lhs"] == 4.0 and checks["lower"]["rhs"] == 6.0
        assert rep.passed

    def test_naive_bounds_single_path(self, set_a):
        rep = verify_naive_bounds(set_a, EndpointPair([0], 2, [2], 1), perturb=[])
        assert rep.slack == 0.0 and rep.passed

    @given(seeds)
    def test_naive_bounds_random(self, seed):
        f, pair = instance(seed)
        assert verify_naive_bounds(f, pair).passed

    def test_report_json(self, set_a):
        rep = verify_quadrangle(set_a, EndpointPair([0], 2, [2], 1), EndpointPair([0], 2, [2], 1))
        assert set(rep.to_dict()) == {"lemma", "inputs_digest", "values", "slack", "pass", "note"}
