import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from melonlpp.errors import DomainError
from melonlpp.plcore import (Ensemble, Grid, PLFunction, dumps_ensemble, loads_ensemble,
                             pl_affine_image, pl_affine_reparam, pl_eval, pl_running_max,
                             tol_abs)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def pl(values, t0=0.0, dt=1.0):
    values = np.asarray(values, float)
    return PLFunction(Grid.uniform(t0, dt, values.size - 1), values)


@st.composite
def pl_functions(draw, max_knots=12):
    m = draw(st.integers(1, max_knots))
    steps = draw(arrays(float, m, elements=st.floats(0.1, 2.0)))
    times = np.concatenate([[0.0], np.cumsum(steps)])
    values = draw(arrays(float, m + 1, elements=finite))
    return PLFunction(Grid(times), values)


class TestGrid:
    def test_uniform_knots(self):
        g = Grid.uniform(1.0, 0.5, 4)
        assert g.m == 4 and g.t0 == 1.0 and g.end == 3.0
        assert g.knot(2) == 2.0
        assert g.is_uniform

    @pytest.mark.parametrize("dt,m", [(0.0, 3), (-1.0, 3), (1.0, -1)])
    def test_bad_uniform(self, dt, m):
        with pytest.raises(DomainError):
            Grid.uniform(0.0, dt, m)

    def test_not_increasing(self):
        with pytest.raises(DomainError):
            Grid(np.array([0.0, 1.0, 1.0]))

    def test_index_exact_and_snapped(self):
        g = Grid.uniform(0.0, 0.1, 10)
        assert g.index(0.3) == 3
        assert g.index(g.knot(3) + 1e-13) == 3
        with pytest.raises(DomainError):
            g.index(0.35)
        with pytest.raises(DomainError):
            g.index(g.knot(3) + 1e-13, snap=False)

    def test_halved_keeps_uniform(self):
        g = Grid.uniform(0.0, 1.0, 3).halved()
        assert g.is_uniform and g.dt == 0.5 and g.m == 6

    def test_refine_inserts_sorted(self):
        g = Grid.uniform(0.0, 1.0, 2).refine([0.25, 1.5])
        np.testing.assert_array_equal(g.times, [0.0, 0.25, 1.0, 1.5, 2.0])
        assert not g.is_uniform

    def test_domain(self):
        with pytest.raises(DomainError):
            Grid.uniform(0.0, 1.0, 2).check_domain(2.5)


class TestEval:
    def test_knot_value(self):
        assert pl_eval(pl([0, 1, 2]), 1.0) == 1.0

    def test_interpolation(self):
        assert pl_eval(pl([0, 1, 2]), 0.5) == 0.5

    def test_slope_two(self):
        assert pl_eval(pl([0, 2, 4]), 1.5) == 3.0

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            pl_eval(pl([0, 1, 2]), -0.5)

    def test_non_finite_rejected(self):
        with pytest.raises(DomainError):
            pl([0, np.inf, 1])

    @given(pl_functions())
    def test_bit_exact_at_knots(self, f):
        np.testing.assert_array_equal(pl_eval(f, f.grid.times), f.values)


class TestRunningMax:
    def test_fixed_point(self):
        g = pl_running_max(pl([0, 1, 2]))
        np.testing.assert_array_equal(g.values, [0, 1, 2])

    def test_plateau(self):
        np.testing.assert_array_equal(pl_running_max(pl([0, 2, 1])).values, [0, 2, 2])

    def test_crossing_inside_interval(self):
        g = pl_running_max(pl([1, 0, 3]))
        # g(t) = max(1, 3(t - 1)) on [1, 2]: kink at t = 4/3
        np.testing.assert_allclose(g.grid.times, [0, 1, 4 / 3, 2])
        for t in np.linspace(1, 2, 31):
            assert g(t) == pytest.approx(max(1.0, 3 * (t - 1)), abs=1e-12)
        assert g(0.0) == 1.0 and g(1.0) == 1.0 and g(2.0) == 3.0

    @given(pl_functions())
    def test_matches_dense_running_max(self, f):
        g = pl_running_max(f)
        dense = np.linspace(f.grid.t0, f.grid.end, 801)
        dense = np.union1d(dense, f.grid.times)
        want = np.maximum.accumulate(pl_eval(f, dense))
        assert np.max(np.abs(pl_eval(g, dense) - want)) <= tol_abs(np.abs(f.values).max()) * 10

    @given(pl_functions())
    def test_nondecreasing_and_dominates(self, f):
        g = pl_running_max(f)
        assert np.all(np.diff(g.values) >= 0)
        assert np.all(pl_eval(g, f.grid.times) >= f.values)


class TestAffine:
    def test_identity(self):
        f = pl([0.0, 1.5, -2.0])
        g = pl_affine_reparam(f, 1, 1, 0, 0, f.grid)
        np.testing.assert_array_equal(g.values, f.values)

    def test_pointwise_map(self):
        g = pl_affine_reparam(pl([0, 1, 2]), 2, 1, 0, -1, Grid.uniform(0, 1, 2))
        np.testing.assert_allclose(g.values, [-1, 1, 3])

    def test_substitution(self):
        f = pl([1, 2, 3, 4])
        g = pl_affine_reparam(f, 1, 2, 1, -2, Grid.uniform(0, 0.5, 2))
        np.testing.assert_allclose(g.values, [0, 1, 2])

    @given(pl_functions(), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(-2, 2),
           st.floats(-2, 2), st.floats(-2, 2))
    def test_image_is_exact(self, f, alpha, beta, gamma, delta, slope):
        g = pl_affine_image(f, alpha, beta, gamma, delta, slope)
        u = np.linspace(g.grid.t0, g.grid.end, 57)
        want = alpha * pl_eval(f, np.clip(beta * u + gamma, f.grid.t0, f.grid.end)) + delta + slope * u
        np.testing.assert_allclose(pl_eval(g, u), want, atol=1e-9 * (1 + np.abs(want).max()))

    def test_image_needs_positive_beta(self):
        with pytest.raises(DomainError):
            pl_affine_image(pl([0, 1]), 1, 0, 0, 0)


class TestEnsemble:
    def test_rows_order(self, set_a):
        np.testing.assert_array_equal(set_a.rows(2, 1), [[0, 2, 4], [0, 1, 2]])

    def test_line_access(self, set_a):
        assert set_a.line(2)(1.5) == 3.0
        with pytest.raises(DomainError):
            set_a.line(3)

    def test_grid_mismatch(self):
        with pytest.raises(DomainError):
            Ensemble.from_lines([pl([0, 1]), pl([0, 1, 2])])

    def test_round_trip_uniform(self, set_a):
        text = dumps_ensemble(set_a)
        assert text.splitlines()[0] == "ENSEMBLE n=2 first=1 t0=0 dt=1 m=2"
        back = loads_ensemble(text)
        np.testing.assert_array_equal(back.values, set_a.values)
        assert back.grid == set_a.grid and back.first_line == 1

    @given(pl_functions(), st.integers(-3, 3))
    def test_round_trip_irregular(self, f, first):
        e = Ensemble(f.grid, np.stack([f.values, -f.values]), first)
        back = loads_ensemble(dumps_ensemble(e))
        np.testing.assert_array_equal(back.values, e.values)
        np.testing.assert_array_equal(back.grid.times, e.grid.times)
        assert back.first_line == first

    def test_bad_header(self):
        with pytest.raises(DomainError):
            loads_ensemble("ENSEMBLE n=2 first=1\n0 1\n")

    def test_halved_preserves_values(self, set_a):
        h = set_a.halved()
        np.testing.assert_allclose(h.values[:, ::2], set_a.values)
