import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropyfs.errors import ConfigError, ResolutionError
from entropyfs.grid import (
    CellSet,
    DyadicCube,
    GridFunction,
    cellset_from_indices,
    constant_function,
    cube_average,
    cube_span,
    enumerate_cubes,
    format_grid_text,
    grid_function,
    indicator_function,
    level_set,
    parse_grid_text,
    weighted_measure,
)

import oracles


class TestCubeAverage:
    def test_constant(self):
        f = constant_function(4, 3.0)
        assert cube_average(f, DyadicCube(0, 1, 0)) == 3.0

    def test_indicator_mean(self):
        f = indicator_function(2, 0.0, 0.5)
        assert cube_average(f, DyadicCube(0, 0, 0)) == 0.5

    def test_right_half_direct_sum(self):
        f = grid_function(2, [1.0, 2.0, 3.0, 4.0])
        q = DyadicCube(0, 1, 1)
        assert cube_average(f, q) == oracles.cube_average_direct(f, q) == 3.5

    def test_too_fine_raises(self):
        f = constant_function(2, 1.0)
        with pytest.raises(ResolutionError):
            cube_average(f, DyadicCube(0, 3, 0))

    def test_shifted_cubes_match_direct_overlap(self, random_grid8):
        for q in enumerate_cubes(4, (1, 2)):
            got = cube_average(random_grid8, q)
            want = oracles.cube_average_direct(random_grid8, q)
            assert got == pytest.approx(want, rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(a=st.floats(-5, 5, allow_nan=False), c=st.floats(-5, 5, allow_nan=False))
    def test_linearity(self, a, c, random_grid8):
        f = random_grid8
        g = GridFunction(f.level, a * f.cells + c)
        for q in (DyadicCube(0, 0, 0), DyadicCube(0, 3, 5), DyadicCube(1, 2, 3)):
            lhs = cube_average(g, q)
            rhs = a * cube_average(f, q) + c
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestWeightedMeasure:
    def test_lebesgue(self):
        w = constant_function(4, 1.0)
        e = cellset_from_indices(4, range(4))
        assert weighted_measure(w, e) == 0.25

    def test_empty(self):
        w = constant_function(4, 1.0)
        assert weighted_measure(w, CellSet(4, np.zeros(16, dtype=bool))) == 0.0

    def test_direct_sum(self):
        w = grid_function(2, [1.0, 0.0, 2.0, 1.0])
        e = cellset_from_indices(2, [0, 2])
        assert weighted_measure(w, e) == 0.75

    def test_level_mismatch(self):
        w = constant_function(4, 1.0)
        with pytest.raises(ResolutionError):
            weighted_measure(w, cellset_from_indices(3, [0]))

    def test_full_set_matches_top_average(self, rough_weight8):
        w = rough_weight8
        full = CellSet(8, np.ones(256, dtype=bool))
        assert weighted_measure(w, full) == cube_average(w, DyadicCube(0, 0, 0))


class TestLevelSet:
    def test_strict_at_boundary(self):
        f = constant_function(3, 1.0)
        assert level_set(f, 1.0).count == 0

    def test_all_cells(self):
        f = constant_function(3, 1.0)
        assert level_set(f, 0.5).count == 8

    def test_direct_comparison(self):
        f = grid_function(2, [0.1, 0.9, 0.5, 0.7])
        s = level_set(f, 0.6)
        assert list(np.flatnonzero(s.members)) == [1, 3]

    @settings(max_examples=40, deadline=None)
    @given(
        t1=st.floats(-1, 5, allow_nan=False),
        t2=st.floats(-1, 5, allow_nan=False),
    )
    def test_nesting(self, t1, t2, random_grid8):
        lo, hi = min(t1, t2), max(t1, t2)
        assert level_set(random_grid8, hi).issubset(level_set(random_grid8, lo))


class TestEnumerateCubes:
    def test_counts_single_lattice(self):
        assert len(enumerate_cubes(1, (0,))) == 3
        assert len(enumerate_cubes(2, (0,))) == 7

    def test_counts_three_lattices(self):
        cubes = enumerate_cubes(2, (0, 1, 2))
        assert len(cubes) == 21
        # deterministic (lattice, level, index) order
        assert cubes == sorted(cubes)

    def test_first_lattice0_cubes(self):
        cubes = enumerate_cubes(1, (0,))
        assert cubes[0] == DyadicCube(0, 0, 0)
        assert cubes[1:] == [DyadicCube(0, 1, 0), DyadicCube(0, 1, 1)]


class TestExactness:
    def test_children_measures_sum_exactly(self):
        for q in enumerate_cubes(6, (0,)):
            if q.level < 6:
                c0, c1 = q.children()
                assert c0.measure + c1.measure == q.measure

    def test_cellset_measure_is_binary_fraction(self):
        s = cellset_from_indices(5, [0, 3, 17])
        assert s.measure == 3 * 2.0**-5


class TestCubeGeometry:
    def test_clipped_shifted_interval(self):
        a, b = DyadicCube(1, 1, 1).interval()
        assert a == pytest.approx(5.0 / 6.0)
        assert b == 1.0

    def test_wrapped_start(self):
        # start 1/3 + 3/4 wraps to 1/12
        a, b = DyadicCube(1, 2, 3).interval()
        assert a == pytest.approx(1.0 / 12.0)
        assert b == pytest.approx(1.0 / 12.0 + 0.25)

    def test_span(self):
        assert cube_span(DyadicCube(0, 2, 3), 5) == slice(24, 32)

    def test_invalid_cube(self):
        with pytest.raises(ValueError):
            DyadicCube(0, 2, 4)
        with pytest.raises(ValueError):
            DyadicCube(3, 1, 0)


class TestTextFormat:
    def test_roundtrip(self, random_grid8):
        again = parse_grid_text(format_grid_text(random_grid8))
        assert again.level == 8
        assert (again.cells == random_grid8.cells).all()

    def test_bad_header(self):
        with pytest.raises(ConfigError):
            parse_grid_text("lvl=2\n1 2 3 4\n")

    def test_wrong_count(self):
        with pytest.raises(ConfigError):
            parse_grid_text("level=2\n1 2 3\n")
