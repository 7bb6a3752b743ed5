"""Box math: centers, distances, direction membership, overlap relations."""

import math

from hypothesis import given
from hypothesis import strategies as st

from visquery.geometry import Dir, Overlap, center, direction_match, distance, overlap
from visquery.snapshot import Box

from helpers import flat_element


def el_at(id, x, y, w=10, h=10):
    return flat_element(id, box=(x, y, w, h))


boxes = st.builds(
    Box,
    st.floats(-500, 500),
    st.floats(-500, 500),
    st.floats(0, 300),
    st.floats(0, 300),
)


class TestCenter:
    def test_square(self):
        assert center(Box(0, 0, 10, 10)) == (5, 5)

    def test_degenerate(self):
        assert center(Box(3, 4, 0, 0)) == (3, 4)

    def test_rect(self):
        assert center(Box(10, 20, 4, 6)) == (12, 23)


class TestDistance:
    def test_three_four_five(self):
        a = el_at("a", -5, -5)  # center (0, 0)
        b = el_at("b", -2, -1)  # center (3, 4)
        assert distance(a, b) == 5

    def test_identical_zero(self):
        a = el_at("a", 7, 9)
        b = el_at("b", 7, 9)
        assert distance(a, b) == 0

    def test_vertical(self):
        a = el_at("a", 1 - 5, 1 - 5)
        b = el_at("b", 1 - 5, 9 - 5)
        assert distance(a, b) == 8

    @given(boxes, boxes)
    def test_symmetry(self, b1, b2):
        a = flat_element("a", box=(b1.x, b1.y, b1.w, b1.h))
        b = flat_element("b", box=(b2.x, b2.y, b2.w, b2.h))
        assert distance(a, b) == distance(b, a)

    @given(boxes, boxes, boxes)
    def test_triangle_inequality(self, b1, b2, b3):
        a = flat_element("a", box=(b1.x, b1.y, b1.w, b1.h))
        b = flat_element("b", box=(b2.x, b2.y, b2.w, b2.h))
        c = flat_element("c", box=(b3.x, b3.y, b3.w, b3.h))
        assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-6


class TestDirectionMatch:
    def test_below(self):
        ref = el_at("r", 95, 95)       # center (100, 100)
        cand = el_at("c", 95, 155)     # center (100, 160)
        assert direction_match(cand, ref, Dir.BELOW)

    def test_above_antisymmetric(self):
        ref = el_at("r", 95, 95)
        cand = el_at("c", 95, 155)
        assert not direction_match(cand, ref, Dir.ABOVE)

    def test_max_distance_cutoff(self):
        ref = el_at("r", 0, 0)
        cand = el_at("c", 0, 80)  # 80px below
        assert direction_match(cand, ref, Dir.BELOW)
        assert not direction_match(cand, ref, Dir.BELOW, max_distance=50)

    def test_never_matches_self(self):
        a = el_at("a", 0, 0)
        for d in Dir:
            assert not direction_match(a, a, d)

    @given(st.floats(-300, 300), st.floats(-300, 300), st.floats(-300, 300), st.floats(-300, 300))
    def test_exclusivity(self, x1, y1, x2, y2):
        a = flat_element("a", box=(x1, y1, 0, 0))
        b = flat_element("b", box=(x2, y2, 0, 0))
        vertical = [direction_match(a, b, Dir.BELOW), direction_match(a, b, Dir.ABOVE)]
        horizontal = [direction_match(a, b, Dir.LEFT_OF), direction_match(a, b, Dir.RIGHT_OF)]
        assert sum(vertical) == (0 if y1 == y2 else 1)
        assert sum(horizontal) == (0 if x1 == x2 else 1)


class TestOverlap:
    def test_disjoint(self):
        assert overlap(el_at("a", 0, 0), el_at("b", 100, 100)) is Overlap.NONE

    def test_contains(self):
        a = flat_element("a", box=(0, 0, 10, 10))
        b = flat_element("b", box=(2, 2, 4, 4))
        assert overlap(a, b) is Overlap.CONTAINS
        assert overlap(b, a) is Overlap.CONTAINED_BY

    def test_partial(self):
        a = flat_element("a", box=(0, 0, 10, 10))
        b = flat_element("b", box=(5, 5, 10, 10))
        assert overlap(a, b) is Overlap.PARTIAL

    @given(boxes, boxes)
    def test_contains_mirror(self, b1, b2):
        a = flat_element("a", box=(b1.x, b1.y, b1.w, b1.h))
        b = flat_element("b", box=(b2.x, b2.y, b2.w, b2.h))
        assert (overlap(a, b) is Overlap.CONTAINS) == (overlap(b, a) is Overlap.CONTAINED_BY)
