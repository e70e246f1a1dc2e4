import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from linfmeasure.boxes import (
    Box,
    BoxUnion,
    EMPTY_BOX,
    LatticeVector,
    SparseVector,
    ZERO_VECTOR,
    unit_cell,
    union_disjointify,
    union_measure,
)
from linfmeasure.errors import NotDisjointifiable
from linfmeasure.intervals import INF, IntervalUnion

sys.path.insert(0, str(Path(__file__).parent))
from oracles import box_measure_oracle, inclusion_exclusion_volume

unit_rationals = st.fractions(min_value=0, max_value=1, max_denominator=16)


@st.composite
def unit_subintervals(draw):
    lo = draw(unit_rationals)
    hi = draw(unit_rationals)
    if lo > hi:
        lo, hi = hi, lo
    return (lo, hi)


@st.composite
def unit_tail_boxes(draw, max_coords=4):
    coords = draw(st.lists(st.integers(0, 6), max_size=max_coords, unique=True))
    explicit = {c: draw(unit_subintervals()) for c in coords}
    return Box.make(explicit)


def test_sparse_vector_normalizes():
    v = SparseVector.of({3: "1/2", 1: 0})
    assert v.entries == ((3, Fraction(1, 2)),)
    assert v.get(1) == 0 and v.get(3) == Fraction(1, 2)
    assert (v + (-v)).is_zero


def test_lattice_vector_arithmetic():
    z = LatticeVector.of({0: 1, 2: -1})
    assert (z + (-z)).entries == ()
    assert z.to_sparse().get(2) == -1


def test_unit_cell_measure_is_one():
    assert unit_cell().measure() == 1


def test_half_side_box_measure():
    b = Box.make({0: (0, Fraction(1, 2))})
    assert b.measure() == Fraction(1, 2)


def test_short_tail_box_is_null():
    assert Box.make({}, tail=(0, Fraction(1, 2))).measure() == 0


def test_long_tail_box_is_infinite():
    assert Box.make({}, tail=(0, 2)).measure() == INF


def test_zero_times_infinity_is_zero():
    b = Box.make({0: (Fraction(1, 2), Fraction(1, 2))}, tail=(0, 2))
    assert b.measure() == 0


def test_degenerate_coordinate_nullifies():
    b = Box.make({5: (Fraction(1, 3), Fraction(1, 3))})
    assert b.measure() == 0


def test_empty_box():
    b = Box.make({0: (0, 1)}).intersect(Box.make({0: (2, 3)}))
    assert b.is_empty
    assert b.measure() == 0


def test_prefix_half_boxes_exact():
    for n in range(1, 31):
        b = Box.make({i: (0, Fraction(1, 2)) for i in range(n)})
        assert b.measure() == Fraction(1, 2) ** n


def test_translate_preserves_measure():
    b = Box.make({0: (0, Fraction(1, 2)), 4: (Fraction(1, 4), 1)})
    t = SparseVector.of({0: "7/3", 4: "-1/2"})
    assert b.translate(t).measure() == b.measure()


def test_contains_point():
    b = Box.make({0: (0, Fraction(1, 2))}, tail=(0, 1))
    assert b.contains_point({0: Fraction(1, 4)})
    assert not b.contains_point({0: Fraction(3, 4)})
    assert not b.contains_point({1: Fraction(3, 2)})


def test_multi_interval_constraint():
    u = IntervalUnion.coerce([(0, Fraction(1, 3)), (Fraction(2, 3), 1)])
    b = Box.make({0: u})
    assert b.measure() == Fraction(2, 3)


def test_disjointify_splits_overlap():
    a = Box.make({0: (0, Fraction(3, 4))})
    b = Box.make({0: (Fraction(1, 4), 1)})
    d = union_disjointify(BoxUnion.of(a, b))
    total = sum((piece.measure() for piece in d.boxes), Fraction(0))
    assert total == 1
    for i, x in enumerate(d.boxes):
        for y in d.boxes[i + 1:]:
            assert x.intersect(y).measure() == 0


def test_disjointify_mixed_tails_rejected():
    a = Box.make({}, tail=(0, 1))
    b = Box.make({}, tail=(0, Fraction(1, 2)))
    with pytest.raises(NotDisjointifiable):
        union_disjointify(BoxUnion.of(a, b))


def test_union_measure_mixed_tails_inclusion_exclusion():
    # overlapping boxes with different tails still get a measure
    a = Box.make({}, tail=(0, 1))
    b = Box.make({}, tail=(0, Fraction(1, 2)))
    assert union_measure(BoxUnion.of(a, b)) == 1


def test_union_measure_matches_inclusion_exclusion_oracle():
    boxes = [
        Box.make({0: (0, Fraction(1, 2))}),
        Box.make({1: (Fraction(1, 4), Fraction(3, 4))}),
        Box.make({0: (Fraction(1, 4), 1), 1: (0, Fraction(1, 2))}),
    ]
    oracle = inclusion_exclusion_volume(
        [
            {0: (Fraction(0), Fraction(1, 2))},
            {1: (Fraction(1, 4), Fraction(3, 4))},
            {0: (Fraction(1, 4), Fraction(1)), 1: (Fraction(0), Fraction(1, 2))},
        ],
        [0, 1],
    )
    assert union_measure(BoxUnion.of(*boxes)) == oracle


@given(unit_tail_boxes())
@settings(max_examples=60)
def test_box_measure_matches_product_oracle(b):
    lengths = [c.total_length for _, c in b.explicit]
    assert b.measure() == box_measure_oracle(lengths, b.tail.total_length)


@given(unit_tail_boxes(), unit_tail_boxes())
@settings(max_examples=60)
def test_intersection_measure_bounded(a, b):
    m = a.intersect(b).measure()
    assert m <= a.measure() and m <= b.measure()


coarse_rationals = st.fractions(min_value=0, max_value=1, max_denominator=4)


@st.composite
def coarse_boxes(draw):
    coords = draw(st.lists(st.integers(0, 3), max_size=2, unique=True))
    explicit = {}
    for c in coords:
        lo = draw(coarse_rationals)
        hi = draw(coarse_rationals)
        if lo > hi:
            lo, hi = hi, lo
        explicit[c] = (lo, hi)
    return Box.make(explicit)


@given(st.lists(coarse_boxes(), min_size=1, max_size=3))
@settings(max_examples=30, deadline=None)
def test_disjointify_preserves_total(boxes):
    u = BoxUnion.of(*boxes)
    d = union_disjointify(u)
    total = sum((piece.measure() for piece in d.boxes), Fraction(0))
    assert total == union_measure(u)
    for i, x in enumerate(d.boxes):
        for y in d.boxes[i + 1:]:
            assert x.intersect(y).measure() == 0
