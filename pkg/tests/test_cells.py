from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from linfmeasure.boxes import (
    Box,
    BoxUnion,
    LatticeVector,
    SparseVector,
    unit_cell,
)
from linfmeasure.cells import (
    Cell,
    NZQuery,
    NotSigmaFinite,
    cell_decompose,
    compatibility_check,
    meeting_cells,
    nz_set,
    patch_measure,
    sigma_cover,
)
from linfmeasure.errors import NotFinitelyCellCoverable, SampleOutsideOverlap
from linfmeasure.intervals import INF


def test_patch_measure_unit_cell():
    assert patch_measure(BoxUnion.of(unit_cell())) == 1


def test_patch_measure_half_tail_zero():
    assert patch_measure(BoxUnion.of(Box.make({}, tail=(0, Fraction(1, 2))))) == 0


def test_patch_measure_wide_coordinate():
    u = BoxUnion.of(Box.make({0: (0, 3)}))
    assert patch_measure(u) == 3
    assert len(cell_decompose(u)) == 3


def test_cell_decompose_fractional_span():
    # [1/2, 3/2] meets windows 0 and 1 with halves
    u = BoxUnion.of(Box.make({0: (Fraction(1, 2), Fraction(3, 2))}))
    pieces = cell_decompose(u)
    assert [c.base.get(0) for c, _ in pieces] == [0, 1]
    assert patch_measure(u) == 1


def test_cell_decompose_long_tail_raises():
    with pytest.raises(NotFinitelyCellCoverable):
        cell_decompose(BoxUnion.of(Box.make({}, tail=(0, 2))))


def test_patch_measure_long_tail_falls_back():
    assert patch_measure(BoxUnion.of(Box.make({}, tail=(0, 2)))) == INF


def test_meeting_cells_negative_window():
    u = BoxUnion.of(Box.make({1: (Fraction(-1, 2), Fraction(1, 4))}))
    cells = meeting_cells(u)
    # deterministic sparse-lexicographic order: the origin sorts first
    assert sorted(z.get(1) for z in cells) == [-1, 0]


def test_compatibility_agrees_on_overlap():
    t = SparseVector.of({0: Fraction(1, 2)})
    t2 = SparseVector.of({})
    sample = Box.make({0: (Fraction(1, 2), 1)})
    report = compatibility_check(t, t2, [sample])
    assert report.passed
    assert report.rows[0].measure_first == Fraction(1, 2)
    assert report.rows[0].measure_second == Fraction(1, 2)


def test_compatibility_rejects_outside_sample():
    t = SparseVector.of({0: Fraction(1, 2)})
    sample = Box.make({0: (0, Fraction(1, 4))})  # not inside the overlap
    with pytest.raises(SampleOutsideOverlap):
        compatibility_check(t, SparseVector.of({}), [sample])


def test_nz_set_unit_cell_origin_only():
    window = [LatticeVector.of({}), LatticeVector.unit(0, 1), LatticeVector.unit(0, -1)]
    q = NZQuery(
        set=BoxUnion.of(unit_cell()), delta=Fraction(1, 2), window=window
    )
    assert [z.entries for z in nz_set(q)] == [()]


def test_nz_set_shifted_straddles_two_cells():
    # shifting the query by 1/2 leaves mass 1/2 in two cells; delta=1/4 sees both
    window = [LatticeVector.of({}), LatticeVector.unit(0, -1), LatticeVector.unit(0, 1)]
    q = NZQuery(
        set=BoxUnion.of(unit_cell()),
        shift=SparseVector.of({0: Fraction(1, 2)}),
        delta=Fraction(1, 4),
        window=window,
    )
    members = nz_set(q)
    assert sorted(dict(z.entries).get(0, 0) for z in members) == [-1, 0]


def test_nz_set_empty_above_all_mass():
    window = [LatticeVector.of({})]
    q = NZQuery(
        set=BoxUnion.of(Box.make({0: (0, Fraction(1, 2))})),
        delta=Fraction(3, 4),
        window=window,
    )
    assert nz_set(q) == []


def test_nz_delta_validation():
    with pytest.raises(ValueError):
        NZQuery(set=BoxUnion.of(unit_cell()), delta=Fraction(0))
    with pytest.raises(ValueError):
        NZQuery(set=BoxUnion.of(unit_cell()), delta=Fraction(1))


@given(
    st.fractions(min_value="1/10", max_value="9/10", max_denominator=10),
    st.fractions(min_value="1/10", max_value="9/10", max_denominator=10),
    st.fractions(min_value=0, max_value=1, max_denominator=8),
)
@settings(max_examples=50, deadline=None)
def test_nz_antitone_in_delta(d1, d2, shift):
    if d1 > d2:
        d1, d2 = d2, d1
    window = [LatticeVector.of({}), LatticeVector.unit(0, -1), LatticeVector.unit(0, 1)]
    u = BoxUnion.of(unit_cell())
    small = nz_set(
        NZQuery(set=u, shift=SparseVector.of({0: shift}), delta=d2, window=window)
    )
    large = nz_set(
        NZQuery(set=u, shift=SparseVector.of({0: shift}), delta=d1, window=window)
    )
    assert set(z.entries for z in small) <= set(z.entries for z in large)


def test_sigma_cover_unit_cell():
    cover = sigma_cover(BoxUnion.of(unit_cell()))
    assert isinstance(cover, list) and len(cover) == 1
    assert cover[0] == Cell()


def test_sigma_cover_long_tail_not_sigma_finite():
    verdict = sigma_cover(BoxUnion.of(Box.make({}, tail=(0, 2))))
    assert isinstance(verdict, NotSigmaFinite)


def test_sigma_cover_skips_null_boxes():
    degenerate = Box.make({0: (Fraction(1, 2), Fraction(1, 2))})
    cover = sigma_cover(BoxUnion.of(degenerate))
    assert cover == []


def test_sigma_cover_spans_windows():
    cover = sigma_cover(BoxUnion.of(Box.make({0: (0, 3)})))
    assert [c.base.get(0) for c in cover] == [0, 1, 2]
