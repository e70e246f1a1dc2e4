"""Stock functions and sets used by the CLI and the test suite."""

from __future__ import annotations

from fractions import Fraction

from .boxes import Box, BoxUnion, unit_cell
from .exprs import Expr, Indicator, Scale, Series, Sum
from .intervals import Interval, IntervalUnion

#: [0,1/3] u [2/3,1] - the per-coordinate support of the spike series
THIRDS_UNION = IntervalUnion.of(
    Interval.closed(0, Fraction(1, 3)), Interval.closed(Fraction(2, 3), 1)
)

LOW_THIRD = IntervalUnion.of(Interval.closed(0, Fraction(1, 3)))
HIGH_THIRD = IntervalUnion.of(Interval.closed(Fraction(2, 3), 1))


def spike_support_box() -> Box:
    """The product set (([0,1/3] u [2/3,1]))^inf."""
    return Box.make({}, tail=THIRDS_UNION)


def _spike_term(n: int) -> Expr:
    # value (3^{n+1} - 3^n) / 2^n on the box where x_n sits in the high third,
    # earlier coordinates in either third, later coordinates in the low third
    coef = Fraction(3**(n + 1) - 3**n, 2**n)
    explicit = {i: THIRDS_UNION for i in range(n)}
    explicit[n] = HIGH_THIRD
    return Scale(coef, Indicator(Box.make(explicit, tail=LOW_THIRD)))


def spike_series() -> Expr:
    """Integrable but unbounded spike function on the unit cell.

    Its support is the measure-zero product set ``spike_support_box()``, so
    the true integral is 0, yet every untruncated finite-dimensional slice
    integrates to exactly 1.  Term n takes the value 2*(3/2)^n, so no uniform
    tail bound exists; terms beyond a point's support vanish identically,
    which ``sparse_cutoff`` encodes.
    """
    head = Scale(
        Fraction(3, 2), Indicator(Box.make({0: THIRDS_UNION}, tail=LOW_THIRD))
    )
    tail_terms = Series(
        term=_spike_term,
        start=1,
        sparse_cutoff=lambda k: max(k, 0),
        support_hint=BoxUnion.of(spike_support_box()),
    )
    return Sum((head, tail_terms))


def spike_support_indicator() -> Expr:
    return Indicator(BoxUnion.of(spike_support_box()))


BUILTIN_FUNCTIONS = {
    "spike-series": spike_series,
    "spike-support-indicator": spike_support_indicator,
    "unit-cell-indicator": lambda: Indicator(BoxUnion.of(unit_cell())),
}
