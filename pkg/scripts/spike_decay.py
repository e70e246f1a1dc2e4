#!/usr/bin/env python3
"""Print the (n, M) slice-integral table for the unbounded spike function.

The table makes the double-limit mechanics visible: every untruncated slice
integrates to exactly 1, while at a finite magnitude bound M the slice value
sits on a plateau of 1 until n passes the largest surviving term, then
collapses geometrically toward 0 - the true integral.

Usage: python3 scripts/spike_decay.py [--n-max N] [--powers K1,K2,...]
"""

import argparse
from fractions import Fraction

from linfmeasure.exprs import ZERO_ANCHOR
from linfmeasure.intervals import INF
from linfmeasure.library import spike_series
from linfmeasure.limits import slice_scan


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-max", type=int, default=30)
    parser.add_argument(
        "--powers", default="2,6,10,20",
        help="comma list of k: truncation bounds M = 2^k (plus untruncated)",
    )
    args = parser.parse_args()

    bounds = [Fraction(2) ** int(k) for k in args.powers.split(",")] + [INF]
    rows = slice_scan(
        spike_series(), ZERO_ANCHOR, range(0, args.n_max + 1), tuple(bounds)
    )
    table = {}
    for r in rows:
        table.setdefault(r.n, {})[r.truncation] = r.value

    headers = [f"M=2^{k}" for k in args.powers.split(",")] + ["M=inf"]
    print(f"{'n':>4}  " + "  ".join(f"{h:>12}" for h in headers))
    for n in sorted(table):
        cells = []
        for b in bounds:
            v = table[n][b]
            cells.append(f"{float(v):>12.3e}" if v != 1 else f"{'1':>12}")
        print(f"{n:>4}  " + "  ".join(cells))
    print()
    print("Each column eventually decays to 0; the rightmost (untruncated)")
    print("column stays at 1 forever, which is why the M limit is essential.")


if __name__ == "__main__":
    main()
