#!/usr/bin/env python3
"""Regenerate tests/data/specfn_oracle.csv from an arbitrary-precision oracle.

Writes 25-significant-digit reference values of ln(Gamma(x)) and psi(x)
on the 1000-point log-spaced accuracy grid. Test code compares against
these strings with decimal arithmetic, so the oracle precision survives
the trip through the CSV.
"""

import csv
import pathlib

import mpmath as mp
import numpy as np

mp.mp.dps = 40

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data" / "specfn_oracle.csv"


def main():
    xs = np.logspace(-4, 6, 1000)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "ln_gamma", "digamma"])
        for x in xs:
            mx = mp.mpf(float(x))
            w.writerow([
                repr(float(x)),
                mp.nstr(mp.loggamma(mx), 25, strip_zeros=False),
                mp.nstr(mp.digamma(mx), 25, strip_zeros=False),
            ])
    print(f"wrote {OUT} ({len(xs)} rows)")


if __name__ == "__main__":
    main()
