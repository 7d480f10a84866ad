"""Interaction sums against closed forms on the line.

The interaction of an interval with its complement has an elementary
antiderivative, and unions of intervals reduce to pairwise correction
terms.  This script measures both and prints the relative errors, then
shows the exact dilation scaling law on a rough grid.
"""

import math

from fracperim import GridSet, GridSpec
from fracperim.kernels import KernelParams, build_table
from fracperim.perimeter import fractional_perimeter

import numpy as np


def aligned(h: float, pieces) -> GridSet:
    lo = min(a for a, _ in pieces) - 16 * h
    n = int(round((max(b for _, b in pieces) - lo) / h)) + 32
    spec = GridSpec(1, (n,), h, (lo,))
    centers = spec.axis_centers(0)
    occ = np.zeros(n, dtype=bool)
    for a, b in pieces:
        occ |= (centers > a) & (centers < b)
    return GridSet(spec, occ)


def main() -> None:
    h = 2.0**-9
    print("interval (0,1): 2 / (s (1-s)) ")
    for s in (0.25, 0.5, 0.75):
        table = build_table(KernelParams(1, s), h=h)
        got = fractional_perimeter(aligned(h, ((0.0, 1.0),)), table)
        want = 2.0 / (s * (1.0 - s))
        print(f"  s={s}: got {got:.10f}  want {want:.10f}  "
              f"rel {abs(got - want) / want:.2e}")

    s = 0.5
    table = build_table(KernelParams(1, s), h=h)
    got = fractional_perimeter(aligned(h, ((0.0, 1.0), (2.0, 3.0))), table)
    want = 24.0 + 8.0 * math.sqrt(3.0) - 16.0 * math.sqrt(2.0)
    print(f"union (0,1) u (2,3) at s=1/2: got {got:.10f}  want {want:.10f}  "
          f"rel {abs(got - want) / want:.2e}")

    # dilation scaling: doubling h and the set multiplies the sum by
    # 2^(1-s), exactly, because h only enters through one prefactor
    coarse = aligned(1 / 8, ((0.0, 1.0),))
    table8 = build_table(KernelParams(1, s), h=1 / 8)
    p1 = fractional_perimeter(coarse, table8)
    doubled = GridSet(GridSpec(1, coarse.spec.cells, 1 / 4, coarse.spec.origin),
                      coarse.occupancy)
    p2 = fractional_perimeter(doubled, table8.with_h(1 / 4))
    print(f"scaling: P(2E)/P(E) = {p2 / p1:.17f}  want 2^(1-s) = {2**0.5:.17f}")


if __name__ == "__main__":
    main()
