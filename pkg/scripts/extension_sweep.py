#!/usr/bin/env python3
"""Sweep the minimum-norm extension ratio as the base disc shrinks.

For the Gaussian weight |z|^2 + |w|^2 and the fiber datum f(z) = z, the
minimizer over the radius-r base disc is F(z, w) = z, so the ratio
jointNorm / (pi r^2 fiberNorm) equals (1 - e^{-r^2}) / r^2 exactly.  The
sweep prints the measured ratio, the closed form, and their difference.
"""

import argparse
import math
import sys

from xibergman.extension import ExtensionProblem, minimal_extension, optimal_constant_check
from xibergman.family import PolyW
from xibergman.weights import JointQuadraticSplit, Polydisc


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", type=float, nargs="+",
                    default=[1.0, 0.8, 0.6, 0.4, 0.2, 0.1])
    ap.add_argument("--degree", type=int, default=10)
    args = ap.parse_args()

    print(f"{'r':>6} {'ratio':>18} {'closed form':>18} {'difference':>12}")
    worst = 0.0
    for r in args.radii:
        prob = ExtensionProblem(
            Polydisc((1.0,)), r, JointQuadraticSplit((1.0,), (1.0,)), 0.0,
            PolyW(1, {(1,): 1.0}), args.degree, args.degree,
        )
        ratio = optimal_constant_check(prob, minimal_extension(prob))
        expect = (1.0 - math.exp(-r * r)) / (r * r)
        diff = abs(ratio - expect)
        worst = max(worst, diff)
        print(f"{r:>6.2f} {ratio:>18.12f} {expect:>18.12f} {diff:>12.2e}")
    print(f"max deviation from closed form: {worst:.3e}")
    return 0 if worst < 1e-8 else 1


if __name__ == "__main__":
    sys.exit(main())
