#!/usr/bin/env python3
"""Print the modulus of convexity table, the two fixed-point thresholds, and
the a priori iteration counts for a range of k."""
import numpy as np

from holder_retract.analysis import (
    goebel_kirk_threshold,
    hilbert_modulus,
    holder_constant,
    holder_exponent,
    lifschitz_threshold,
    min_iterations,
)


def main() -> int:
    print("eps    delta(eps)")
    for eps in np.linspace(0, 2, 9):
        print(f"{eps:4.2f}   {hilbert_modulus(eps):.12f}")
    print(f"\nGoebel-Kirk threshold  {goebel_kirk_threshold():.12f}")
    print(f"Lifschitz threshold    {lifschitz_threshold():.12f}")
    print("\nk       alpha     c(diam=2)    n(tol=1e-6, diam=2)")
    for k in (1.05, 1.1, 1.2, 1.3, 1.344, 1.4, 1.41):
        print(f"{k:5.3f}   {holder_exponent(k):.5f}   {holder_constant(k, 2.0):10.3f}   {min_iterations(1e-6, k, 2.0)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
