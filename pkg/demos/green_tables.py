"""Lattice Green objects behind the constants: a short tour.

Prints the planar resolvent and its logarithmic growth, the potential
kernel near the origin and the transient Green function in d = 3, 4.
"""
import math

from dormantwalk import green


def main():
    print("planar resolvent at the origin, pi R(0, lam) - log(1/lam) -> log 8:")
    for lam in (1e-2, 1e-4, 1e-6, 1e-8):
        r = green.green_resolvent(2, (0, 0), lam)
        print(f"  lam = {lam:.0e}: R = {r.value:.10f}   offset {math.pi * r.value - math.log(1 / lam):.6f}")
    print(f"  log 8 = {math.log(8):.6f}\n")

    print("potential kernel a(x):")
    for x in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (5, 5), (10, 0)]:
        print(f"  a{x} = {green.potential_kernel(x).value:.10f}")

    print("\ntransient Green function at the origin:")
    for d in (3, 4):
        o = (0,) * d
        print(f"  d = {d}: discrete {green.green_d3(o):.8f}, "
              f"occupation {green.green_d3(o, 'occupation'):.8f}")


if __name__ == "__main__":
    main()
