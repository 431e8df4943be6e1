"""One-dimensional survival: simulation, exact solver and the 1/sqrt(t) law.

Run with ``python3 demos/d1_survival.py``.  Takes about half a minute.
"""
import math

from dormantwalk import ModelParams, estimate_survival, responsive_asymptotic, survival


def main():
    p = ModelParams(d=1, kappa=1.0, rho=1.0, gamma=1.0, s0=1.0, s1=1.0)
    print(f"parameters: {p.to_dict()}\n")

    # Monte Carlo against the exact solver at moderate times
    times = [10.0, 20.0, 50.0]
    mc = estimate_survival(p, times, 200_000, seed=1)
    ex = survival(p, 300, times)
    print("   t    Monte Carlo          exact (bracket)")
    for e, lo, up in zip(mc, ex.lower, ex.upper):
        print(f"{e.time:5.0f}   {e.mean:.5f} +- {e.stderr:.5f}   [{lo:.8f}, {up:.8f}]")

    # the leading order sqrt(pi t) U(t) -> prefactor, approached from below
    rep = responsive_asymptotic(p)
    print(f"\nprefactor ({rep.reading}): {rep.leading_value:.6f}")
    print("     t    sqrt(pi t) U(t) / prefactor")
    for t in (1e2, 1e3, 1e4):
        radius = max(300, int(8 * math.sqrt(2 * p.nu * t)) + 10)
        u = float(survival(p, radius, [t]).upper[0])
        print(f"{t:8.0f}    {math.sqrt(math.pi * t) * u / rep.leading_value:.4f}")


if __name__ == "__main__":
    main()
