"""How much the unchosen halves of a VBCT2 batch reveal about Bob's choice.

Prints the exact trace distance between the two mixtures of leftover halves
and the Helstrom success for the whole state, for growing batch size N.
"""
import sys

from vbct.analysis import exact_distinguishability_curve


def main(a0: float = 0.9, a1: float = 0.1, n_max: int = 40) -> None:
    points, limit = exact_distinguishability_curve(range(2, n_max + 1), a0, a1)
    print(f"alpha0^2={a0}, alpha1^2={a1}; large-N Helstrom limit {limit:.6f}")
    print(f"{'N':>4} {'D(sigma0,sigma1)':>17} {'D(full)':>9} {'Helstrom':>9}")
    for pt in points:
        print(f"{pt.N:4d} {pt.sigma_distance:17.3e} {pt.full_distance:9.6f} {pt.helstrom:9.6f}")


if __name__ == "__main__":
    args = [float(x) for x in sys.argv[1:3]]
    main(*args)
