"""Fit the analytic partition averages and print the exponents.

    python scripts/theory_fits.py --nmin 12 --nmax 120
"""
import argparse

from fermigraph.theory import scaling_fit, theory_table


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--nmin", type=int, default=12)
    p.add_argument("--nmax", type=int, default=120)
    a = p.parse_args()
    rows = theory_table(a.nmax, a.nmin)
    ns = [r.n for r in rows]
    for name in ("d_free", "log4_d_int_upper", "loop_avg"):
        fit = scaling_fit(ns, [getattr(r, name) for r in rows])
        print(f"{name:18s} exponent {fit.exponent:.4f} +- {fit.stderr:.4f}")


if __name__ == "__main__":
    main()
