"""Fit the double-exponential model to the DNA table and tabulate the inverse."""

import argparse

import numpy as np

from twinphoton.fitmodel import concentration_uncertainty, eval_model, fit, fit_single_exponential
from twinphoton.tables import load_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dt", type=float, default=0.01, help="transmittance resolution, percent")
    args = ap.parse_args()

    rows = [r for r in load_table(1) if r.concentration is not None and r.label.startswith("H")]
    pts = [(r.concentration, r.Tcc, r.dTcc) for r in rows]
    res = fit(pts)
    _, _, rss1 = fit_single_exponential(pts)
    m = res.model
    print(f"T0={m.T0:.4g}  C0={m.C0:.4g}  Tinf={m.Tinf:.4g}  Cinf={m.Cinf:.4g}")
    print(f"rss={res.rss:.4g} (single exponential {rss1:.4g}), converged={res.converged}")
    print(f"\n{'C ng/ul':>9} {'T fit %':>8} {'dC ng/ul':>10}")
    for c in np.logspace(-2, 2, 9):
        t = eval_model(m, c)
        print(f"{c:9.3g} {t:8.3f} {concentration_uncertainty(m, t, args.dt):10.3g}")


if __name__ == "__main__":
    main()
