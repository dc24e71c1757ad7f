"""Recompute the derived columns of the three bundled tables and print the deltas."""

import argparse

from twinphoton.tables import TABLE_IDS, reproduce_table, table_caption


def fmt(x, digits=2):
    return "-" if x is None else f"{x:.{digits}f}"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tables", type=int, nargs="+", default=list(TABLE_IDS))
    args = ap.parse_args()
    for tid in args.tables:
        print(f"\n== {table_caption(tid)[0]}")
        print(f"{'row':>3} {'label':<14} {'Tcc':>7} {'print':>7} {'dTcc':>5} "
              f"{'Tsc':>7} {'print':>7} {'dTsc':>5} {'G_N':>6} {'print':>6}")
        for r in reproduce_table(tid):
            p = r["printed"]
            print(f"{r['row']:>3} {r['label']:<14} {fmt(r['Tcc']):>7} {fmt(p['Tcc']):>7} "
                  f"{fmt(r['dTcc']):>5} {fmt(r['Tsc']):>7} {fmt(p['Tsc']):>7} {fmt(r['dTsc']):>5} "
                  f"{fmt(r['G_N']):>6} {fmt(p['G_N']):>6}")


if __name__ == "__main__":
    main()
