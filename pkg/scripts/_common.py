"""Tiny helpers shared by the experiment scripts."""

import argparse
import csv
import sys


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    p.add_argument("--seed", type=int, default=0)
    return p


def write_rows(rows, out):
    rows = list(rows)
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
