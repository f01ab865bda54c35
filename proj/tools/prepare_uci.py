#!/usr/bin/env python3
"""Convert the raw UCI SPECT Heart and WPBC files into headed CSV files.

    prepare_uci.py spect SPECT.train SPECT.test -o data/spect.csv
    prepare_uci.py wpbc wpbc.data -o data/wpbc.csv

SPECT rows are "diagnosis,F1,...,F22"; the output label column is "class"
with "1" as the positive value. WPBC rows are "id,outcome,time,<30 features>,
tumor size,lymph node status" with "?" for missing values; the label column
is "outcome" (N or R) and "id" should be dropped when loading.
"""

import argparse
import csv
import sys

WPBC_FEATURES = [
    "radius", "texture", "perimeter", "area", "smoothness",
    "compactness", "concavity", "concave_points", "symmetry", "fractal_dimension",
]


def read_rows(paths):
    rows = []
    for path in paths:
        with open(path, newline="") as f:
            for row in csv.reader(f):
                row = [cell.strip() for cell in row]
                if row and any(row):
                    rows.append(row)
    return rows


def spect(paths):
    header = ["class"] + [f"F{i}" for i in range(1, 23)]
    rows = read_rows(paths)
    for n, row in enumerate(rows, 1):
        if len(row) != len(header):
            raise ValueError(f"SPECT row {n} has {len(row)} fields, expected {len(header)}")
    return header, rows


def wpbc(paths):
    header = ["id", "outcome", "time"]
    for stat in ("mean", "se", "worst"):
        header += [f"{name}_{stat}" for name in WPBC_FEATURES]
    header += ["tumor_size", "lymph_status"]
    rows = read_rows(paths)
    for n, row in enumerate(rows, 1):
        if len(row) != len(header):
            raise ValueError(f"WPBC row {n} has {len(row)} fields, expected {len(header)}")
        if row[1] not in ("N", "R"):
            raise ValueError(f"WPBC row {n} has outcome {row[1]!r}, expected N or R")
    return header, rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("dataset", choices=["spect", "wpbc"])
    parser.add_argument("inputs", nargs="+", help="raw UCI file(s)")
    parser.add_argument("-o", "--out", required=True, help="CSV file to write")
    args = parser.parse_args(argv)

    try:
        header, rows = (spect if args.dataset == "spect" else wpbc)(args.inputs)
    except (OSError, ValueError) as e:
        print(f"prepare_uci: {e}", file=sys.stderr)
        return 1
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
