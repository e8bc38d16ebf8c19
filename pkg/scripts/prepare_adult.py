"""Build the normalized income CSV consumed by `dpboot run --config logreg_*`.

Downloads the ACS income data via the optional `folktables` package (not a
dpboot dependency), keeps age, schooling, weekly hours and sex, labels rows
by income above the threshold, normalizes every feature into [0, 1], and
writes a CSV with header age,school,hours,sex,label.

    python scripts/prepare_adult.py --out data/adult.csv [--states CA NY ...]
"""

import argparse
import csv
import sys


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--states", nargs="*", default=None, help="default: all states")
    parser.add_argument("--year", default="2018")
    parser.add_argument("--threshold", type=float, default=30_000.0)
    args = parser.parse_args()

    try:
        import numpy as np
        from folktables import ACSDataSource, ACSIncome
    except ImportError:
        print(
            "folktables is required for this optional script: pip install folktables",
            file=sys.stderr,
        )
        return 1

    source = ACSDataSource(survey_year=args.year, horizon="1-Year", survey="person")
    data = source.get_data(states=args.states, download=True)
    ACSIncome._target_transform = lambda x: x > args.threshold  # income label cutoff
    features, labels, _ = ACSIncome.df_to_numpy(data)
    names = ACSIncome.features
    cols = [names.index("AGEP"), names.index("SCHL"), names.index("WKHP"), names.index("SEX")]
    X = features[:, cols].astype(float)
    X -= X.min(axis=0)
    span = X.max(axis=0)
    span[span == 0] = 1.0
    X /= span

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["age", "school", "hours", "sex", "label"])
        for row, y in zip(X, labels):
            writer.writerow([f"{v:.6f}" for v in row] + [int(y)])
    print(f"wrote {len(labels)} rows to {args.out} ({np.mean(labels):.3f} positive)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
