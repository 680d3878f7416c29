"""Export a reach run as plot-ready CSVs: the projected ellipsoid outline and the Monte Carlo cloud.

Run ``wassdetect calibrate`` and ``wassdetect reachset`` into RUN first, then

    python3 scripts/reach_plot_data.py RUN
"""
import argparse
from pathlib import Path

import numpy as np

from wassdetect.empirical import write_samples_csv
from wassdetect.reach import Ellipsoid


def outline(E: Ellipsoid, points: int = 400) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * np.pi, points)
    circle = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    L = np.linalg.cholesky(E.Q / E.level)
    return np.linalg.solve(L.T, circle.T).T


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("run", type=Path)
    args = ap.parse_args()
    E = Ellipsoid.from_json((args.run / "reach_x.json").read_text())
    if E.dim != 2:
        raise SystemExit("outline export needs a two-dimensional state")
    write_samples_csv(args.run / "reach_x_outline.csv", outline(E))
    print(f"wrote {args.run / 'reach_x_outline.csv'}; cloud is {args.run / 'cloud.csv'}")


if __name__ == "__main__":
    main()
