#!/usr/bin/env python3
"""Run the one- and two-dimensional interferometer plans back to back.

Prints per-stage separations and the extracted fringe spacings; the CSV/PGM
artifacts land under --out.  The 1D plan takes about a minute (honest
lattice propagation through 150 adiabatic pulse pairs); the 2D plan a few
seconds.
"""

import argparse
import pathlib
import sys

from recoilsim.cli import main as cli_main

HERE = pathlib.Path(__file__).parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/interferometers")
    parser.add_argument("--skip-1d", action="store_true")
    args = parser.parse_args()

    status = 0
    if not args.skip_1d:
        status = cli_main(["run", str(HERE / "configs" / "split1d.json"),
                           "--out", args.out])
        if status:
            return status
    return cli_main(["run", str(HERE / "configs" / "split2d.json"),
                     "--out", args.out]) or status


if __name__ == "__main__":
    sys.exit(main())
