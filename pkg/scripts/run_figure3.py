#!/usr/bin/env python3
"""Run the deflection-staircase experiment and print the summary.

Writes the momentum-versus-time table next to the provenance record via the
standard runner; pass --uncompensated to watch the ladder die without the
stepwise frequency adjustment (slow-pulse working point, same adiabaticity).
"""

import argparse
import pathlib
import sys

from recoilsim.cli import main as cli_main

HERE = pathlib.Path(__file__).parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/figure3")
    parser.add_argument("--uncompensated", action="store_true")
    args = parser.parse_args()

    config = HERE / "configs" / (
        "figure3_uncompensated.json" if args.uncompensated else "figure3.json")
    return cli_main(["run", str(config), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
