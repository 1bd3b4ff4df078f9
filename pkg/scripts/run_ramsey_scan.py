#!/usr/bin/env python3
"""Close the interferometer and scan the final pulse's two-photon detuning.

The fringe period comes out at 1/tau (9.8 Hz for the default 102 ms
separation) with the dark output port sitting exactly at zero detuning.
"""

import argparse
import pathlib
import sys

from recoilsim.cli import main as cli_main

HERE = pathlib.Path(__file__).parent


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/ramsey")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    return cli_main(["run", str(HERE / "configs" / "ramsey.json"),
                     "--out", args.out, "--threads", str(args.threads)])


if __name__ == "__main__":
    sys.exit(main())
