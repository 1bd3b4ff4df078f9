#!/usr/bin/env python3
"""Generate the gear-silhouette test image and run the pattern pipeline.

The recovered image must match the input bit for bit: the pipeline is the
identity cos(arccos(f)) plus gray-level bookkeeping.
"""

import argparse
import json
import pathlib
import sys

from recoilsim.cli import main as cli_main
from recoilsim.patterngen import gear_silhouette, to_image
from recoilsim.pgmio import write_pgm


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/pattern")
    parser.add_argument("--size", type=int, default=64)
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    gear_path = out_dir / "gear.pgm"
    write_pgm(gear_path, to_image(gear_silhouette(args.size)))

    config = {"plan": "pattern",
              "params": {"input_pgm": str(gear_path),
                         "magnification": 100.0, "pitch_m": 1e-6}}
    config_path = out_dir / "pattern.json"
    config_path.write_text(json.dumps(config, indent=2))
    return cli_main(["run", str(config_path), "--out", str(out_dir)])


if __name__ == "__main__":
    sys.exit(main())
