#!/usr/bin/env python3
"""Export a gallery of the area-stationary constructions.

Writes OBJ meshes and oracle-grade CSVs for:
  * the isolated-singular-point surface swept by characteristic rays,
  * ruled surfaces over the built-in singular-curve kinds,
  * residual fields of the catalog surfaces on a window grid.

Usage: python scripts/build_gallery.py [OUTDIR]
"""

import sys
from pathlib import Path

from solgeo.cli import main as cli


def run(argv):
    code = cli(argv)
    if code != 0:
        raise SystemExit(f"command failed ({code}): {' '.join(argv)}")


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("gallery")
    for name in ("plane-x", "plane-ab", "saddle-point", "saddle-curve"):
        run(["residual", "--surface", name,
             "--window", "-2", "2", "-2", "2", "-2", "2",
             "--grid", "40", "--out", str(out / f"residual-{name}")])
    run(["sweep", "--gamma", "x-line", "--x0", "0", "0", "0",
         "--eps", "-2", "2", "--t", "-3", "3", "--grid", "64", "64",
         "--scan-singular", "--out", str(out / "sweep-vertical-axis")])
    run(["sweep", "--gamma", "y-line", "--x0", "0", "0", "0",
         "--eps", "-2", "2", "--t", "-3", "3", "--grid", "64", "64",
         "--scan-singular", "--out", str(out / "sweep-horizontal-line")])
    run(["sweep", "--gamma", "exp", "--x0", "0.2", "-0.1", "0.3",
         "--theta", "0.7", "--eps", "-1.5", "1.5", "--t", "-3", "3",
         "--grid", "64", "64", "--scan-singular",
         "--out", str(out / "sweep-nongeodesic")])
    run(["curve", "--p0", "0", "0", "0", "--alpha", "0.785398",
         "--t", "-3", "3", "--n", "200", "--oracle",
         "--out", str(out / "curve-diagonal")])
    print(f"gallery written under {out}/")


if __name__ == "__main__":
    main()
