"""Visibility sweep over both regimes, writing out/aol-<regime>/.

Extra arguments are passed through, e.g. ``--repeats 3 --timing off``.
"""
import sys

from veilaudit.cli import main

if __name__ == "__main__":
    rc = 0
    for regime in ("low", "high"):
        rc |= main(["aol-sweep", "--regime", regime, "--out", f"out/aol-{regime}", "--assert", *sys.argv[1:]])
    raise SystemExit(rc)
