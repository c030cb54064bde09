"""Confirmation depth 1, 2, 4, 8: end-to-end latency and replay probes."""
import sys

from veilaudit.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["depth-sweep", "--depths", "1,2,4,8", "--out", "out/depth", "--assert", *sys.argv[1:]]))
