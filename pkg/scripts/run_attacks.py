"""Adversary battery at default sizes, then an escalation-and-reveal demo."""
import sys

from veilaudit.cli import main

if __name__ == "__main__":
    rc = main(["attack-suite", "--out", "out/attacks", "--assert", *sys.argv[1:]])
    rc |= main(["irp-demo", "--t", "3", "--n", "5", "--out", "out/irp", "--assert"])
    raise SystemExit(rc)
