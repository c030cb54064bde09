"""Full latency grid: QPS {5,10,20,40} x senders {10,100}, emit and store."""
import sys

from veilaudit.cli import main

if __name__ == "__main__":
    raise SystemExit(main(["latency-bench", "--mode", "both", "--qps", "5,10,20,40", "--senders", "10,100",
                           "--out", "out/latency", "--assert", *sys.argv[1:]]))
