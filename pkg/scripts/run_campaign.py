#!/usr/bin/env python3
"""Run the default verification campaign and write report.json next to it.

    python3 scripts/run_campaign.py [--jobs 4] [--out report.json]
"""
import argparse
import sys
from pathlib import Path

from kontsevich_bkp.cli import main

HERE = Path(__file__).resolve().parent

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default=str(HERE / "report.json"))
    ap.add_argument("--config", default=str(HERE / "default_campaign.json"))
    a = ap.parse_args()
    sys.exit(main(["verify", a.config, "--jobs", str(a.jobs), "--out", a.out]))
