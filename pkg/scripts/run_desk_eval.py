#!/usr/bin/env python3
"""Run both desk-scale evaluations on the bundled toy datasets."""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"

from stepcoach.cli import main as cli_main  # noqa: E402


def main() -> int:
    print("== per-frame monitoring accuracy (bundled 12-frame toy set) ==")
    code = cli_main(
        [
            "eval-monitor",
            "--labels", str(DATA / "eval" / "frame_labels.csv"),
            "--verdicts", str(DATA / "eval" / "toy_verdicts.json"),
        ]
    )
    if code != 0:
        return code
    print("\n== atomic-fact description scoring (bundled cases) ==")
    return cli_main(["eval-desc", "--data", str(DATA / "eval" / "desc_cases.jsonl")])


if __name__ == "__main__":
    sys.exit(main())
