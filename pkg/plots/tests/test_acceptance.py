"""Acceptance criterion for the plotting package, printed as one PASS/FAIL line.

From the checked-in sample CSV bundle: render all three figure kinds without
error, byte-stable across two consecutive runs, and fail with a named-column
schema error on a corrupted CSV.
"""

from __future__ import annotations

import hashlib
import os
import time

from benchplot.cli import main

SAMPLES = os.path.join(os.path.dirname(__file__), "..", "sample_data")


def sha(path) -> str:
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


def test_criterion_11_figures_from_sample_bundle(tmp_path, capsys):
    t0 = time.time()
    jobs = [
        ("curves", os.path.join(SAMPLES, "summary.csv")),
        ("hist", os.path.join(SAMPLES, "histogram.csv")),
        ("accept", os.path.join(SAMPLES, "acceptance.csv")),
    ]
    stable = True
    for command, csv_path in jobs:
        first = tmp_path / f"{command}_1.svg"
        second = tmp_path / f"{command}_2.svg"
        assert main([command, "--in", csv_path, "--out", str(first)]) == 0
        assert main([command, "--in", csv_path, "--out", str(second)]) == 0
        stable = stable and sha(first) == sha(second)

    # corrupted bundle: drop a required column from the curves CSV
    lines = open(os.path.join(SAMPLES, "summary.csv")).read().splitlines()
    header = lines[0].split(",")
    drop = header.index("pct_std")
    corrupted = tmp_path / "corrupted.csv"
    corrupted.write_text(
        "\n".join(
            ",".join(f for k, f in enumerate(line.split(",")) if k != drop)
            for line in lines
        )
        + "\n"
    )
    capsys.readouterr()
    code = main(["curves", "--in", str(corrupted), "--out", str(tmp_path / "x.svg")])
    err = capsys.readouterr().err
    named = "pct_std" in err
    passed = stable and code != 0 and named
    status = "PASS" if passed else "FAIL"
    print(
        f"\nACCEPTANCE 11 [{status}] three figure kinds rendered byte-stable={stable};"
        f" corrupted CSV exit={code} names missing column={named}"
        f" ({time.time() - t0:.1f}s)"
    )
    assert passed
