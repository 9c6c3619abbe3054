#!/usr/bin/env python3
"""Runs each bhc command on a small problem and validates report.json against the schema."""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema

RUNS = {
    "solve": ["solve", "--grid", "8", "--box", "8", "--max-iter", "3"],
    "sweep_c": ["sweep-c", "--grid", "8", "--box", "8", "--c-list", "0.9,1.1", "--max-iter", "3"],
    "sweep_beta": ["sweep-beta", "--grid", "8", "--box", "8", "--beta-list", "0,0.5", "--max-iter", "3"],
    "fiber": ["fiber", "--grid", "8", "--box", "8", "--s-range", "-1,1,5"],
    "fiber_exp": ["fiber", "--grid", "8", "--box", "8", "--c", "0.2", "--s-range", "-1,0,3", "--nl", "expcrit:p=4"],
    "adams": ["adams", "--n-list", "10,100"],
    "adams_exp": ["adams", "--n-list", "10", "--nl", "expcrit:p=4"],
    "verify": ["verify", "--fields", "4"],
    "riesz_selftest": ["riesz-selftest"],
    "refine": ["refine", "--grid-list", "8,12", "--box", "8", "--max-iter", "3"],
}


def main() -> int:
    cli, schema_path, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    shutil.rmtree(work, ignore_errors=True)
    failures = 0
    for name, args in RUNS.items():
        out = work / name
        proc = subprocess.run([cli, *args, "--out", str(out)], capture_output=True, text=True, timeout=600)
        if proc.returncode not in (0, 1):
            print(f"{name}: exit {proc.returncode}\n{proc.stderr}")
            failures += 1
            continue
        report = json.loads((out / "report.json").read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors:
            print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        print(f"{name}: exit {proc.returncode}, {'valid' if not errors else 'INVALID'}")
    # The schema must reject drift: an unknown key and a wrong type.
    sample = json.loads((work / "fiber" / "report.json").read_text())
    sample["results"]["fiber"]["extra"] = 1
    bad_type = json.loads((work / "solve" / "report.json").read_text())
    bad_type["results"]["ground_state"]["converged"] = "no"
    for name, report in (("unknown key", sample), ("wrong type", bad_type)):
        if validator.is_valid(report):
            print(f"schema accepted a report with a {name}")
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
