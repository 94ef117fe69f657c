"""Run the CLI on a few configurations and validate its JSON against the schema
and its CSV against the header contract.

usage: validate_report.py <nullcong binary> <schema.json>
"""

import csv
import io
import json
import subprocess
import sys

import jsonschema

RUNS = [
    (["lambda0", "--samples", "3"], 0),
    (["einstein", "--samples", "2", "--c", "0.3"], 0),
    (["taubnut", "--base", "fs-lift", "--samples", "4"], 0),
    (["cr-base", "--samples", "2", "--tol", "1e-30"], 1),
    (["all", "--samples", "1"], 0),
]
CSV_HEADER = ["check", "samples", "max_abs", "max_rel", "tol", "pass"]


def run(cli, args):
    proc = subprocess.run([cli, *args], capture_output=True, text=True, check=False)
    return proc.returncode, proc.stdout


def main():
    cli, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for args, expected in RUNS:
        code, out = run(cli, args)
        report = json.loads(out)
        errors = sorted(validator.iter_errors(report), key=str)
        if code != expected or errors:
            failures += 1
            print(f"FAIL {' '.join(args)}: exit {code} (expected {expected}); {len(errors)} schema errors")
            for e in errors[:5]:
                print("   ", e.message)
        code, out = run(cli, [*args, "--format", "csv"])
        rows = list(csv.reader(io.StringIO(out)))
        if rows[0] != CSV_HEADER or len(rows) != len(report["checks"]) + 1:
            failures += 1
            print(f"FAIL {' '.join(args)} --format csv: unexpected layout")
        for row, check in zip(rows[1:], report["checks"]):
            if row[0] != check["name"] or int(row[1]) != check["samples"] or (row[5] == "true") != check["pass"]:
                failures += 1
                print(f"FAIL {' '.join(args)} --format csv: row {row} does not match {check['name']}")
    print("schema validation:", "failed" if failures else "ok")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
