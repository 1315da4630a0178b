#!/usr/bin/env python3
"""Validate wdiv JSON reports against schema/report.schema.json."""
import argparse
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("reports", nargs="+", type=pathlib.Path)
    parser.add_argument("--schema", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent / "schema" / "report.schema.json")
    args = parser.parse_args()

    schema = json.loads(args.schema.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = 0
    for path in args.reports:
        errors = sorted(validator.iter_errors(json.loads(path.read_text())), key=lambda e: list(e.path))
        for err in errors:
            print(f"{path}: {'/'.join(map(str, err.path)) or '<root>'}: {err.message}")
        failed += bool(errors)
        if not errors:
            print(f"{path}: ok")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
