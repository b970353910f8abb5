"""Every JSON report validates against the schema shipped in docs/schemas."""
import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from nonlocal_trace.cli import main

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _registry():
    resources = []
    for path in SCHEMA_DIR.glob("*.json"):
        schema = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(schema)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def _validator(name):
    schema = json.loads((SCHEMA_DIR / f"{name}.json").read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema, registry=REGISTRY)


CASES = [
    ("fp", ["fp", "-a", "xi1^2/|xi|^3; 1/|xi|^2", "--n", "2"]),
    ("res", ["res", "-a", "1/|xi|", "--n", "1", "--p", "4*|xi|^2"]),
    ("logsym", ["logsym", "--p", "|xi|^2; xi1", "--n", "2", "--J", "3"]),
    ("expand", ["expand", "-a", "1/|xi|", "--n", "1", "--zeta"]),
    ("c0", ["c0", "-a", "1/|xi|", "--n", "1", "--p", "|xi|^2; xi1"]),
    ("defect", ["defect", "-a", "1/|xi|", "--n", "1", "--p", "4*|xi|^2", "--p2", "|xi|^2"]),
    ("fit", ["fit", "-a", "1", "--n", "1"]),
    ("verify", ["verify", "--only", "appendix,finite-part"]),
]


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_report_matches_schema(name, argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    assert code == 0
    errors = list(_validator(name).iter_errors(json.loads(out)))
    assert not errors, [e.message for e in errors]


def test_schema_rejects_malformed_scalar():
    bad = {"command": "fp", "rows": [], "symbol": "1", "value": {"kind": "exact"}, "report": {}}
    assert list(_validator("fp").iter_errors(bad))
