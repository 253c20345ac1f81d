"""Runs the fmchain binary on the sample inputs and validates every JSON
document it writes (and every input it reads) against docs/schemas."""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource

binary, root = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
schemas = root / "docs" / "schemas"
inputs = root / "docs" / "inputs"

registry = Registry()
for path in schemas.glob("*.json"):
    registry = registry.with_resource(path.name, Resource.from_contents(json.loads(path.read_text())))


def validate(doc, schema_name):
    schema = json.loads((schemas / schema_name).read_text())
    jsonschema.Draft202012Validator(schema, registry=registry).validate(doc)


def run(args, expect):
    proc = subprocess.run([str(binary), *args], capture_output=True, text=True, timeout=300)
    if proc.returncode != expect:
        sys.exit(f"{args}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    if expect != 0:
        validate(json.loads(proc.stderr), "error.json")
    return proc


def header(path):
    with open(path, newline="") as f:
        return next(csv.reader(f))


for name in inputs.glob("classical_*.json"):
    validate(json.loads(name.read_text()), "classical_input.json")
for name in inputs.glob("chain_*.json"):
    validate(json.loads(name.read_text()), "chain_input.json")
for name in inputs.glob("scan_*.json"):
    validate(json.loads(name.read_text()), "scan_input.json")

with tempfile.TemporaryDirectory() as tmp:
    out = pathlib.Path(tmp)

    for stem in ("classical_symmetric", "classical_hidden"):
        d = out / stem
        run(["classical", "--input", str(inputs / f"{stem}.json"), "--out", str(d), "--steps", "20000"], 0)
        validate(json.loads((d / "classical.json").read_text()), "classical_output.json")
        assert header(d / "increments.csv") == ["index", "value"]
        assert header(d / "marginal.csv") == ["index", "value"]
        float((d / "rate.txt").read_text())
    rate = float((out / "classical_symmetric" / "rate.txt").read_text())
    assert abs(rate - 0.562335) < 1e-6, rate

    for stem in ("chain_scalar", "chain_product", "chain_two_mode"):
        d = out / stem
        run(["fermi", "--input", str(inputs / f"{stem}.json"), "--out", str(d), "--n", "64", "--quad", "1024"], 0)
        summary = json.loads((d / "fermi.json").read_text())
        validate(summary, "fermi_output.json")
        validate(json.loads((d / "chain.json").read_text()), "chain_output.json")
        validate(json.loads((d / "chain.json").read_text()), "chain_input.json")
    run(["fermi", "--input", str(inputs / "chain_not_extendible.json"), "--out", str(out / "bad")], 3)

    d = out / "scan"
    run(["scan", "--input", str(inputs / "scan_lens.json"), "--out", str(d), "--grid", "31", "--quad", "128"], 0)
    summary = json.loads((d / "scan_summary.json").read_text())
    validate(summary, "scan_summary.json")
    assert summary["within_one_cell"] is True
    assert header(d / "scan.csv") == ["x_re", "x_im", "feasible", "density"]

    d = out / "empty"
    run(["scan", "--input", str(inputs / "scan_empty.json"), "--out", str(d), "--grid", "7"], 0)
    validate(json.loads((d / "scan_summary.json").read_text()), "scan_summary.json")

    d = out / "spectrum"
    run(["scan", "spectrum", "--input", str(inputs / "chain_scalar.json"), "--out", str(d), "--n", "32"], 0)
    validate(json.loads((d / "spectrum_summary.json").read_text()), "spectrum_summary.json")
    assert header(d / "histogram.csv") == ["bin_lo", "bin_hi", "finite", "limit"]
    assert header(d / "eigenvalues.csv") == ["eigenvalue"]

    run(["classical", "--input", str(out / "missing.json")], 2)

print("all CLI outputs validate")
