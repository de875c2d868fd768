"""Runs every CLI experiment at small size and checks the files it writes."""

import csv
import io
import json
import os
import shutil
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import jsonschema

CLI, SCHEMAS, WORK = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])

SMALL = {
    "corridors": ["--sigma", "0.2"],
    "cellmeasure": ["--trials", "20000"],
    "angles": [],
    "sums": ["--totient-n", "1000"],
    "clt": ["--n", "100", "--trials", "500"],
    "llt": ["--sigma", "0.2", "--n", "20", "--trials", "20000"],
    "wip": ["--n", "100", "--trials", "500", "--s-grid", "0.5"],
    "correlation": ["--n", "100", "--trials", "100", "--j-max", "5"],
    "invariance": ["--trials", "5000"],
    "charincrement": ["--trials", "20000", "--t-grid", "[[0.01,0]]"],
    "tail": ["--trials", "50000"],
    "flight": ["--n", "100", "--trials", "50"],
    "lpnorm": ["--trials", "5000"],
}

failures = []


def check(cond, message):
    if not cond:
        failures.append(message)
        print("FAIL", message)


def run(args, threads="1"):
    env = dict(os.environ, LORENTZ_THREADS=threads)
    return subprocess.run([CLI, *args], env=env, capture_output=True, text=True)


def validator(name):
    schema = json.loads((SCHEMAS / name).read_text())
    return jsonschema.Draft202012Validator(schema)


report_schema = validator("report.schema.json")
manifest_schema = validator("manifest.schema.json")


def validate(v, doc, where):
    errors = sorted(v.iter_errors(doc), key=str)
    check(not errors, f"{where}: {errors[0].message if errors else ''}")


def data_files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "manifest.json"}


if WORK.exists():
    shutil.rmtree(WORK)

for name, args in SMALL.items():
    out = WORK / name / "t1"
    r = run([name, *args, "--seed", "5", "--out", str(out)])
    check(r.returncode == 0, f"{name}: exit {r.returncode}: {r.stderr.strip()}")
    if r.returncode != 0:
        continue
    manifest = json.loads((out / "manifest.json").read_text())
    validate(manifest_schema, manifest, f"{name} manifest")
    check(manifest["status"] == "ok", f"{name}: manifest status")
    for f in manifest["outputs"]:
        check((out / f).is_file(), f"{name}: listed output {f} missing")
    check(not list(out.glob("*.partial")), f"{name}: leftover .partial files")
    for f in manifest["outputs"]:
        path = out / f
        if f.endswith(".json"):
            validate(report_schema, json.loads(path.read_text()), f"{name} {f}")
        elif f.endswith(".csv"):
            raw = path.read_bytes()
            check(raw.endswith(b"\r\n"), f"{name} {f}: CRLF line ends")
            rows = list(csv.reader(io.StringIO(raw.decode(), newline="")))
            check(len(rows) >= 2 and all(len(x) == len(rows[0]) for x in rows),
                  f"{name} {f}: ragged or empty table")
        elif f.endswith(".svg"):
            try:
                ET.fromstring(path.read_text())
            except ET.ParseError as e:
                check(False, f"{name} {f}: {e}")

    # Same config and seed under 4 workers: data files byte-identical.
    out4 = WORK / name / "t4"
    r4 = run([name, *args, "--seed", "5", "--out", str(out4)], threads="4")
    check(r4.returncode == 0 and data_files(out) == data_files(out4),
          f"{name}: data files differ between 1 and 4 workers")

# Corridor table sizes at sigma = 0.2.
rows = list(csv.reader(open(WORK / "corridors/t1/corridors.csv", newline="")))
check(len(rows) == 33, f"corridors.csv has {len(rows) - 1} pair rows")
rows = list(csv.reader(open(WORK / "corridors/t1/corridor_directions.csv", newline="")))
check(len(rows) == 17, f"corridor_directions.csv has {len(rows) - 1} direction rows")

# Error paths: exit code and manifest contents.
for args, code, kind in [
    (["clt", "--sigma", "0.6"], 2, "InvalidConfig"),
    (["clt", "--trials", "ten"], 2, "InvalidConfig"),
    (["run", "--experiment", "nope"], 2, "UnknownExperiment"),
    (["llt", "--sigma", "0.2", "--n", "100", "--trials", "1000"], 4, "InsufficientTrials"),
    (["lpnorm", "--p", "2"], 2, "ExponentOutOfRange"),
    (["angles", "--M-grid", "2"], 3, "NoTangentIntersection"),
]:
    out = WORK / "errors" / "_".join(args).replace("-", "")
    r = run([*args, "--out", str(out)])
    check(r.returncode == code, f"{args}: exit {r.returncode}, want {code}")
    manifest = json.loads((out / "manifest.json").read_text())
    validate(manifest_schema, manifest, f"{args} manifest")
    check(manifest["status"] == "error" and manifest["error"]["kind"] == kind,
          f"{args}: manifest error {manifest.get('error')}")
    check(kind in r.stderr, f"{args}: message does not name {kind}")

r = run(["--help"])
check(r.returncode == 0, "--help exit code")
r = run(["clt", "--no-such-flag", "1"])
check(r.returncode == 2, "unknown flag exit code")

# Config file values lose to flags.
cfg = WORK / "cfg.json"
cfg.write_text(json.dumps({"trials": 1000, "n": 10, "sigma": 0.2}))
out = WORK / "precedence"
r = run(["run", "--experiment", "flight", "--config", str(cfg), "--trials", "1e4", "--out", str(out)])
check(r.returncode == 0, f"precedence run: {r.stderr}")
doc = json.loads((out / "flight.json").read_text())
check(doc["config"]["trials"] == 10000 and doc["config"]["sigma"] == 0.2, "flag precedence")
cfg.write_text(json.dumps({"trials": 1000, "colour": "red"}))
r = run(["flight", "--config", str(cfg), "--out", str(WORK / "unknown_key")])
check(r.returncode == 2 and "colour" in r.stderr, "unknown config key")

# Plot subcommand.
tail = WORK / "tail/t1/tail.json"
r = run(["plot", "--input", str(tail), "--kind", "tail", "--output", str(WORK / "t.svg")])
check(r.returncode == 0 and (WORK / "t.svg").read_bytes() == (WORK / "tail/t1/tail.svg").read_bytes(),
      "plot reproduces the tail SVG")
r = run(["plot", "--input", str(tail), "--kind", "histogram", "--output", str(WORK / "u.svg")])
check(r.returncode != 0 and "UnsupportedKind" in r.stderr and not (WORK / "u.svg").exists(),
      "unsupported plot kind")
(WORK / "empty.json").write_text("{}")
r = run(["plot", "--input", str(WORK / "empty.json"), "--kind", "clt", "--output", str(WORK / "e.svg")])
check(r.returncode != 0 and "EmptyData" in r.stderr and not (WORK / "e.svg").exists(), "empty report")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
