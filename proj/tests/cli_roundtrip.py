#!/usr/bin/env python3
"""Runs every example config through the CLI twice and checks the artifacts.

usage: cli_roundtrip.py <qcgeom binary> <configs dir> <scratch dir>
"""
import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

# the full acceptance report takes minutes; it is covered by the acceptance test
SKIP = {"report.json"}
DETERMINISTIC = (".json", ".csv", ".svg", ".bin")

failures = []


def check(cond, msg):
    if not cond:
        failures.append(msg)
        print("FAIL", msg)


def run(exe, *args):
    return subprocess.run([exe, *args], capture_output=True, text=True)


def main():
    exe, configs, scratch = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    shutil.rmtree(scratch, ignore_errors=True)
    scratch.mkdir(parents=True)

    r = run(exe, "--schema")
    check(r.returncode == 0, "--schema exits 0")
    schema = json.loads(r.stdout)
    jsonschema.Draft202012Validator.check_schema(schema)
    r = run(exe, "--version")
    check(r.returncode == 0 and "1.0.0" in r.stdout, "--version prints the toolkit version")

    registry = Registry().with_resource(schema["$id"], Resource.from_contents(schema))

    def validator(ref):
        return jsonschema.Draft202012Validator({"$ref": schema["$id"] + ref}, registry=registry)

    for cfg_path in sorted(configs.glob("*.json")):
        cfg = json.loads(cfg_path.read_text())
        errs = list(jsonschema.Draft202012Validator(schema).iter_errors(cfg))
        check(not errs, f"{cfg_path.name} conforms to the schema: {[e.message for e in errs]}")
        if cfg_path.name in SKIP:
            continue
        cmd = cfg["command"]
        outs = []
        for rep in ("a", "b"):
            out = scratch / cfg_path.stem / rep
            r = run(exe, cmd, "--config", str(cfg_path), "--output-dir", str(out))
            check(r.returncode == 0, f"{cfg_path.name} run {rep} exits 0 (got {r.returncode}: {r.stderr.strip()})")
            outs.append(out)
        a, b = outs
        names = sorted(p.name for p in a.iterdir())
        check(names == sorted(p.name for p in b.iterdir()), f"{cfg_path.name} writes the same files twice")
        for name in names:
            if name.endswith(DETERMINISTIC):
                check((a / name).read_bytes() == (b / name).read_bytes(), f"{cfg_path.name}: {name} is byte-identical")
        report = json.loads((a / f"{cmd}.json").read_text())
        kind = report.get("kind")
        errs = list(validator(f"#/$defs/{kind}").iter_errors(report))
        check(not errs, f"{cfg_path.name}: {cmd}.json matches $defs/{kind}: {[e.message for e in errs][:3]}")
        check(report["config"] == cfg, f"{cfg_path.name}: config is echoed verbatim")
        print("ok", cfg_path.name, names)

    bad = scratch / "bad"
    bad.mkdir()
    unknown = {"schema_version": 1, "command": "gauge", "gauge": {"gauge": {"kind": "Power", "params": {"a": 2}}}, "colour": 1}
    (bad / "unknown.json").write_text(json.dumps(unknown))
    r = run(exe, "gauge", "--config", str(bad / "unknown.json"), "--output-dir", str(bad / "o1"))
    check(r.returncode == 2, f"unknown field exits 2 (got {r.returncode})")
    diag = json.loads(r.stderr.strip().splitlines()[-1])
    check(diag["exit_code"] == 2 and "colour" in diag["message"], "diagnostic names the unknown field")

    (bad / "broken.json").write_text("{not json")
    r = run(exe, "gauge", "--config", str(bad / "broken.json"), "--output-dir", str(bad / "o2"))
    check(r.returncode == 2, f"malformed JSON exits 2 (got {r.returncode})")

    deep = {"schema_version": 1, "command": "build", "build": {"construction": {"depth": 12, "L": 8}}}
    (bad / "deep.json").write_text(json.dumps(deep))
    r = run(exe, "build", "--config", str(bad / "deep.json"), "--output-dir", str(bad / "o3"))
    check(r.returncode == 3, f"depth beyond resolution exits 3 (got {r.returncode}: {r.stderr.strip()})")

    wrong = dict(deep, command="gauge")
    (bad / "wrong.json").write_text(json.dumps(wrong))
    r = run(exe, "build", "--config", str(bad / "wrong.json"), "--output-dir", str(bad / "o4"))
    check(r.returncode == 2, f"command mismatch exits 2 (got {r.returncode})")

    if failures:
        print(f"{len(failures)} failure(s)")
        return 1
    print("all CLI checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
