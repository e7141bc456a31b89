#!/usr/bin/env python3
"""End-to-end checks of the symreg binary: exit codes, outputs, report schemas."""

import csv
import json
import math
import random
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

CLI = Path(sys.argv[1])
ROOT = Path(sys.argv[2])
REPORT_SCHEMA = json.loads((ROOT / "schemas" / "report.schema.json").read_text())
TIMING_SCHEMA = json.loads((ROOT / "schemas" / "timing.schema.json").read_text())

# Small budgets keep the whole script under a minute.
SMALL = {"run": {"max_episodes": 6}, "search": {"n_evaluate": 10}}

failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args, **kw):
    return subprocess.run([str(CLI), *map(str, args)], capture_output=True, text=True, **kw)


def validate(path, schema):
    try:
        jsonschema.validate(json.loads(Path(path).read_text()), schema)
        return True
    except jsonschema.ValidationError as e:
        print("     schema:", e.message)
        return False


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def py_eval(infix, xs):
    env = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": math.log, "sqrt": math.sqrt}
    env.update({f"x{i + 1}": v for i, v in enumerate(xs)})
    return eval(infix.replace("^", "**"), {"__builtins__": {}}, env)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    small = tmp / "small.json"
    small.write_text(json.dumps(SMALL))

    # registry
    r = run("registry", "list")
    check(r.returncode == 0 and len(r.stdout.splitlines()) == 73, "registry list prints 73 entries")
    r = run("registry", "list", "--suite", "nguyen-mini")
    check(r.returncode == 0 and len(r.stdout.splitlines()) == 3, "registry list --suite nguyen-mini")
    r = run("bench", "--suite", "nope", "--runs", "1")
    check(r.returncode == 1 and "nguyen-mini" in r.stderr, "unknown suite: exit 1 listing suites")

    # solve: y = x1 + x2
    rng = random.Random(5)
    rows = []
    for _ in range(50):
        a, b = rng.uniform(-1, 1), rng.uniform(-1, 1)
        rows.append([f"{a:.17g}", f"{b:.17g}", f"{a + b:.17g}"])
    data = tmp / "sum.csv"
    write_csv(data, ["x1", "x2", "y"], rows)
    out = tmp / "solve.json"
    r = run("solve", "--data", data, "--seed", 3, "--out", out)
    check(r.returncode == 0, "solve x1+x2 exits 0")
    if out.exists():
        check(validate(out, REPORT_SCHEMA), "solve report matches schema")
        rep = json.loads(out.read_text())
        best = rep["best"]
        ok = best is not None
        if ok:
            for _ in range(64):
                a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
                try:
                    v = py_eval(best["infix"], [a, b])
                except (ValueError, ZeroDivisionError, OverflowError):
                    continue
                ok = ok and abs(v - (a + b)) <= 1e-6 * (1 + abs(a + b))
        check(ok, f"solve recovers x1+x2 (got {best and best['infix']})")
        trace = Path(str(out) + ".trace.csv")
        check(trace.exists(), "solve writes the default trace file")
        if trace.exists():
            lines = trace.read_text().splitlines()
            check(lines[0] == "episode_index,reward,running_best,wall_seconds", "trace header")
            vals = [list(map(float, line.split(","))) for line in lines[1:]]
            check(len(vals) == rep["episodes"] and all(v[2] >= v[1] for v in vals)
                  and all(vals[i][2] >= vals[i - 1][2] for i in range(1, len(vals))),
                  "trace rows: one per episode, running best monotone")

    # solve errors
    bad = tmp / "bad.csv"
    bad.write_text("x1,y\n1,2\n3,oops\n")
    r = run("solve", "--data", bad)
    check(r.returncode == 2 and "line 3" in r.stderr, "malformed CSV: exit 2 naming the line")
    nohdr = tmp / "nohdr.csv"
    nohdr.write_text("1,2\n3,4\n")
    r = run("solve", "--data", nohdr)
    check(r.returncode == 2 and "header" in r.stderr, "missing header: exit 2")
    one = tmp / "one.csv"
    one.write_text("x1,y\n1,2\n")
    r = run("solve", "--data", one)
    check(r.returncode == 2, "one-row CSV: exit 2")
    r = run("solve", "--data", tmp / "missing.csv")
    check(r.returncode == 2, "missing CSV: exit 2")
    r = run("solve")
    check(r.returncode == 1, "solve without --data: exit 1")
    badcfg = tmp / "badcfg.json"
    badcfg.write_text('{"search": {"cpuct": 2}}')
    r = run("solve", "--data", data, "--config", badcfg)
    check(r.returncode == 1 and "cpuct" in r.stderr, "unknown config key: exit 1")

    # budget exhausted
    hard = tmp / "hard.csv"
    write_csv(hard, ["x1", "y"], [[x / 10, math.sin(x / 10) ** 3 + math.exp(x / 7)] for x in range(-10, 11)])
    cfg = tmp / "tiny.json"
    cfg.write_text(json.dumps({"run": {"max_episodes": 2, "reward_threshold": 1.0},
                               "search": {"n_evaluate": 5}}))
    out3 = tmp / "hard.json"
    r = run("solve", "--data", hard, "--config", cfg, "--out", out3, "--trace", tmp / "t.csv")
    check(r.returncode == 3, "budget exhausted without recovery: exit 3")
    check(out3.exists() and validate(out3, REPORT_SCHEMA), "budget-exhausted report still written")
    check((tmp / "t.csv").exists(), "--trace path honoured")

    # bench
    out = tmp / "bench.json"
    r = run("bench", "--suite", "nguyen-mini", "--runs", 2, "--seed", 7, "--config", small, "--out", out)
    check(r.returncode == 0, "bench exits 0")
    if out.exists():
        check(validate(out, REPORT_SCHEMA), "bench report matches schema")
        rep = json.loads(out.read_text())
        check(len(rep["rows"]) == 6 and len(rep["aggregates"]) == 3, "bench: 3x2 rows + 3 aggregates")
        agg_ok = True
        for a in rep["aggregates"]:
            rs = [x for x in rep["rows"] if x["benchmark"] == a["benchmark"]]
            agg_ok = agg_ok and a["runs"] == len(rs) and a["recovered"] == sum(x["recovered"] for x in rs)
        check(agg_ok, "bench aggregates recomputable from rows")
        timing = Path(str(out) + ".timing.json")
        check(timing.exists() and validate(timing, TIMING_SCHEMA), "timing sidecar matches schema")
    out0 = tmp / "bench0.json"
    r = run("bench", "--suite", "nguyen-mini", "--runs", 0, "--out", out0)
    check(r.returncode == 0 and json.loads(out0.read_text())["rows"] == [], "bench --runs 0: empty report")

    # noise
    out = tmp / "noise.json"
    r = run("noise", "--suite", "nguyen-mini", "--runs", 1, "--levels", "0,0.05,0.1",
            "--config", small, "--out", out)
    check(r.returncode == 0, "noise exits 0")
    if out.exists():
        check(validate(out, REPORT_SCHEMA), "noise report matches schema")
        check(len(json.loads(out.read_text())["levels"]) == 3, "noise: one block per level")
    r = run("noise", "--suite", "nguyen-mini", "--levels", "0,0.2")
    check(r.returncode == 1, "noise level above 0.1: exit 1")

    # ablate
    out = tmp / "ablate.json"
    r = run("ablate", "--suite", "nguyen-mini", "--runs", 1, "--disable", "entropy,snrmse",
            "--config", small, "--out", out)
    check(r.returncode == 0, "ablate exits 0")
    if out.exists():
        check(validate(out, REPORT_SCHEMA), "ablate report matches schema")
        rep = json.loads(out.read_text())
        abl = rep["variants"][1]["config"]
        check(abl["model"]["entropy_term"] is False and abl["objective"]["lambda"] == 0,
              "ablate wires entropy_term=false and lambda=0")
    r = run("ablate", "--suite", "nguyen-mini", "--disable", "feasibility")
    check(r.returncode == 1, "ablate feasibility refused: exit 1")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
