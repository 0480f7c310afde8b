"""Process-level checks of the command line: exit codes, files, report."""
import json
import os
import subprocess
import sys
import tempfile

exe = sys.argv[1]
failures = []


def run(*args):
    return subprocess.run([exe, *args], capture_output=True, text=True)


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


with tempfile.TemporaryDirectory() as tmp:
    def cfg(name, text):
        path = os.path.join(tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    r = run("cardy", "--config", cfg("c.cfg", "cardy.m = 0.5\n"))
    rec = json.loads(r.stdout)
    check(r.returncode == 0 and rec["estimates"]["value"] == 0.5, "cardy m=0.5 gives 0.5")

    r = run("eigen1d", "--config", cfg("e.cfg", "eigen1d.kappa = 6\n"))
    check(r.returncode == 0 and abs(json.loads(r.stdout)["estimates"]["lambda"] - 5 / 48) < 1e-4, "eigen1d kappa=6 near 5/48")

    prefix = os.path.join(tmp, "bad")
    r = run("eigen1d", "--config", cfg("u.cfg", "eigen1d.kappa = 6\neigen1d.typo = 1\n"), "--out", prefix)
    err = json.loads(r.stderr)["error"]
    check(r.returncode == 1 and r.stdout == "" and err["kind"] == "config", "unknown key exits 1 with an error record")
    check(not os.path.exists(prefix + ".jsonl"), "no partial output on config error")

    r = run("cardy", "--config", os.path.join(tmp, "missing.cfg"))
    check(r.returncode == 1, "missing config exits 1")
    r = run("cardy", "--format", "xml")
    check(r.returncode == 1, "bad format flag exits 1")
    r = run("cardy", "--out", os.path.join(tmp, "no", "such", "dir", "x"))
    check(r.returncode == 1 and r.stdout == "", "unwritable output exits 1")

    r = run("backbone", "--config", cfg("b.cfg", "backbone.meshes = 16,32,64\nbackbone.assumedOrder = 2\n"))
    err = json.loads(r.stderr)["error"]
    check(r.returncode == 2 and err["kind"] == "numerical" and len(err["record"]["series"]["rows"]) == 3,
          "refused extrapolation exits 2 with the mesh trace")

    sweep = cfg("p.cfg", "percolation.trials = 500\npercolation.scales = 4,8,16,32\n")
    one = os.path.join(tmp, "one")
    three = os.path.join(tmp, "three")
    check(run("percolation", "--config", sweep, "--seed", "5", "--workers", "1", "--out", one).returncode == 0,
          "percolation writes json")
    run("percolation", "--config", sweep, "--seed", "5", "--workers", "3", "--out", three)

    def numeric(path):
        with open(path) as f:
            d = json.loads(f.read())
        d.pop("wallClock")
        return d

    a, b = numeric(one + ".jsonl"), numeric(three + ".jsonl")
    check(a == b, "worker count does not change the record")
    check(a["seed"] == 5 and a["fit"] is not None, "seed flag and fit are recorded")

    r = run("report", one + ".jsonl", three + ".jsonl", "--format", "csv")
    lines = r.stdout.splitlines()
    check(r.returncode == 0 and lines[0] == "record,scale,pHat,stdErr" and len(lines) == 9, "report to csv")
    r = run("report", one + ".jsonl", "--format", "plotdata", "--out", os.path.join(tmp, "plot"))
    check(r.returncode == 0 and os.path.exists(os.path.join(tmp, "plot.dat")), "report to plotdata file")
    r = run("report", one + ".jsonl")
    check(r.returncode == 0 and json.loads(r.stdout) == json.loads(open(one + ".jsonl").read()), "json report round-trips")

    empty = cfg("empty.jsonl", "")
    check(run("report", empty).returncode == 1, "empty record list is rejected")
    check(run("report", cfg("junk.jsonl", "{\"engine\": 1}\n")).returncode == 1, "schema violation is rejected")

sys.exit(1 if failures else 0)
