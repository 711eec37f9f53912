"""End-to-end checks of the mjpapprox command line tool."""

import csv
import io
import pathlib
import subprocess
import sys
import tempfile

EXE = sys.argv[1]
MODELS = pathlib.Path(sys.argv[2])
failures = []


def run(*args):
    return subprocess.run([EXE, *args], capture_output=True, text=True)


def check(name, ok, detail=""):
    print(("PASS " if ok else "FAIL ") + name + (": " + detail if detail else ""))
    if not ok:
        failures.append(name)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# pdf column integrates to 1 - defect (grid reaches far into the tail)
res = run("iph-density", "--model", str(MODELS / "gompertz.json"), "--n", "20", "--trunc", "40",
          "--grid", "0:8:0.002")
defect = float(next(l for l in res.stderr.splitlines() if l.startswith("# defect")).split("=")[1])
data = rows(res.stdout)
ts = [float(r["t"]) for r in data]
pdf = [float(r["pdf"]) for r in data]
area = sum((ts[k + 1] - ts[k]) * (pdf[k + 1] + pdf[k]) / 2 for k in range(len(ts) - 1))
check("iph-density integrates to 1 - defect", res.returncode == 0 and abs(area - (1 - defect)) < 1e-5,
      f"area {area:.8f}, 1 - defect {1 - defect:.8f}")
check("grid includes stop", abs(ts[-1] - 8.0) < 1e-12 and len(ts) == 4001)

with tempfile.TemporaryDirectory() as tmp:
    bad = pathlib.Path(tmp) / "bad.json"
    bad.write_text('{"p": 2, "alpha": [0.5,\n')
    res = run("iph-density", "--model", str(bad), "--n", "20", "--trunc", "40", "--grid", "0:1:0.5")
    check("malformed JSON exits 2", res.returncode == 2, res.stderr.strip().splitlines()[-1])
    wrong = pathlib.Path(tmp) / "wrong.json"
    wrong.write_text('{"p": 2, "alpha": [0.5, 0.5], "S": [[-1, 0], [0]]}')
    res = run("iph-density", "--model", str(wrong), "--n", "20", "--trunc", "40", "--grid", "0:1:0.5")
    check("schema violation exits 2", res.returncode == 2 and "S[1]" in res.stderr)

res = run("mph-density", "--model", str(MODELS / "loss_alae.json"), "--n", "45", "--trunc", "40",
          "--grid-x", "0.05:0.1:0.05", "--grid-y", "0.01:0.02:0.01")
check("invalid Q matrix exits 3", res.returncode == 3)

args = ("ruin", "--model", str(MODELS / "exponential.json"), "--n", "100", "--trunc", "2500",
        "--rho", "2", "--nu", "1", "--u-grid", "0:2:0.5", "--mc", "500", "--seed", "9")
first, second = run(*args), run(*args)
check("same seed gives identical bytes", first.returncode == 0 and first.stdout == second.stdout)
check("ruin header", first.stdout.splitlines()[0] == "u,psi_approx,psi_mc,mc_stderr")

res = run("rate-experiment", "--n", "100,400", "--eps", "0.5", "--reps", "20", "--seed", "7")
check("rate-experiment rows", res.returncode == 0 and len(rows(res.stdout)) == 2)

sys.exit(1 if failures else 0)
