"""Driving the command-line tool: generate, solve, verify, compare."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def qdetect(*args):
    proc = subprocess.run([sys.executable, "-m", "qdetect.cli", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout


tmp = Path(tempfile.mkdtemp())
ens = tmp / "ensemble.json"
report = tmp / "report.json"

code, _ = qdetect("generate", "--kind", "mixed", "--n", "3", "--m", "4", "--seed", "1", "--output", str(ens))
print("generate exit code:", code)

code, out = qdetect("solve", str(ens))
print("\nsolve (text), exit code", code)
print(out)

qdetect("solve", str(ens), "--format", "json", "--output", str(report))
rep = json.loads(report.read_text())
print("json keys:", sorted(rep))

code, out = qdetect("verify", str(ens), "--measurement", str(report), "--dual", str(report))
print("\nverify the solve report, exit code", code)
print(out)

r2 = 2 ** -0.5
doc = {"dim": 2, "states": [
    {"prior": 0.1, "vector": [[1, 0], [0, 0]]},
    {"prior": 0.6, "vector": [[r2, 0], [r2, 0]]},
    {"prior": 0.3, "vector": [[0, 0], [1, 0]]},
]}
three = tmp / "three.json"
three.write_text(json.dumps(doc))
code, out = qdetect("compare", str(three), "--format", "json")
cmp = json.loads(out)
print("compare: optimal", round(cmp["p_correct"], 4), "vs least squares", round(cmp["lsm_p_correct"], 4))
print("figure data:", json.dumps(cmp["figure"]))
