"""
A seeded run through the command line
=====================================

Equivalent shell session::

    hermflow generate  --out run --seed 7
    hermflow integrate --out run
    hermflow energy    --out run
    hermflow verify    --out run

Each command appends its section to run/manifest.json with a config
echo and SHA-256 hashes of the files it wrote.
"""

import json
import os
import sys
import tempfile

from hermflow.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="hermflow-")
cfg = os.path.join(out, "config.json")
os.makedirs(out, exist_ok=True)
with open(cfg, "w") as fh:
    json.dump({"dim": 4, "num_points": 3, "seed": 7, "t_end": 1.0, "dt": 1e-3, "probes": 2}, fh)

for cmd in ("generate", "integrate", "energy", "verify"):
    code = main([cmd, "--config", cfg, "--out", out])
    print(f"{cmd:<9} exit {code}")

with open(os.path.join(out, "energy.json")) as fh:
    rep = json.load(fh)
print("global energy", rep["global_energy"])
for pt in rep["points"]:
    print(f"  point {pt['point_id']}: energy {pt['energy']:.6f}, probes {pt['probes_normalized']}")

with open(os.path.join(out, "manifest.json")) as fh:
    man = json.load(fh)
for cmd, entry in man["commands"].items():
    print(cmd, sorted(entry["files"]))
print("outputs in", out)
