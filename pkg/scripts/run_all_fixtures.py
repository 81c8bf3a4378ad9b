#!/usr/bin/env python3
"""Run every bundled experiment config through the CLI.

Outputs land in rwscenery-out/<fixture-name>/; the overall exit code is the
worst per-fixture code (0 pass, 2 criterion failure, 1 error).
"""

import json
import os
import sys
import tempfile
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from importlib import resources

from rwscenery import cli


def main():
    worst = 0
    base = os.environ.get("RWSCENERY_OUT", "rwscenery-out")
    for entry in sorted(resources.files("rwscenery.fixtures").iterdir()):
        if not entry.name.endswith(".json"):
            continue
        doc = json.loads(entry.read_text())
        if "experiment" not in doc:
            continue
        name = entry.name[:-5]
        out = os.path.join(base, name)
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            fh.write(json.dumps(doc))
            cfg_path = fh.name
        t0 = time.time()
        code = cli.main(["run", cfg_path, "--out", out])
        os.unlink(cfg_path)
        print(f"  -> {name}: exit {code} in {time.time() - t0:.1f}s")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
