"""Rewrite tests/golden/ from a fresh run-all over the bundled sample.

Only run this after an intentional change to the report output, then
review the diff before committing.
"""

import shutil
import sys
import tempfile
from pathlib import Path

from ricalign.cli import main

ROOT = Path(__file__).resolve().parents[1]
SAMPLE = ROOT / "src" / "ricalign" / "data" / "sample"
GOLDEN = ROOT / "tests" / "golden"

if __name__ == "__main__":
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp) / "sample"
        shutil.copytree(SAMPLE, work, ignore=shutil.ignore_patterns("work", "report"))
        if main(["run-all", "--config", str(work / "pipeline.ini")]) != 0:
            sys.exit(1)
        GOLDEN.mkdir(exist_ok=True)
        for path in sorted((work / "report").iterdir()):
            if path.name != "manifest.json":
                shutil.copy(path, GOLDEN / path.name)
                print(f"wrote {GOLDEN / path.name}")
