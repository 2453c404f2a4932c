"""Run the whole pipeline end to end from a single config file.

Extraction, simulation, vectorization, training, evaluation, violation
checking and cohort metrics in one command, with every stage cached under
the output directory.  Takes a couple of minutes the first time; rerunning
reuses the cache.

Run from the repository root:  python3 demos/07_full_pipeline.py
"""

import json
from pathlib import Path

from adherence.cli import main

here = Path(__file__).parent
out = here / "output"
rc = main(["run", "--config", str(here / "pipeline.json"),
           "--output-dir", str(out)])
if rc:
    raise SystemExit(rc)

report = json.loads((out / "report.json").read_text())
violations = report["violations"]
print("\nreport.json highlights:")
print(f"  window            {report['window']} minutes")
print(f"  context           {report['context_windows']} windows")
print(f"  patients          {len(report['patients'])}")
print(f"  held-out frames   {report['test_frames']}")
for method, value in sorted(report["rmse"].items()):
    print(f"  rmse[{method}]  {value:.3f}")
print(f"  violation P/R/F1  {violations['weighted_precision']:.3f} "
      f"{violations['weighted_recall']:.3f} {violations['f1']:.3f}")
print(f"\nartifacts under {out}/")
