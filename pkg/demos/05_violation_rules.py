"""Check a simulated patient's log against extracted timing rules.

Run from the repository root:  python3 demos/05_violation_rules.py
"""

from collections import Counter
from pathlib import Path

from adherence import (BehaviorTemplate, CohortSpec, Plant,
                       check_log, extract_from_guideline, serialize,
                       simulate_cohort)

text = (Path(__file__).parent / "guideline.txt").read_text()
constraints = extract_from_guideline(text).constraints()
print("Rules under test:")
for c in constraints:
    print(f"  {serialize(c)}")

# One patient, three weeks.  A planted late-dose habit (40..80 minutes,
# one day in four) lands inside the hour after eating and drifts the
# dose clock, so several rules should trip.
spec = CohortSpec(
    patients=1,
    weeks=3,
    behaviors=(
        BehaviorTemplate("take_medicine", clock=480, jitter_sd=6.0),
        BehaviorTemplate("eating", clock=540, duration=25, jitter_sd=12.0),
    ),
    plants=(Plant("take_medicine", rate=0.25, shift_lo=40, shift_hi=80),),
    seed=13,
)
log = simulate_cohort(spec).patients[0].log

results = check_log(log, constraints)
print(f"\n{len(results)} verdicts over {len(log.entries)} entries")

print("\nDay by day (v = violation, . = ok, ? = indeterminate):")
mark = {"violation": "v", "ok": ".", "indeterminate": "?"}
days = sorted({r.day for r in results})
for i, c in enumerate(constraints):
    row = {r.day: mark[r.verdict] for r in results if r.constraint == c}
    strip = "".join(row.get(d, " ") for d in days)
    print(f"  rule {i + 1}  {strip}")

counts = Counter(r.verdict for r in results)
print("\nTotals:", ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
