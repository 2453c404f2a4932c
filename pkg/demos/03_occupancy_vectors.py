"""Turn an activity log into binary occupancy vectors.

Run from the repository root:  python3 demos/03_occupancy_vectors.py
"""

from adherence import (BehaviorTemplate, CohortSpec, occupancy_matrix,
                       simulate_cohort, sparsity)

spec = CohortSpec(
    patients=1,
    weeks=1,
    behaviors=(
        BehaviorTemplate("take_medicine", clock=480, jitter_sd=10.0),
        BehaviorTemplate("eating", clock=660, duration=30, jitter_sd=20.0),
        BehaviorTemplate("sleeping", clock=1320, duration=480, jitter_sd=30.0),
    ),
    seed=7,
)
log = simulate_cohort(spec).patients[0].log

print(f"One simulated week for {log.patient_id}: {len(log.entries)} entries")
print(f"behaviors: {', '.join(log.behaviors)}")

matrix = occupancy_matrix(log, window=30)
print(f"\n30-minute occupancy matrix: {matrix.values.shape[0]} behaviors "
      f"x {matrix.values.shape[1]} windows")

# One day is 48 columns at this width; draw the first day as strips.
per_day = 1440 // 30
print("\nFirst 24 hours, one character per half hour (# = occupied):")
for row, name in enumerate(matrix.behaviors):
    strip = matrix.values[row, :per_day]
    print(f"  {name:>13}  {''.join('#' if v else '.' for v in strip)}")

print("\nSparsity rises as the window shrinks:")
for window in (60, 30, 15):
    m = occupancy_matrix(log, window)
    print(f"  window {window:>2} min  ->  sparsity {sparsity(m):.4f}")
