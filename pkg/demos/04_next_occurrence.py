"""Predict the next medication window and compare against baselines.

Trains a small recurrent model on occupancy context frames, then scores it
beside the prior-day and autoregressive predictors on held-out frames.
Takes around a minute on a laptop.

Run from the repository root:  python3 demos/04_next_occurrence.py
"""

import numpy as np

from adherence import (BehaviorTemplate, CohortSpec, DependencyLink,
                       ar_next_occurrence, context_windows_for, make_frames,
                       next_occurrence_rmse, occupancy_matrix,
                       predict_window_model, prior_day_predict, simulate_cohort,
                       split_frames, train_window_model)

WINDOW = 30
CONTEXT = context_windows_for(1, WINDOW)  # one week of context

# Sleep onset drifts a lot; waking follows sleep and the dose follows
# waking, so the context carries real signal that the clock-only
# baselines cannot see.
spec = CohortSpec(
    patients=6,
    weeks=6,
    behaviors=(
        BehaviorTemplate("sleeping", clock=1230, duration=540, jitter_sd=45.0),
        BehaviorTemplate("wake_up", clock=0, duration=1),
        BehaviorTemplate("take_medicine", clock=0, duration=1, jitter_sd=5.0),
    ),
    links=(
        DependencyLink("wake_up", "sleeping", offset=540, jitter_sd=10.0),
        DependencyLink("take_medicine", "wake_up", offset=150, jitter_sd=5.0),
    ),
    seed=31,
)
cohort = simulate_cohort(spec)
behaviors = cohort.patients[0].log.behaviors

train_frames, test_pairs = [], []
for patient in cohort.patients:
    matrix = occupancy_matrix(patient.log, WINDOW)
    frames = make_frames(matrix, "take_medicine", CONTEXT, stride=4)
    head, tail = split_frames(frames, fraction=0.75)
    train_frames.extend(head)
    test_pairs.append((patient.log, tail))

print(f"{sum(len(t) for _, t in test_pairs)} held-out frames, "
      f"{len(train_frames)} training frames")

model = train_window_model(train_frames, behaviors, WINDOW,
                           hidden=16, pooling="last", seed=0,
                           max_epochs=10, patience=10, batch_size=32, lr=2e-3)
print(f"trained for {len(model.history)} epochs "
      f"(final val loss {model.history[-1][1]:.4f})")


def pooled(values):
    sq, n = 0.0, 0
    for rmse, count in values:
        sq += count * rmse * rmse
        n += count
    return float(np.sqrt(sq / n))


scores = {"window model": [], "prior day": [], "autoregressive": []}
for log, tail in test_pairs:
    if not tail:
        continue
    yhat = predict_window_model(model, tail)
    y = np.array([f.y for f in tail], dtype=np.float64)
    scores["window model"].append(
        (float(np.sqrt(np.mean((yhat - y) ** 2))), len(tail)))
    scores["prior day"].append((next_occurrence_rmse(
        lambda now: prior_day_predict(log, "take_medicine", now, WINDOW),
        tail, WINDOW), len(tail)))
    scores["autoregressive"].append((next_occurrence_rmse(
        lambda now: ar_next_occurrence(log, "take_medicine", now, WINDOW),
        tail, WINDOW), len(tail)))

print("\nRMSE in windows ahead (lower is better):")
for name, values in scores.items():
    print(f"  {name:>15}  {pooled(values):.3f}")
