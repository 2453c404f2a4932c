"""Regularity and sparsity measures over occupancy matrices.

A patient's schedule vector lists the idle stretch between consecutive log
entries, in window units.  Cosine similarity between two such vectors says
how alike two patients' pacing is; a patient's regularity score sums their
similarity to everyone else in the cohort.  Sparsity is the zero fraction
of the occupancy matrix, a quick activity-density readout.
"""

from __future__ import annotations

import numpy as np

from adherence.logs import ActivityLog
from adherence.logs import sparsity as sparsity  # re-exported for callers


class EmptyCohort(ValueError):
    """Cohort-level measures need at least one patient."""


def schedule_vector(log: ActivityLog, window: int) -> np.ndarray:
    """Gaps between consecutive entries (next start minus previous stop),
    in window units, clipped at zero so overlapping entries read as no gap."""
    if window < 1:
        raise ValueError("window must be a positive number of minutes")
    entries = log.entries
    if len(entries) < 2:
        return np.zeros(0)
    starts = np.array([e.start for e in entries[1:]], dtype=np.float64)
    stops = np.array([e.stop for e in entries[:-1]], dtype=np.float64)
    return np.maximum(starts - stops, 0.0) / window


def schedule_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, truncating the longer vector to the shorter.

    Two all-zero (or empty) vectors count as identical pacing, similarity
    1.0; a zero vector against a nonzero one scores 0.0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = min(a.size, b.size)
    a, b = a[:n], b[:n]
    if np.array_equal(a, b):
        return 1.0  # exact, no rounding through the norms
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def similarity_matrix(vectors) -> np.ndarray:
    """Pairwise schedule similarity; symmetric with an exact unit diagonal."""
    vectors = list(vectors)
    if not vectors:
        raise EmptyCohort("no schedule vectors given")
    n = len(vectors)
    out = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = schedule_similarity(vectors[i], vectors[j])
            out[i, j] = out[j, i] = s
    return out


def regularity_scores(vectors) -> np.ndarray:
    """Per-patient sum of similarities to every other patient."""
    sims = similarity_matrix(vectors)
    return sims.sum(axis=1) - np.diag(sims)


def cohort_regularity(logs, window: int) -> np.ndarray:
    if not logs:
        raise EmptyCohort("no logs given")
    return regularity_scores([schedule_vector(log, window) for log in logs])


def write_similarity_heatmap(sims: np.ndarray, labels, path) -> None:
    """Plain-text heatmap table: header row of labels, one row per patient."""
    labels = list(labels)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("patient\t" + "\t".join(labels) + "\n")
        for label, row in zip(labels, sims):
            cells = "\t".join(f"{v:.6f}" for v in row)
            fh.write(f"{label}\t{cells}\n")


def write_regularity_table(scores: np.ndarray, labels, path) -> None:
    labels = list(labels)
    order = sorted(range(len(labels)), key=lambda i: (-scores[i], labels[i]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("patient\tregularity\n")
        for i in order:
            fh.write(f"{labels[i]}\t{scores[i]:.6f}\n")
