"""Synthetic patient cohorts with planted constraint violations.

Each behavior has a nominal daily clock time, a duration, and truncated
normal jitter.  A behavior can instead be anchored on another behavior's
start through a dependency link (wake follows sleep onset, the dose follows
wake), which carries structure across behaviors that a context-aware model
can exploit.  Plants displace a behavior's start on randomly chosen days to
manufacture violations; displacement also shifts anything anchored
downstream, so keep planted behaviors at the end of chains when the plant
is meant to stay isolated.

Missing events come in two flavors: a miss means the event never happened,
a label drop means it happened but was not logged.  Downstream anchors
still see a dropped event's true time; they fall back to their own nominal
clock after a miss.

Alongside each patient's log the generator writes a ledger: per-day
verdicts for a constraint list, computed here with straight-line
inequalities on the emitted entries rather than through the rule engine,
so the two can be cross-checked against each other.  The ledger covers
daily placement rules and daily counts; gap rules and non-day count
periods are out of its scope and raise.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from adherence.constraints import (
    Compound,
    Consistency,
    Constraint,
    DefinitiveDependency,
    Frequency,
    ImpreciseDependency,
    Negated,
    SAME_TIME,
    TimeDependency,
    TimeOfDay,
    to_record,
)
from adherence.logs import ActivityLog, LogEntry, MINUTES_PER_DAY

_UNIT_MINUTES = {"minute": 1, "hour": 60, "day": 1440, "week": 10080}

# inclusive clock ranges, mirrors the rule engine's defaults
_DAYPARTS = {"morning": (300, 719), "noon": (720, 839), "evening": (1020, 1319)}


@dataclass(frozen=True)
class BehaviorTemplate:
    name: str
    clock: int                 # nominal start, minutes past midnight
    duration: int = 1
    jitter_sd: float = 0.0
    miss_probability: float = 0.0


@dataclass(frozen=True)
class DependencyLink:
    behavior: str              # dependent behavior
    anchor: str
    offset: int                # minutes after the anchor's start
    jitter_sd: float = 0.0


@dataclass(frozen=True)
class Plant:
    """Displace ``behavior`` by a uniform shift on a fraction of days."""

    behavior: str
    rate: float
    shift_lo: int
    shift_hi: int


@dataclass(frozen=True)
class CohortSpec:
    patients: int
    weeks: int
    behaviors: tuple
    links: tuple = ()
    plants: tuple = ()
    label_drop_probability: float = 0.0
    start_day: int = 18093     # 2019-07-16
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "behaviors", tuple(self.behaviors))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "plants", tuple(self.plants))
        order = {t.name: i for i, t in enumerate(self.behaviors)}
        if len(order) != len(self.behaviors):
            raise ValueError("duplicate behavior template names")
        for link in self.links:
            if link.behavior not in order or link.anchor not in order:
                raise ValueError(f"link {link.behavior!r} <- {link.anchor!r} "
                                 "names an unknown behavior")
            if order[link.anchor] >= order[link.behavior]:
                # generation runs in template order, so the anchor's start
                # must exist by the time the dependent is placed
                raise ValueError(f"anchor {link.anchor!r} must be listed "
                                 f"before {link.behavior!r}")
        for plant in self.plants:
            if plant.behavior not in order:
                raise ValueError(f"plant targets unknown behavior {plant.behavior!r}")

    def to_dict(self) -> dict:
        return {
            "patients": self.patients,
            "weeks": self.weeks,
            "behaviors": [asdict(t) for t in self.behaviors],
            "links": [asdict(l) for l in self.links],
            "plants": [asdict(p) for p in self.plants],
            "label_drop_probability": self.label_drop_probability,
            "start_day": self.start_day,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CohortSpec":
        return cls(
            patients=int(data["patients"]),
            weeks=int(data["weeks"]),
            behaviors=tuple(BehaviorTemplate(**t) for t in data["behaviors"]),
            links=tuple(DependencyLink(**l) for l in data.get("links", [])),
            plants=tuple(Plant(**p) for p in data.get("plants", [])),
            label_drop_probability=float(data.get("label_drop_probability", 0.0)),
            start_day=int(data.get("start_day", 18093)),
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def from_file(cls, path) -> "CohortSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass(frozen=True)
class LedgerRecord:
    day: int               # absolute day number, start // 1440
    constraint_index: int  # position in the constraint list; tags can repeat
    verdict: str


@dataclass(frozen=True)
class SimulatedPatient:
    patient_id: str
    log: ActivityLog
    ledger: tuple


@dataclass(frozen=True)
class Cohort:
    spec: CohortSpec
    constraints: tuple
    patients: tuple

    def logs(self) -> list:
        return [p.log for p in self.patients]


def _truncated_normal(rng: np.random.Generator, sd: float) -> float:
    if sd <= 0:
        return 0.0
    while True:
        z = rng.normal(0.0, sd)
        if abs(z) <= 4.0 * sd:
            return z


def _simulate_patient(spec: CohortSpec, rng: np.random.Generator,
                      patient_id: str, constraints: Sequence[Constraint],
                      behaviors: tuple) -> SimulatedPatient:
    links = {l.behavior: l for l in spec.links}
    plants: dict = {}
    for plant in spec.plants:
        plants.setdefault(plant.behavior, []).append(plant)
    entries = []
    for day in range(spec.weeks * 7):
        base = (spec.start_day + day) * MINUTES_PER_DAY
        starts: dict = {}
        for template in spec.behaviors:
            if template.miss_probability > 0 and rng.random() < template.miss_probability:
                continue
            link = links.get(template.name)
            if link is not None and link.anchor in starts:
                start = (starts[link.anchor] + link.offset
                         + _truncated_normal(rng, link.jitter_sd))
            else:
                start = (base + template.clock
                         + _truncated_normal(rng, template.jitter_sd))
            for plant in plants.get(template.name, ()):
                if rng.random() < plant.rate:
                    start += int(rng.integers(plant.shift_lo, plant.shift_hi + 1))
            start = int(round(start))
            starts[template.name] = start
            if (spec.label_drop_probability > 0
                    and rng.random() < spec.label_drop_probability):
                continue
            entries.append(LogEntry(template.name, start,
                                    start + template.duration))
    log = ActivityLog(tuple(entries), patient_id, behaviors)
    return SimulatedPatient(patient_id, log, _build_ledger(log, constraints))


def simulate_cohort(spec: CohortSpec,
                    constraints: Sequence[Constraint] = ()) -> Cohort:
    """Generate every patient from an independently spawned seed stream."""
    behaviors = tuple(sorted(t.name for t in spec.behaviors))
    children = np.random.SeedSequence(spec.seed).spawn(spec.patients)
    width = len(str(max(spec.patients - 1, 1)))
    patients = tuple(
        _simulate_patient(spec, np.random.default_rng(child), f"p{i:0{width}d}",
                          constraints, behaviors)
        for i, child in enumerate(children))
    return Cohort(spec, tuple(constraints), patients)


# ---------------------------------------------------------------------------
# generation-time ledger
# ---------------------------------------------------------------------------

_TARGET = "take_medicine"
_TOLERANCE = 15


def _is_placement(constraint) -> bool:
    if isinstance(constraint, (Consistency, DefinitiveDependency,
                               ImpreciseDependency, TimeDependency, TimeOfDay)):
        return True
    if isinstance(constraint, Compound):
        return all(_is_placement(p) for p in constraint.parts)
    if isinstance(constraint, Negated):
        return _is_placement(constraint.inner)
    return False


def _circular(a: int, b: int) -> int:
    d = abs(a - b)
    return min(d, MINUTES_PER_DAY - d)


def _ledger_verdict(constraint, by_day: Mapping, day: int) -> str:
    """Straight-line restatement of the daily rules; no rule-engine imports."""
    events = by_day.get(day, {})
    med = events.get(_TARGET, ())
    if isinstance(constraint, Negated):
        if not med and _is_placement(constraint.inner):
            return "ok"
        flipped = _ledger_verdict(constraint.inner, by_day, day)
        return {"violation": "ok", "ok": "violation"}.get(flipped, flipped)
    if isinstance(constraint, Compound):
        parts = [_ledger_verdict(p, by_day, day) for p in constraint.parts]
        if "violation" in parts:
            return "violation"
        if "indeterminate" in parts:
            return "indeterminate"
        return "ok"
    if isinstance(constraint, Consistency):
        if not med:
            return "ok"
        if constraint.t == SAME_TIME:
            period = 7 if constraint.u == "week" else 1
            prev = by_day.get(day - period, {}).get(_TARGET, ())
            if not prev:
                return "indeterminate"
            expected = prev[0] % MINUTES_PER_DAY
        else:
            expected = constraint.t
        dist = _circular(med[0] % MINUTES_PER_DAY, expected)
        return "ok" if dist <= _TOLERANCE else "violation"
    if isinstance(constraint, DefinitiveDependency):
        if not med:
            return "ok"
        acts = events.get(constraint.act, ())
        if not acts:
            return "indeterminate"
        gap = constraint.n * _UNIT_MINUTES[constraint.u]
        for m in med:
            for a in acts:
                if constraint.dp == "before" and a - gap <= m < a:
                    return "violation"
                if constraint.dp == "after" and a < m <= a + gap:
                    return "violation"
        return "ok"
    if isinstance(constraint, ImpreciseDependency):
        if not med:
            return "ok"
        acts = events.get(constraint.act, ())
        if not acts:
            return "indeterminate"
        for m in med:
            if constraint.dp == "before" and not any(a > m for a in acts):
                return "violation"
            if constraint.dp == "after" and not any(a < m for a in acts):
                return "violation"
        return "ok"
    if isinstance(constraint, Frequency):
        if constraint.u != "day":
            raise ValueError("ledger only covers daily counts")
        return "ok" if len(med) == constraint.n else "violation"
    if isinstance(constraint, TimeDependency):
        for m in med:
            clock = m % MINUTES_PER_DAY
            if constraint.dp == "before" and clock > constraint.t:
                return "violation"
            if constraint.dp == "after" and clock < constraint.t:
                return "violation"
        return "ok"
    if isinstance(constraint, TimeOfDay):
        lo, hi = _DAYPARTS[constraint.d]
        for m in med:
            if not lo <= m % MINUTES_PER_DAY <= hi:
                return "violation"
        return "ok"
    raise ValueError(f"ledger does not cover {type(constraint).__name__}")


def _build_ledger(log: ActivityLog, constraints: Sequence[Constraint]) -> tuple:
    if not constraints or not log.entries:
        return ()
    by_day: dict = {}
    for e in log.entries:
        by_day.setdefault(e.start // MINUTES_PER_DAY, {}).setdefault(
            e.behavior, []).append(e.start)
    first = log.entries[0].start // MINUTES_PER_DAY
    last = log.span[1] // MINUTES_PER_DAY
    records = []
    for day in range(first, last + 1):
        for index, constraint in enumerate(constraints):
            records.append(LedgerRecord(
                day, index, _ledger_verdict(constraint, by_day, day)))
    return tuple(records)


def ledger_tag(constraint: Constraint) -> str:
    """The wire type tag the ledger's scores should be grouped by."""
    return to_record(constraint)["type"]
