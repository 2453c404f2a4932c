"""Checking behavior events against temporal medication constraints.

Every primitive takes concrete event times (integer minutes since the epoch
for instants, minutes past midnight for clocks) and returns one of three
verdicts: ``violation``, ``ok``, or ``indeterminate`` when the scope lacks
the context the rule needs (no reference time yet, dependency activity never
logged that day).  Verdict conventions:

* placement rules (dependencies, clock bounds, dayparts, consistency) are
  vacuously ``ok`` when the target behavior did not occur in the scope;
  count rules treat a missing dose as a countable miss,
* quantified dependencies mark a violation when a dose falls inside the
  forbidden gap on the stated side of any activity occurrence: within
  [activity - gap, activity) for ``before``, within (activity, activity +
  gap] for ``after``,
* bare dependencies ask for order only: ``before`` wants some activity
  occurrence after the dose, ``after`` wants some occurrence before it,
* compound constraints violate when any part violates, which makes a pair
  of quantified dependencies express alternatives like "two hours before or
  one hour after eating",
* negation swaps violation and ok; indeterminate stays indeterminate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from adherence.constraints import (
    Compound,
    Consistency,
    Constraint,
    DefinitiveDependency,
    Frequency,
    ImpreciseDependency,
    Interval,
    Negated,
    SAME_TIME,
    TimeDependency,
    TimeOfDay,
    duration_minutes,
)
from adherence.logs import MINUTES_PER_DAY, ActivityLog, clock_of

VIOLATION = "violation"
OK = "ok"
INDETERMINATE = "indeterminate"

VERDICTS = (VIOLATION, OK, INDETERMINATE)

# inclusive clock ranges, minutes past midnight
DEFAULT_DAYPARTS = {
    "morning": (300, 719),
    "noon": (720, 839),
    "evening": (1020, 1319),
}


class UnconfiguredDaypart(ValueError):
    """A time-of-day constraint names a daypart with no configured range."""


@dataclass(frozen=True)
class RuleConfig:
    target: str = "take_medicine"
    tolerance: int = 15  # minutes, for consistency checks
    dayparts: Mapping = field(default_factory=lambda: dict(DEFAULT_DAYPARTS))


def circular_clock_distance(a: int, b: int) -> int:
    """Shortest distance around the 24 hour clock, in minutes."""
    d = abs(a - b) % MINUTES_PER_DAY
    return min(d, MINUTES_PER_DAY - d)


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def check_consistency(constraint: Consistency, med_times: Sequence[int],
                      reference_clock: Optional[int] = None,
                      tolerance: int = 15) -> str:
    """Anchor dose within ``tolerance`` minutes of the expected clock.

    The anchor is the first dose in the scope.  A prescribed clock compares
    against the constraint itself; the same-time form compares against
    ``reference_clock`` (the anchor clock one period earlier) and is
    indeterminate without one.
    """
    if not med_times:
        return OK
    anchor = clock_of(med_times[0])
    if constraint.t == SAME_TIME:
        if reference_clock is None:
            return INDETERMINATE
        expected = reference_clock
    else:
        expected = constraint.t
    if circular_clock_distance(anchor, expected) <= tolerance:
        return OK
    return VIOLATION


def check_definitive_dependency(constraint: DefinitiveDependency,
                                med_times: Sequence[int],
                                activity_times: Sequence[int]) -> str:
    """No dose may fall inside the gap on the constraint's side of an activity."""
    if not med_times:
        return OK
    if not activity_times:
        return INDETERMINATE
    gap = constraint.gap_minutes
    for med in med_times:
        for act in activity_times:
            if constraint.dp == "before":
                if act - gap <= med < act:
                    return VIOLATION
            else:
                if act < med <= act + gap:
                    return VIOLATION
    return OK


def check_imprecise_dependency(constraint: ImpreciseDependency,
                               med_times: Sequence[int],
                               activity_times: Sequence[int]) -> str:
    """Every dose must have an activity occurrence on the stated side."""
    if not med_times:
        return OK
    if not activity_times:
        return INDETERMINATE
    for med in med_times:
        if constraint.dp == "before":
            satisfied = any(act > med for act in activity_times)
        else:
            satisfied = any(act < med for act in activity_times)
        if not satisfied:
            return VIOLATION
    return OK


def check_frequency(constraint: Frequency, count: int) -> str:
    """Exact count per period; both too few and too many violate."""
    return OK if count == constraint.n else VIOLATION


def check_interval(constraint: Interval, med_times: Sequence[int],
                   previous: Optional[int] = None) -> str:
    """Gap rules between consecutive doses.

    ``apart`` forbids consecutive gaps smaller than the span, ``within``
    forbids gaps larger than it.  ``previous`` is the last dose before the
    scope, so the gap across the scope boundary is judged too.  The ``for``
    form needs the whole series; see :func:`check_interval_span`.
    """
    if constraint.ip == "for":
        return check_interval_span(constraint, med_times)
    times = ([previous] if previous is not None else []) + list(med_times)
    span = constraint.span_minutes
    for earlier, later in zip(times, times[1:]):
        gap = later - earlier
        if constraint.ip == "apart" and gap < span:
            return VIOLATION
        if constraint.ip == "within" and gap > span:
            return VIOLATION
    return OK


def check_interval_span(constraint: Interval, med_times: Sequence[int]) -> str:
    """The ``for`` form: dosing must stretch over n - 1 full units."""
    needed = (constraint.n - 1) * duration_minutes(1, constraint.u)
    if not med_times:
        return VIOLATION if needed > 0 else OK
    return OK if med_times[-1] - med_times[0] >= needed else VIOLATION


def check_time_dependency(constraint: TimeDependency,
                          med_times: Sequence[int]) -> str:
    """Every dose clock on the stated side of the bound, boundary allowed."""
    for med in med_times:
        clock = clock_of(med)
        if constraint.dp == "before" and clock > constraint.t:
            return VIOLATION
        if constraint.dp == "after" and clock < constraint.t:
            return VIOLATION
    return OK


def check_time_of_day(constraint: TimeOfDay, med_times: Sequence[int],
                      dayparts: Mapping = None) -> str:
    """Every dose clock inside the constraint's daypart range, inclusive."""
    table = DEFAULT_DAYPARTS if dayparts is None else dayparts
    if constraint.d not in table:
        raise UnconfiguredDaypart(f"no clock range configured for {constraint.d!r}")
    lo, hi = table[constraint.d]
    for med in med_times:
        if not lo <= clock_of(med) <= hi:
            return VIOLATION
    return OK


_PLACEMENT_TYPES = (Consistency, DefinitiveDependency, ImpreciseDependency,
                    TimeDependency, TimeOfDay)


def is_placement(constraint: Constraint) -> bool:
    """True for rules that judge where doses sit, not how many there are."""
    if isinstance(constraint, _PLACEMENT_TYPES):
        return True
    if isinstance(constraint, Compound):
        return all(is_placement(p) for p in constraint.parts)
    if isinstance(constraint, Negated):
        return is_placement(constraint.inner)
    return False


def negate_verdict(verdict: str) -> str:
    if verdict == VIOLATION:
        return OK
    if verdict == OK:
        return VIOLATION
    return verdict


def combine_verdicts(verdicts: Sequence[str]) -> str:
    """Any violation wins; otherwise any indeterminate part blocks an ok."""
    if VIOLATION in verdicts:
        return VIOLATION
    if INDETERMINATE in verdicts:
        return INDETERMINATE
    return OK


# ---------------------------------------------------------------------------
# single-scope dispatch
# ---------------------------------------------------------------------------

def evaluate_constraint(constraint: Constraint, times: Mapping,
                        config: RuleConfig = RuleConfig(), *,
                        reference_clock: Optional[int] = None,
                        previous_dose: Optional[int] = None,
                        period_count: Optional[int] = None) -> str:
    """Evaluate one constraint against one scope of events.

    ``times`` maps behavior name to a sorted sequence of absolute minutes.
    Count rules use ``period_count`` when given, else the dose count in
    ``times``; the caller is responsible for handing in a scope that covers
    the constraint's period.
    """
    med = tuple(times.get(config.target, ()))
    if isinstance(constraint, Consistency):
        return check_consistency(constraint, med, reference_clock, config.tolerance)
    if isinstance(constraint, DefinitiveDependency):
        return check_definitive_dependency(constraint, med,
                                           tuple(times.get(constraint.act, ())))
    if isinstance(constraint, ImpreciseDependency):
        return check_imprecise_dependency(constraint, med,
                                          tuple(times.get(constraint.act, ())))
    if isinstance(constraint, Frequency):
        count = len(med) if period_count is None else period_count
        return check_frequency(constraint, count)
    if isinstance(constraint, Interval):
        return check_interval(constraint, med, previous_dose)
    if isinstance(constraint, TimeDependency):
        return check_time_dependency(constraint, med)
    if isinstance(constraint, TimeOfDay):
        return check_time_of_day(constraint, med, config.dayparts)
    if isinstance(constraint, Compound):
        return combine_verdicts([
            evaluate_constraint(part, times, config,
                                reference_clock=reference_clock,
                                previous_dose=previous_dose,
                                period_count=period_count)
            for part in constraint.parts])
    if isinstance(constraint, Negated):
        # an unviolated placement ban stays vacuously ok without a dose
        if not med and is_placement(constraint.inner):
            return OK
        return negate_verdict(
            evaluate_constraint(constraint.inner, times, config,
                                reference_clock=reference_clock,
                                previous_dose=previous_dose,
                                period_count=period_count))
    raise TypeError(f"cannot evaluate {type(constraint).__name__}")


# ---------------------------------------------------------------------------
# log driver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    constraint: Constraint
    day: int      # absolute day number (minutes // 1440) the verdict is for
    verdict: str


def _by_day(log: ActivityLog) -> dict:
    days: dict = {}
    for e in log.entries:
        days.setdefault(e.start // MINUTES_PER_DAY, {}).setdefault(
            e.behavior, []).append(e.start)
    return days


def _period_days(unit: str) -> Optional[int]:
    return {"day": 1, "week": 7}.get(unit)


def check_log(log: ActivityLog, constraints: Sequence[Constraint],
              config: RuleConfig = RuleConfig()) -> list:
    """Per-day verdicts for every constraint over a whole log.

    Daily placement rules get one verdict per calendar day.  Count rules
    cover their full period (days or complete weeks; other units come back
    indeterminate).  Gap rules judge each day using the last dose before it
    as the boundary reference; the duration form gets one verdict on the
    day of the first dose.
    """
    if not log.entries:
        return []
    by_day = _by_day(log)
    first_day = log.entries[0].start // MINUTES_PER_DAY
    last_day = log.span[1] // MINUTES_PER_DAY
    all_days = range(first_day, last_day + 1)
    doses = [e.start for e in log.occurrences(config.target)]
    results = []
    for constraint in constraints:
        results.extend(_check_one(constraint, by_day, all_days, doses, config))
    return results


def _first_dose_clock(day_events: Mapping, target: str) -> Optional[int]:
    times = day_events.get(target)
    return clock_of(times[0]) if times else None


def _check_one(constraint: Constraint, by_day: Mapping, all_days: range,
               doses: Sequence[int], config: RuleConfig) -> list:
    kind = constraint
    while isinstance(kind, Negated):
        kind = kind.inner
    if isinstance(kind, Frequency):
        period = _period_days(kind.u)
        if period is None:
            return [CheckResult(constraint, all_days.start, INDETERMINATE)]
        results = []
        for start in range(all_days.start, all_days.stop, period):
            if start + period > all_days.stop:
                break  # partial trailing period is not judgeable
            count = sum(len(by_day.get(d, {}).get(config.target, ()))
                        for d in range(start, start + period))
            verdict = check_frequency(kind, count)
            if isinstance(constraint, Negated):
                verdict = negate_verdict(verdict)
            results.append(CheckResult(constraint, start, verdict))
        return results
    if isinstance(kind, Interval) and kind.ip == "for":
        verdict = check_interval_span(kind, doses)
        if isinstance(constraint, Negated):
            verdict = negate_verdict(verdict)
        day = (doses[0] // MINUTES_PER_DAY) if doses else all_days.start
        return [CheckResult(constraint, day, verdict)]
    results = []
    for day in all_days:
        events = by_day.get(day, {})
        day_doses = events.get(config.target, ())
        previous = None
        if isinstance(kind, Interval):
            cutoff = day_doses[0] if day_doses else day * MINUTES_PER_DAY
            earlier = [t for t in doses if t < cutoff]
            previous = earlier[-1] if earlier else None
        reference = None
        if isinstance(kind, Consistency) and kind.t == SAME_TIME:
            period = _period_days(kind.u) or 1
            reference = _first_dose_clock(by_day.get(day - period, {}),
                                          config.target)
        results.append(CheckResult(
            constraint, day,
            evaluate_constraint(constraint, events, config,
                                reference_clock=reference,
                                previous_dose=previous)))
    return results


# ---------------------------------------------------------------------------
# checking predicted instants
# ---------------------------------------------------------------------------

def check_instant(constraints: Sequence[Constraint], med_at: float,
                  activities: Mapping, config: RuleConfig = RuleConfig(), *,
                  reference_clock: Optional[int] = None,
                  previous_dose: Optional[int] = None) -> list:
    """Judge one (possibly predicted) dose instant against each constraint.

    ``activities`` maps behavior to occurrence times around the instant,
    normally the actual logged events of the same day.  Count rules cannot
    be judged from a single instant and come back indeterminate.
    """
    times = {b: tuple(v) for b, v in activities.items()}
    times[config.target] = (int(round(med_at)),)
    verdicts = []
    for constraint in constraints:
        kind = constraint
        while isinstance(kind, Negated):
            kind = kind.inner
        if isinstance(kind, Frequency):
            verdicts.append(INDETERMINATE)
            continue
        verdicts.append(evaluate_constraint(
            constraint, times, config, reference_clock=reference_clock,
            previous_dose=previous_dose))
    return verdicts


# ---------------------------------------------------------------------------
# scoring predictions against ground truth
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeScore:
    tag: str
    precision: float
    recall: float
    f1: float
    support: int      # true violations among the pairs scored
    evaluated: int
    excluded: int


@dataclass(frozen=True)
class ViolationReport:
    per_type: tuple
    weighted_precision: float
    weighted_recall: float
    f1: float
    evaluated: int
    excluded: int

    @property
    def total(self) -> int:
        return self.evaluated + self.excluded

    def as_text(self) -> str:
        lines = [f"{'type':<10}{'precision':>10}{'recall':>10}{'f1':>10}"
                 f"{'support':>9}{'excluded':>9}"]
        for s in self.per_type:
            lines.append(f"{s.tag:<10}{s.precision:>10.3f}{s.recall:>10.3f}"
                         f"{s.f1:>10.3f}{s.support:>9}{s.excluded:>9}")
        lines.append(f"{'weighted':<10}{self.weighted_precision:>10.3f}"
                     f"{self.weighted_recall:>10.3f}{self.f1:>10.3f}"
                     f"{sum(s.support for s in self.per_type):>9}"
                     f"{self.excluded:>9}")
        return "\n".join(lines)


def _harmonic(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def evaluate_violations(pairs: Sequence[tuple]) -> ViolationReport:
    """Score predicted verdicts against true ones, per constraint type.

    ``pairs`` holds (tag, predicted, actual) triples.  A pair where either
    side is indeterminate is excluded from scoring but counted, so
    evaluated + excluded equals the number of pairs given.  Violation is
    the positive class.  The weighted averages weight each type by its true
    violation count, and the summary f1 is the harmonic mean of weighted
    precision and weighted recall.
    """
    counts: dict = {}
    excluded_by: dict = {}
    for tag, predicted, actual in pairs:
        if predicted == INDETERMINATE or actual == INDETERMINATE:
            excluded_by[tag] = excluded_by.get(tag, 0) + 1
            counts.setdefault(tag, [0, 0, 0, 0])
            continue
        row = counts.setdefault(tag, [0, 0, 0, 0])
        row[3] += 1
        if predicted == VIOLATION and actual == VIOLATION:
            row[0] += 1
        elif predicted == VIOLATION:
            row[1] += 1
        elif actual == VIOLATION:
            row[2] += 1
    scores = []
    for tag in sorted(counts):
        tp, fp, fn, n = counts[tag]
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        scores.append(TypeScore(tag, p, r, _harmonic(p, r), tp + fn, n,
                                excluded_by.get(tag, 0)))
    weight = sum(s.support for s in scores)
    if weight:
        wp = sum(s.precision * s.support for s in scores) / weight
        wr = sum(s.recall * s.support for s in scores) / weight
    else:
        wp = wr = 0.0
    return ViolationReport(tuple(scores), wp, wr, _harmonic(wp, wr),
                           sum(s.evaluated for s in scores),
                           sum(s.excluded for s in scores))
