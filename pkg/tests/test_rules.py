import pytest

from adherence.constraints import (
    Compound,
    Consistency,
    DefinitiveDependency,
    Frequency,
    ImpreciseDependency,
    Interval,
    Negated,
    SAME_TIME,
    TimeDependency,
    TimeOfDay,
)
from adherence.logs import ActivityLog, LogEntry, MINUTES_PER_DAY
from adherence.rules import (
    INDETERMINATE,
    OK,
    VIOLATION,
    CheckResult,
    RuleConfig,
    UnconfiguredDaypart,
    check_consistency,
    check_definitive_dependency,
    check_frequency,
    check_imprecise_dependency,
    check_instant,
    check_interval,
    check_interval_span,
    check_log,
    check_time_dependency,
    check_time_of_day,
    circular_clock_distance,
    combine_verdicts,
    evaluate_constraint,
    evaluate_violations,
    negate_verdict,
)
from rules_oracle import (
    oracle_frequency,
    oracle_gaps,
    oracle_single_dose,
    oracle_span,
)

D = MINUTES_PER_DAY


def test_circular_clock_distance():
    assert circular_clock_distance(60, 90) == 30
    assert circular_clock_distance(1430, 10) == 20
    assert circular_clock_distance(0, 720) == 720
    assert circular_clock_distance(300, 300) == 0


# ---------------------------------------------------------------------------
# consistency
# ---------------------------------------------------------------------------

def test_consistency_against_prescribed_clock():
    c = Consistency("at", 540, "day")
    assert check_consistency(c, [D + 545]) == OK
    assert check_consistency(c, [D + 555]) == OK        # boundary, 15 min
    assert check_consistency(c, [D + 556]) == VIOLATION
    assert check_consistency(c, []) == OK


def test_consistency_wraps_midnight():
    c = Consistency("at", 5, "day")
    assert check_consistency(c, [3 * D + 1435]) == OK   # 23:55 vs 00:05


def test_consistency_same_time_needs_reference():
    c = Consistency("at", SAME_TIME, "day")
    assert check_consistency(c, [D + 540]) == INDETERMINATE
    assert check_consistency(c, [D + 540], reference_clock=550) == OK
    assert check_consistency(c, [D + 540], reference_clock=556) == VIOLATION


def test_consistency_anchors_on_first_dose():
    c = Consistency("at", 540, "day")
    assert check_consistency(c, [D + 540, D + 1260]) == OK


# ---------------------------------------------------------------------------
# dependencies
# ---------------------------------------------------------------------------

def test_definitive_dependency_before_zone():
    c = DefinitiveDependency(2, "hour", "before", "eating")
    act = [D + 720]
    assert check_definitive_dependency(c, [D + 660], act) == VIOLATION
    assert check_definitive_dependency(c, [D + 600], act) == VIOLATION  # inclusive edge
    assert check_definitive_dependency(c, [D + 599], act) == OK
    assert check_definitive_dependency(c, [D + 720], act) == OK   # at the meal
    assert check_definitive_dependency(c, [D + 800], act) == OK   # after it
    assert check_definitive_dependency(c, [], act) == OK
    assert check_definitive_dependency(c, [D + 660], []) == INDETERMINATE


def test_definitive_dependency_after_zone():
    c = DefinitiveDependency(1, "hour", "after", "eating")
    act = [D + 720]
    assert check_definitive_dependency(c, [D + 750], act) == VIOLATION
    assert check_definitive_dependency(c, [D + 780], act) == VIOLATION  # inclusive edge
    assert check_definitive_dependency(c, [D + 781], act) == OK
    assert check_definitive_dependency(c, [D + 720], act) == OK
    assert check_definitive_dependency(c, [D + 700], act) == OK


def test_definitive_dependency_any_activity_counts():
    c = DefinitiveDependency(2, "hour", "before", "eating")
    assert check_definitive_dependency(c, [D + 660], [D + 300, D + 720]) == VIOLATION


def test_empty_stomach_compound():
    empty_stomach = Compound((
        DefinitiveDependency(2, "hour", "before", "eating"),
        DefinitiveDependency(1, "hour", "after", "eating"),
    ))
    times = {"eating": (D + 720,)}

    def verdict(med):
        return evaluate_constraint(empty_stomach, {**times, "take_medicine": (med,)})

    assert verdict(D + 400) == OK          # long before the meal
    assert verdict(D + 660) == VIOLATION   # one hour before
    assert verdict(D + 750) == VIOLATION   # 30 minutes after
    assert verdict(D + 810) == OK          # 90 minutes after


def test_imprecise_dependency():
    c = ImpreciseDependency("before", "exercise")
    assert check_imprecise_dependency(c, [D + 300], [D + 400]) == OK
    assert check_imprecise_dependency(c, [D + 500], [D + 400]) == VIOLATION
    assert check_imprecise_dependency(c, [D + 400], [D + 400]) == VIOLATION  # ties fail strict order
    assert check_imprecise_dependency(c, [D + 300], []) == INDETERMINATE
    assert check_imprecise_dependency(c, [], []) == OK
    after = ImpreciseDependency("after", "eating")
    assert check_imprecise_dependency(after, [D + 500], [D + 400]) == OK
    assert check_imprecise_dependency(after, [D + 300], [D + 400]) == VIOLATION


def test_negated_dependency_flips():
    banned = Negated(ImpreciseDependency("before", "exercise"))
    times = {"exercise": (D + 600,)}
    assert evaluate_constraint(banned, {**times, "take_medicine": (D + 500,)}) == VIOLATION
    assert evaluate_constraint(banned, {**times, "take_medicine": (D + 700,)}) == OK
    assert evaluate_constraint(banned, {"take_medicine": (D + 500,)}) == INDETERMINATE


def test_negated_placement_stays_vacuous_without_a_dose():
    banned = Negated(ImpreciseDependency("before", "exercise"))
    assert evaluate_constraint(banned, {"exercise": (D + 600,)}) == OK
    assert evaluate_constraint(banned, {}) == OK


# ---------------------------------------------------------------------------
# counts, gaps, clock bounds, dayparts
# ---------------------------------------------------------------------------

def test_frequency_counts():
    c = Frequency(2, "day")
    assert check_frequency(c, 2) == OK
    assert check_frequency(c, 1) == VIOLATION
    assert check_frequency(c, 3) == VIOLATION
    assert check_frequency(c, 0) == VIOLATION


def test_interval_apart_and_within():
    apart = Interval(12, "hour", "apart")
    assert check_interval(apart, [D, D + 719]) == VIOLATION
    assert check_interval(apart, [D, D + 720]) == OK
    assert check_interval(apart, [D + 400], previous=D - 100) == VIOLATION
    assert check_interval(apart, [D + 400]) == OK
    within = Interval(24, "hour", "within")
    assert check_interval(within, [D, D + 1441]) == VIOLATION
    assert check_interval(within, [D, D + 1440]) == OK
    assert check_interval(within, [2 * D + 100], previous=100) == VIOLATION


def test_interval_for_span():
    c = Interval(10, "day", "for")
    doses = [k * D + 540 for k in range(10)]
    assert check_interval_span(c, doses) == OK          # spans 9 full days
    assert check_interval_span(c, doses[:9]) == VIOLATION
    assert check_interval_span(c, []) == VIOLATION
    assert check_interval(c, doses) == OK               # dispatches by form


def test_time_dependency_bounds():
    before = TimeDependency("before", 1320)
    assert check_time_dependency(before, [D + 1320]) == OK
    assert check_time_dependency(before, [D + 1321]) == VIOLATION
    after = TimeDependency("after", 420)
    assert check_time_dependency(after, [D + 420]) == OK
    assert check_time_dependency(after, [D + 419]) == VIOLATION
    assert check_time_dependency(after, []) == OK
    assert check_time_dependency(before, [D + 500, D + 1400]) == VIOLATION


def test_time_of_day_ranges():
    morning = TimeOfDay("in", "morning")
    assert check_time_of_day(morning, [D + 300]) == OK
    assert check_time_of_day(morning, [D + 719]) == OK
    assert check_time_of_day(morning, [D + 299]) == VIOLATION
    assert check_time_of_day(morning, [D + 720]) == VIOLATION
    noon = TimeOfDay("at", "noon")
    assert check_time_of_day(noon, [D + 720]) == OK
    assert check_time_of_day(noon, [D + 840]) == VIOLATION
    with pytest.raises(UnconfiguredDaypart):
        check_time_of_day(morning, [D + 400], dayparts={"noon": (720, 839)})


def test_verdict_algebra():
    assert negate_verdict(OK) == VIOLATION
    assert negate_verdict(VIOLATION) == OK
    assert negate_verdict(INDETERMINATE) == INDETERMINATE
    assert combine_verdicts([OK, OK]) == OK
    assert combine_verdicts([OK, VIOLATION, INDETERMINATE]) == VIOLATION
    assert combine_verdicts([OK, INDETERMINATE]) == INDETERMINATE
    assert combine_verdicts([]) == OK


def test_evaluate_constraint_rejects_unknown():
    with pytest.raises(TypeError):
        evaluate_constraint(object(), {})


# ---------------------------------------------------------------------------
# grid sweep against the independent oracle
# ---------------------------------------------------------------------------

SWEEP_CONSTRAINTS = [
    DefinitiveDependency(2, "hour", "before", "eating"),
    DefinitiveDependency(1, "hour", "after", "eating"),
    DefinitiveDependency(30, "minute", "before", "eating"),
    ImpreciseDependency("before", "eating"),
    ImpreciseDependency("after", "eating"),
    Negated(ImpreciseDependency("before", "eating")),
    TimeDependency("before", 1320),
    TimeDependency("after", 420),
    Consistency("at", 540, "day"),
    Consistency("at", SAME_TIME, "day"),
    TimeOfDay("in", "morning"),
    TimeOfDay("at", "noon"),
    TimeOfDay("in", "evening"),
    Compound((DefinitiveDependency(2, "hour", "before", "eating"),
              DefinitiveDependency(1, "hour", "after", "eating"))),
]


def test_engine_matches_oracle_on_grid():
    config = RuleConfig()
    acts = [720, D + 480]
    ref = 550
    for med in range(0, 2 * D, 30):
        times = {"take_medicine": (med,), "eating": tuple(acts)}
        for constraint in SWEEP_CONSTRAINTS:
            got = evaluate_constraint(constraint, times, config,
                                      reference_clock=ref)
            want = oracle_single_dose(constraint, med, acts, ref,
                                      config.tolerance, config.dayparts)
            assert got == want, (constraint, med, got, want)


def test_engine_matches_oracle_on_counts_and_gaps():
    freq = Frequency(2, "day")
    for count in range(5):
        assert check_frequency(freq, count) == oracle_frequency(2, count)
    apart = Interval(12, "hour", "apart")
    within = Interval(24, "hour", "within")
    for gap in range(0, 2 * D, 37):
        times = [D, D + gap]
        assert check_interval(apart, times) == oracle_gaps("apart", 720, times)
        assert check_interval(within, times) == oracle_gaps("within", 1440, times)
    span = Interval(5, "day", "for")
    for days in range(8):
        times = [k * D for k in range(days)]
        assert check_interval_span(span, times) == oracle_span(5, "day", times)


# ---------------------------------------------------------------------------
# log driver
# ---------------------------------------------------------------------------

def _med_log(clocks_by_day, extra=()):
    entries = []
    for day, clocks in enumerate(clocks_by_day):
        for c in clocks:
            entries.append(LogEntry("take_medicine", day * D + c, day * D + c + 1))
    entries += [LogEntry(b, s, e) for b, s, e in extra]
    return ActivityLog(tuple(entries))


def test_check_log_same_time_day_by_day():
    log = _med_log([[540], [660], [540]])
    results = check_log(log, [Consistency("at", SAME_TIME, "day")])
    assert [r.verdict for r in results] == [INDETERMINATE, VIOLATION, VIOLATION]
    assert [r.day for r in results] == [0, 1, 2]


def test_check_log_prescribed_clock():
    log = _med_log([[540], [660], [545]])
    results = check_log(log, [Consistency("at", 540, "day")])
    assert [r.verdict for r in results] == [OK, VIOLATION, OK]


def test_check_log_daily_frequency():
    log = _med_log([[540], [540, 1260], [540]])
    results = check_log(log, [Frequency(1, "day")])
    assert [r.verdict for r in results] == [OK, VIOLATION, OK]
    results = check_log(log, [Frequency(2, "day")])
    assert [r.verdict for r in results] == [VIOLATION, OK, VIOLATION]


def test_check_log_weekly_frequency_complete_blocks_only():
    log = _med_log([[540]] * 10)
    results = check_log(log, [Frequency(7, "week")])
    assert len(results) == 1
    assert results[0].day == 0
    assert results[0].verdict == OK


def test_check_log_hourly_frequency_indeterminate():
    log = _med_log([[540]])
    results = check_log(log, [Frequency(2, "hour")])
    assert [r.verdict for r in results] == [INDETERMINATE]


def test_check_log_gap_across_midnight():
    log = _med_log([[1380], [360, 1380]])  # 23:00 then 06:00, 7 hours apart
    results = check_log(log, [Interval(8, "hour", "apart")])
    assert [(r.day, r.verdict) for r in results] == [(0, OK), (1, VIOLATION)]


def test_check_log_for_duration_single_row():
    log = _med_log([[540]] * 4)
    results = check_log(log, [Interval(10, "day", "for")])
    assert len(results) == 1
    assert results[0].verdict == VIOLATION


def test_check_log_dependency_daily():
    log = _med_log([[660], [400]],
                   extra=(("eating", 720, 750), ("eating", D + 720, D + 750)))
    results = check_log(log, [DefinitiveDependency(2, "hour", "before", "eating")])
    assert [r.verdict for r in results] == [VIOLATION, OK]


def test_check_log_covers_emptier_days():
    log = _med_log([[540], [], [540]])
    results = check_log(log, [TimeOfDay("in", "morning")])
    assert [r.verdict for r in results] == [OK, OK, OK]
    assert len(results) == 3


def test_check_log_empty():
    assert check_log(ActivityLog(()), [Frequency(1, "day")]) == []


# ---------------------------------------------------------------------------
# instant checks
# ---------------------------------------------------------------------------

def test_check_instant_mixed_constraints():
    constraints = [
        TimeOfDay("in", "morning"),
        DefinitiveDependency(2, "hour", "before", "eating"),
        Frequency(2, "day"),
    ]
    verdicts = check_instant(constraints, 10 * D + 400, {"eating": (10 * D + 450,)})
    assert verdicts == [OK, VIOLATION, INDETERMINATE]


def test_check_instant_rounds_fractional_minutes():
    verdicts = check_instant([TimeDependency("before", 400)], 10 * D + 399.6, {})
    assert verdicts == [OK]


# ---------------------------------------------------------------------------
# scoring
# ---------------------------------------------------------------------------

def test_evaluate_violations_perfect_agreement():
    pairs = [("V6", VIOLATION, VIOLATION)] * 4 + [("V6", OK, OK)] * 6 + \
            [("V1", VIOLATION, VIOLATION)] * 2 + [("V1", OK, OK)] * 3
    report = evaluate_violations(pairs)
    assert report.weighted_precision == 1.0
    assert report.weighted_recall == 1.0
    assert report.f1 == 1.0
    for score in report.per_type:
        assert score.precision == score.recall == score.f1 == 1.0
    assert report.evaluated == 15
    assert report.excluded == 0


def test_evaluate_violations_hand_computed():
    pairs = [
        ("A", VIOLATION, VIOLATION), ("A", VIOLATION, OK),
        ("B", VIOLATION, VIOLATION), ("B", OK, VIOLATION), ("B", OK, OK),
    ]
    report = evaluate_violations(pairs)
    a = next(s for s in report.per_type if s.tag == "A")
    b = next(s for s in report.per_type if s.tag == "B")
    assert (a.precision, a.recall) == (0.5, 1.0)
    assert (b.precision, b.recall) == (1.0, 0.5)
    assert a.support == 1 and b.support == 2
    wp = (0.5 * 1 + 1.0 * 2) / 3
    wr = (1.0 * 1 + 0.5 * 2) / 3
    assert report.weighted_precision == pytest.approx(wp)
    assert report.weighted_recall == pytest.approx(wr)
    assert report.f1 == pytest.approx(2 * wp * wr / (wp + wr))


def test_evaluate_violations_excludes_indeterminate_with_accounting():
    pairs = [
        ("V6", VIOLATION, VIOLATION),
        ("V6", INDETERMINATE, VIOLATION),
        ("V6", OK, INDETERMINATE),
        ("V1", OK, OK),
    ]
    report = evaluate_violations(pairs)
    assert report.evaluated == 2
    assert report.excluded == 2
    assert report.total == len(pairs)
    v6 = next(s for s in report.per_type if s.tag == "V6")
    assert v6.excluded == 2 and v6.evaluated == 1


def test_violation_report_renders():
    pairs = [("V6", VIOLATION, VIOLATION), ("V6", OK, OK)]
    text = evaluate_violations(pairs).as_text()
    assert "V6" in text and "weighted" in text
