"""Straight-line inequality re-statements of the violation rules.

Written separately from the package so the test suite can cross-check the
rule engine against an independent reading of the same conventions.  Only
plain arithmetic on minutes here, no package helpers.
"""

DAY = 1440
UNIT_MINUTES = {"minute": 1, "hour": 60, "day": 1440, "week": 10080}


def oracle_single_dose(constraint, med, acts, ref_clock, tol, dayparts):
    """Verdict for one dose instant, given activity times of its scope."""
    kind = type(constraint).__name__
    if kind == "Negated":
        inner = oracle_single_dose(constraint.inner, med, acts, ref_clock,
                                   tol, dayparts)
        return {"violation": "ok", "ok": "violation"}.get(inner, inner)
    if kind == "Compound":
        parts = [oracle_single_dose(p, med, acts, ref_clock, tol, dayparts)
                 for p in constraint.parts]
        if "violation" in parts:
            return "violation"
        if "indeterminate" in parts:
            return "indeterminate"
        return "ok"
    clock = med % DAY
    if kind == "Consistency":
        expected = ref_clock if constraint.t == "same_time" else constraint.t
        if expected is None:
            return "indeterminate"
        dist = abs(clock - expected)
        if dist > DAY // 2:
            dist = DAY - dist
        return "ok" if dist <= tol else "violation"
    if kind == "DefinitiveDependency":
        if not acts:
            return "indeterminate"
        gap = constraint.n * UNIT_MINUTES[constraint.u]
        for act in acts:
            if constraint.dp == "before" and act - gap <= med < act:
                return "violation"
            if constraint.dp == "after" and act < med <= act + gap:
                return "violation"
        return "ok"
    if kind == "ImpreciseDependency":
        if not acts:
            return "indeterminate"
        if constraint.dp == "before":
            return "ok" if max(acts) > med else "violation"
        return "ok" if min(acts) < med else "violation"
    if kind == "TimeDependency":
        if constraint.dp == "before":
            return "ok" if clock <= constraint.t else "violation"
        return "ok" if clock >= constraint.t else "violation"
    if kind == "TimeOfDay":
        lo, hi = dayparts[constraint.d]
        return "ok" if lo <= clock <= hi else "violation"
    raise TypeError(kind)


def oracle_frequency(n, count):
    return "ok" if count == n else "violation"


def oracle_gaps(ip, span, times):
    """Apart and within forms over an already-assembled dose sequence."""
    for a, b in zip(times, times[1:]):
        if ip == "apart" and b - a < span:
            return "violation"
        if ip == "within" and b - a > span:
            return "violation"
    return "ok"


def oracle_span(n, unit, times):
    needed = (n - 1) * UNIT_MINUTES[unit]
    if not times:
        return "violation" if needed > 0 else "ok"
    return "ok" if times[-1] - times[0] >= needed else "violation"
