"""Structured timing constraints on daily health behaviors.

A constraint captures one timing rule from a drug-usage guideline, such as
"take 2 hours before eating", "take 3 times a day", or "take at the same
time each day".  Seven atomic forms cover gaps relative to another behavior,
frequencies, spacing intervals, bare before/after orderings, clock-time
bounds, day-to-day consistency, and time-of-day placement.  Constraints can
be grouped (several rules stated together) or negated ("do not take before
exercise").

Clock times are stored as minutes past midnight; the distinguished value
``SAME_TIME`` stands for "the same time" in consistency rules.  Records are
serialized one JSON object per line with a ``type`` tag of ``V1``..``V7``,
``COMPOUND``, or ``NEGATED``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

TIME_UNITS = ("minute", "hour", "day", "week")
MINUTES_PER_UNIT = {"minute": 1, "hour": 60, "day": 1440, "week": 10080}
DEPENDENCY_PREPOSITIONS = ("before", "after")
INTERVAL_PREPOSITIONS = ("within", "for", "apart")
OCCURRENCE_PREPOSITIONS = ("at", "in")
DAYPARTS = ("morning", "noon", "evening")

#: Sentinel clock value for "the same time" (as in "at the same time each day").
SAME_TIME = "same_time"

MINUTES_PER_DAY = 1440


class UnknownActivity(ValueError):
    """An activity name is not in the vocabulary and strict mode is on."""


class MalformedRecord(ValueError):
    """A serialized constraint record could not be parsed.

    ``position`` is a (line, column) pair when known, else None.
    """

    def __init__(self, message: str, position: tuple[int, int] | None = None):
        super().__init__(message if position is None
                         else f"{message} (line {position[0]}, column {position[1]})")
        self.position = position


def parse_clock(text: str) -> int:
    """Parse 'HH:MM' into minutes past midnight; passes SAME_TIME through."""
    if text == SAME_TIME:
        return SAME_TIME  # type: ignore[return-value]
    m = re.fullmatch(r"(\d{1,2}):(\d{2})", text)
    if not m:
        raise ValueError(f"bad clock time {text!r}, expected HH:MM or {SAME_TIME!r}")
    hours, minutes = int(m.group(1)), int(m.group(2))
    if hours >= 24 or minutes >= 60:
        raise ValueError(f"clock time out of range: {text!r}")
    return hours * 60 + minutes


def format_clock(value) -> str:
    """Render minutes past midnight as 'HH:MM'; passes SAME_TIME through."""
    if value == SAME_TIME:
        return SAME_TIME
    return f"{value // 60:02d}:{value % 60:02d}"


def _check_clock_value(value, allow_same_time: bool) -> None:
    if value == SAME_TIME:
        if not allow_same_time:
            raise ValueError(f"{SAME_TIME!r} not allowed here")
        return
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"clock value must be int minutes past midnight, got {value!r}")
    if not 0 <= value < MINUTES_PER_DAY:
        raise ValueError(f"clock value out of range: {value}")


def _check_count(n) -> None:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError(f"count must be a natural number >= 1, got {n!r}")


def _check_member(value, allowed: tuple, what: str) -> None:
    if value not in allowed:
        raise ValueError(f"{what} must be one of {allowed}, got {value!r}")


def duration_minutes(n: int, u: str) -> int:
    """Total minutes in n units of u, e.g. (2, 'hour') -> 120."""
    _check_count(n)
    _check_member(u, TIME_UNITS, "unit")
    return n * MINUTES_PER_UNIT[u]


# ---------------------------------------------------------------------------
# Constraint variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DefinitiveDependency:
    """A quantified gap relative to another behavior: "2 hours before eating".

    Wire tag V1.  ``n`` units of ``u`` define the gap, ``dp`` gives the
    direction, ``act`` names the reference behavior.
    """

    n: int
    u: str
    dp: str
    act: str

    def __post_init__(self):
        _check_count(self.n)
        _check_member(self.u, TIME_UNITS, "unit")
        _check_member(self.dp, DEPENDENCY_PREPOSITIONS, "direction")
        if not isinstance(self.act, str) or not self.act.strip():
            raise ValueError("activity name must be a non-empty string")

    @property
    def gap_minutes(self) -> int:
        return duration_minutes(self.n, self.u)


@dataclass(frozen=True)
class Frequency:
    """How many times per unit period: "3 times a day".  Wire tag V2."""

    n: int
    u: str

    def __post_init__(self):
        _check_count(self.n)
        _check_member(self.u, TIME_UNITS, "unit")


@dataclass(frozen=True)
class Interval:
    """Spacing between occurrences: "4 hours apart", "within 2 hours".

    Wire tag V3.  ``ip`` is the interval preposition (within / for / apart).
    """

    n: int
    u: str
    ip: str

    def __post_init__(self):
        _check_count(self.n)
        _check_member(self.u, TIME_UNITS, "unit")
        _check_member(self.ip, INTERVAL_PREPOSITIONS, "interval preposition")

    @property
    def span_minutes(self) -> int:
        return duration_minutes(self.n, self.u)


@dataclass(frozen=True)
class ImpreciseDependency:
    """An unquantified ordering against another behavior: "after eating".

    Wire tag V4.
    """

    dp: str
    act: str

    def __post_init__(self):
        _check_member(self.dp, DEPENDENCY_PREPOSITIONS, "direction")
        if not isinstance(self.act, str) or not self.act.strip():
            raise ValueError("activity name must be a non-empty string")


@dataclass(frozen=True)
class TimeDependency:
    """An ordering against a clock time: "before 9:00".  Wire tag V5."""

    dp: str
    t: object  # minutes past midnight, or SAME_TIME

    def __post_init__(self):
        _check_member(self.dp, DEPENDENCY_PREPOSITIONS, "direction")
        _check_clock_value(self.t, allow_same_time=True)


@dataclass(frozen=True)
class Consistency:
    """Same clock time every period: "at the same time each day".

    Wire tag V6.  ``t`` is either a concrete clock time or SAME_TIME.
    """

    p: str
    t: object
    u: str

    def __post_init__(self):
        _check_member(self.p, OCCURRENCE_PREPOSITIONS, "preposition")
        _check_clock_value(self.t, allow_same_time=True)
        _check_member(self.u, TIME_UNITS, "unit")


@dataclass(frozen=True)
class TimeOfDay:
    """Placement within a named part of the day: "in the morning".  Wire tag V7."""

    p: str
    d: str

    def __post_init__(self):
        _check_member(self.p, OCCURRENCE_PREPOSITIONS, "preposition")
        _check_member(self.d, DAYPARTS, "daypart")


@dataclass(frozen=True)
class Compound:
    """Several constraints stated together.  Canonical form is flat, sorted,
    and at least two parts long; raw values may be nested or shorter until
    they pass through :func:`canonicalize`.
    """

    parts: tuple

    def __post_init__(self):
        if not isinstance(self.parts, tuple):
            object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 1:
            raise ValueError("compound constraint needs at least one part")
        for p in self.parts:
            if not isinstance(p, CONSTRAINT_TYPES):
                raise ValueError(f"compound part is not a constraint: {p!r}")


@dataclass(frozen=True)
class Negated:
    """A prohibited constraint: "do not take before exercise"."""

    inner: object

    def __post_init__(self):
        if not isinstance(self.inner, CONSTRAINT_TYPES):
            raise ValueError(f"negated value is not a constraint: {self.inner!r}")


CONSTRAINT_TYPES = (
    DefinitiveDependency, Frequency, Interval, ImpreciseDependency,
    TimeDependency, Consistency, TimeOfDay, Compound, Negated,
)

Constraint = Union[
    DefinitiveDependency, Frequency, Interval, ImpreciseDependency,
    TimeDependency, Consistency, TimeOfDay, Compound, Negated,
]

_WIRE_TAGS = {
    DefinitiveDependency: "V1",
    Frequency: "V2",
    Interval: "V3",
    ImpreciseDependency: "V4",
    TimeDependency: "V5",
    Consistency: "V6",
    TimeOfDay: "V7",
    Compound: "COMPOUND",
    Negated: "NEGATED",
}


# ---------------------------------------------------------------------------
# Activity vocabulary
# ---------------------------------------------------------------------------

def _normalize_surface(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip().lower())


@dataclass(frozen=True)
class ActivityVocabulary:
    """Canonical activity names plus a surface-form synonym map.

    Lookup is case-insensitive and whitespace-normalized.  Every synonym must
    map to a canonical name.
    """

    canonical: frozenset
    synonyms: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "canonical", frozenset(_normalize_surface(c)
                                                        for c in self.canonical))
        cleaned = {}
        for surface, target in self.synonyms.items():
            surface_n, target_n = _normalize_surface(surface), _normalize_surface(target)
            if target_n not in self.canonical:
                raise ValueError(f"synonym target {target!r} is not canonical")
            cleaned[surface_n] = target_n
        object.__setattr__(self, "synonyms", cleaned)

    def normalize(self, name: str, strict: bool = True) -> str:
        """Map a surface form to its canonical activity name.

        Unknown names raise :class:`UnknownActivity` when strict, otherwise
        they are returned lowercased and whitespace-normalized.
        """
        key = _normalize_surface(name)
        if key in self.canonical:
            return key
        if key in self.synonyms:
            return self.synonyms[key]
        if strict:
            raise UnknownActivity(f"unknown activity {name!r}")
        return key

    def __contains__(self, name: str) -> bool:
        key = _normalize_surface(name)
        return key in self.canonical or key in self.synonyms

    def surface_forms(self) -> list[tuple[str, str]]:
        """All (surface, canonical) pairs, longest surface first, then alphabetical.

        The ordering matters to the extraction matcher: longer forms must win
        when two surfaces start at the same position.
        """
        pairs = [(c, c) for c in self.canonical]
        pairs += list(self.synonyms.items())
        pairs.sort(key=lambda sc: (-len(sc[0]), sc[0]))
        return pairs

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[str]]) -> "ActivityVocabulary":
        """Build from {canonical: [synonym, ...]}."""
        synonyms = {}
        for canonical, forms in mapping.items():
            for form in forms:
                synonyms[form] = canonical
        return cls(canonical=frozenset(mapping), synonyms=synonyms)

    @classmethod
    def from_file(cls, path) -> "ActivityVocabulary":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_mapping(data)

    def to_file(self, path) -> None:
        grouped: dict[str, list[str]] = {c: [] for c in sorted(self.canonical)}
        for surface in sorted(self.synonyms):
            grouped[self.synonyms[surface]].append(surface)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(grouped, fh, indent=2, sort_keys=True)
            fh.write("\n")


DEFAULT_VOCABULARY = ActivityVocabulary.from_mapping({
    "eating": [
        "eat", "meal", "meals", "a meal", "main meal", "each main meal",
        "food", "breakfast", "lunch", "dinner", "eating a meal",
    ],
    "take_medicine": [
        "take medicine", "taking medicine", "taking medication",
        "taking medications", "taking these medications",
        "taking this medication", "taking your medication", "your dose",
    ],
    "sleeping": ["sleep", "bedtime", "bed", "going to bed", "your bedtime"],
    "wake_up": ["wake up", "waking up", "you wake up", "waking"],
    "exercise": ["exercising", "workout", "working out", "physical activity"],
    "driving": ["drive"],
    "working": ["work"],
})


# ---------------------------------------------------------------------------
# Canonicalization
# ---------------------------------------------------------------------------

def singularize_unit(unit: str) -> str:
    """Map surface unit words (plurals, frequency adverbs) to canonical units."""
    key = _normalize_surface(unit)
    table = {
        "minute": "minute", "minutes": "minute", "min": "minute", "mins": "minute",
        "hour": "hour", "hours": "hour", "hr": "hour", "hrs": "hour", "hourly": "hour",
        "day": "day", "days": "day", "daily": "day",
        "week": "week", "weeks": "week", "weekly": "week",
    }
    if key not in table:
        raise ValueError(f"unknown time unit {unit!r}")
    return table[key]


def canonicalize(constraint: Constraint, vocab: ActivityVocabulary | None = None,
                 strict: bool = True) -> Constraint:
    """Return the canonical form of a constraint.

    Activity names are mapped through the vocabulary, nested compounds are
    flattened (single-part compounds unwrap), double negation collapses, and
    compound parts are put in a deterministic order.  Idempotent.
    """
    if vocab is None:
        vocab = DEFAULT_VOCABULARY
    if isinstance(constraint, DefinitiveDependency):
        return DefinitiveDependency(constraint.n, constraint.u, constraint.dp,
                                    vocab.normalize(constraint.act, strict))
    if isinstance(constraint, ImpreciseDependency):
        return ImpreciseDependency(constraint.dp, vocab.normalize(constraint.act, strict))
    if isinstance(constraint, Negated):
        inner = canonicalize(constraint.inner, vocab, strict)
        if isinstance(inner, Negated):
            return inner.inner
        return Negated(inner)
    if isinstance(constraint, Compound):
        flat: list[Constraint] = []
        for part in constraint.parts:
            part = canonicalize(part, vocab, strict)
            if isinstance(part, Compound):
                flat.extend(part.parts)
            else:
                flat.append(part)
        if len(flat) == 1:
            return flat[0]
        flat.sort(key=serialize)
        return Compound(tuple(flat))
    return constraint


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

def to_record(constraint: Constraint) -> dict:
    """Constraint as a JSON-ready dict: a ``type`` tag plus variant fields."""
    if isinstance(constraint, DefinitiveDependency):
        return {"type": "V1", "n": constraint.n, "u": constraint.u,
                "dp": constraint.dp, "act": constraint.act}
    if isinstance(constraint, Frequency):
        return {"type": "V2", "n": constraint.n, "u": constraint.u}
    if isinstance(constraint, Interval):
        return {"type": "V3", "n": constraint.n, "u": constraint.u,
                "ip": constraint.ip}
    if isinstance(constraint, ImpreciseDependency):
        return {"type": "V4", "dp": constraint.dp, "act": constraint.act}
    if isinstance(constraint, TimeDependency):
        return {"type": "V5", "dp": constraint.dp, "t": format_clock(constraint.t)}
    if isinstance(constraint, Consistency):
        return {"type": "V6", "p": constraint.p, "t": format_clock(constraint.t),
                "u": constraint.u}
    if isinstance(constraint, TimeOfDay):
        return {"type": "V7", "p": constraint.p, "d": constraint.d}
    if isinstance(constraint, Compound):
        return {"type": "COMPOUND", "parts": [to_record(p) for p in constraint.parts]}
    if isinstance(constraint, Negated):
        return {"type": "NEGATED", "inner": to_record(constraint.inner)}
    raise TypeError(f"not a constraint: {constraint!r}")


def serialize(constraint: Constraint) -> str:
    """One-line JSON record for a constraint."""
    return json.dumps(to_record(constraint))


_REQUIRED_FIELDS = {
    "V1": ("n", "u", "dp", "act"),
    "V2": ("n", "u"),
    "V3": ("n", "u", "ip"),
    "V4": ("dp", "act"),
    "V5": ("dp", "t"),
    "V6": ("p", "t", "u"),
    "V7": ("p", "d"),
    "COMPOUND": ("parts",),
    "NEGATED": ("inner",),
}


def from_record(obj, position: tuple[int, int] | None = None) -> Constraint:
    """Build a constraint from a parsed record dict.  Raises MalformedRecord."""
    if not isinstance(obj, dict):
        raise MalformedRecord(f"record is not an object: {obj!r}", position)
    tag = obj.get("type")
    if tag not in _REQUIRED_FIELDS:
        raise MalformedRecord(f"unknown record type {tag!r}", position)
    expected = set(_REQUIRED_FIELDS[tag]) | {"type"}
    got = set(obj)
    if got != expected:
        missing, extra = expected - got, got - expected
        detail = "; ".join(filter(None, [
            f"missing fields {sorted(missing)}" if missing else "",
            f"unexpected fields {sorted(extra)}" if extra else "",
        ]))
        raise MalformedRecord(f"bad fields for {tag}: {detail}", position)
    try:
        if tag == "V1":
            return DefinitiveDependency(obj["n"], obj["u"], obj["dp"], obj["act"])
        if tag == "V2":
            return Frequency(obj["n"], obj["u"])
        if tag == "V3":
            return Interval(obj["n"], obj["u"], obj["ip"])
        if tag == "V4":
            return ImpreciseDependency(obj["dp"], obj["act"])
        if tag == "V5":
            return TimeDependency(obj["dp"], parse_clock(obj["t"]))
        if tag == "V6":
            return Consistency(obj["p"], parse_clock(obj["t"]), obj["u"])
        if tag == "V7":
            return TimeOfDay(obj["p"], obj["d"])
        if tag == "COMPOUND":
            return Compound(tuple(from_record(p, position) for p in obj["parts"]))
        return Negated(from_record(obj["inner"], position))
    except MalformedRecord:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise MalformedRecord(f"bad {tag} record: {exc}", position) from exc


def deserialize(text: str, line: int = 1) -> Constraint:
    """Parse one serialized constraint record.  Raises MalformedRecord with a
    (line, column) position on bad JSON or bad fields."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"bad JSON: {exc.msg}", (line, exc.colno)) from exc
    return from_record(obj, (line, 1))


def load_constraints(lines: Iterable[str]) -> list[Constraint]:
    """Parse constraints from an iterable of JSONL lines; blank lines skipped."""
    out = []
    for i, raw in enumerate(lines, start=1):
        if raw.strip():
            out.append(deserialize(raw, line=i))
    return out


def load_constraints_file(path) -> list[Constraint]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_constraints(fh)


def dump_constraints(constraints: Iterable[Constraint]) -> Iterator[str]:
    for c in constraints:
        yield serialize(c)


def dump_constraints_file(constraints: Iterable[Constraint], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in dump_constraints(constraints):
            fh.write(line + "\n")
