"""Template-based extraction of timing constraints from guideline text.

A template is an ordered sequence of tokens: literal words plus slots for
numbers, time units, activities, clock times, and dayparts.  A template
matches a statement when its tokens appear left to right, each one anywhere
after the previous match, so "take [it] 2 hours [strictly] before eating"
still matches [NUMBER, UNIT, "before", ACTIVITY].  Matching never crosses a
statement boundary; documents are split on periods, semicolons, and
newlines first.

Overlapping candidate matches are resolved in two passes.  Candidates from
the same template conflict when their non-activity token spans intersect,
and the tightest candidate wins; this keeps "1 hour before X ... 4 hours
after X" as two matches (they share only the activity phrase) while
discarding loose rebindings like matching the "1" of "1-30 minutes" with a
"times daily" further on.  Across templates, a candidate is dropped only
when a match with strictly more tokens overlaps it, so a bare ordering
("before meals") yields to a quantified gap ("30 minutes before meals")
covering the same words.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from adherence.constraints import (
    ActivityVocabulary,
    Consistency,
    Constraint,
    DEFAULT_VOCABULARY,
    DefinitiveDependency,
    Frequency,
    ImpreciseDependency,
    Interval,
    Negated,
    SAME_TIME,
    TimeDependency,
    TimeOfDay,
    singularize_unit,
    to_record,
)


class MismatchedCorpus(ValueError):
    """Prediction and gold label sets cover different documents."""


# ---------------------------------------------------------------------------
# Tokens and templates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    """One template element.

    ``kind`` is LIT, NUMBER, UNIT, ACTIVITY, CLOCKTIME, or DAYPART.  ``slot``
    names the constraint field the captured value fills (None for pure
    literals).  ``surfaces`` lists the accepted spellings for LIT tokens;
    ``values`` optionally maps a surface to a captured value (e.g. once -> 1).
    ``freq_units`` lets a UNIT token also accept frequency adverbs such as
    "daily".
    """

    kind: str
    slot: Optional[str] = None
    surfaces: tuple = ()
    values: Optional[tuple] = None  # ((surface, value), ...) aligned pairs
    freq_units: bool = False

    def value_for(self, surface: str):
        if self.values is None:
            return surface
        for key, value in self.values:
            if key == surface:
                return value
        return surface


@dataclass(frozen=True)
class Template:
    """A token sequence plus the constraint skeleton its captures fill."""

    id: str
    tag: str  # V1..V7 or NEG_V4
    tokens: tuple
    constants: tuple = ()  # ((field, value), ...)

    def build(self, captures: Mapping[str, object]) -> Constraint:
        fields = dict(self.constants)
        fields.update(captures)
        if self.tag == "V1":
            return DefinitiveDependency(fields["n"], fields["u"], fields["dp"],
                                        fields["act"])
        if self.tag == "V2":
            return Frequency(fields["n"], fields["u"])
        if self.tag == "V3":
            return Interval(fields["n"], fields["u"], fields["ip"])
        if self.tag == "V4":
            return ImpreciseDependency(fields["dp"], fields["act"])
        if self.tag == "V5":
            return TimeDependency(fields["dp"], fields["t"])
        if self.tag == "V6":
            return Consistency(fields["p"], fields["t"], fields["u"])
        if self.tag == "V7":
            return TimeOfDay(fields["p"], fields["d"])
        if self.tag == "NEG_V4":
            return Negated(ImpreciseDependency(fields["dp"], fields["act"]))
        raise ValueError(f"unknown template tag {self.tag!r}")


def _lit(*surfaces: str, slot: str | None = None, values=None) -> Token:
    return Token("LIT", slot=slot, surfaces=surfaces, values=values)


def enumerate_templates(vocab: ActivityVocabulary | None = None) -> tuple:
    """The built-in template set, in a fixed deterministic order.

    The activity slot draws its accepted spellings from ``vocab`` at match
    time, so the same templates serve any vocabulary.
    """
    del vocab  # templates are vocabulary-independent; the matcher binds it
    number = Token("NUMBER", slot="n")
    unit = Token("UNIT", slot="u")
    unit_freq = Token("UNIT", slot="u", freq_units=True)
    activity = Token("ACTIVITY", slot="act")
    clock = Token("CLOCKTIME", slot="t")
    daypart = Token("DAYPART", slot="d")
    return (
        Template("V1.before", "V1", (number, unit, _lit("before", slot="dp"), activity)),
        Template("V1.after", "V1", (number, unit, _lit("after", slot="dp"), activity)),
        Template("V2.times", "V2", (number, _lit("times", "time"), unit_freq)),
        Template("V2.word", "V2",
                 (_lit("once", "twice", slot="n", values=(("once", 1), ("twice", 2))),
                  unit_freq)),
        Template("V3.apart", "V3", (number, unit, _lit("apart", slot="ip"))),
        Template("V3.within", "V3", (_lit("within", slot="ip"), number, unit)),
        Template("V3.for", "V3", (_lit("for", slot="ip"), number, unit)),
        Template("V4.before", "V4", (_lit("before", slot="dp"), activity)),
        Template("V4.after", "V4", (_lit("after", slot="dp"), activity)),
        Template("V5.before", "V5", (_lit("before", slot="dp"), clock)),
        Template("V5.after", "V5", (_lit("after", slot="dp"), clock)),
        Template("V6.same", "V6",
                 (_lit("at", "in", slot="p"), _lit("the same time", "same time"),
                  _lit("each", "every"), unit),
                 constants=(("t", SAME_TIME),)),
        Template("V6.clock", "V6",
                 (_lit("at", "in", slot="p"), clock, _lit("each", "every"), unit)),
        Template("V7", "V7", (_lit("at", "in", slot="p"), daypart)),
        Template("NEG.before", "NEG_V4",
                 (_lit("do not", "don't"), _lit("before", slot="dp"), activity)),
        Template("NEG.after", "NEG_V4",
                 (_lit("do not", "don't"), _lit("after", slot="dp"), activity)),
    )


# ---------------------------------------------------------------------------
# Token finders
# ---------------------------------------------------------------------------

class TokenMatch(NamedTuple):
    start: int
    end: int
    value: object
    is_range: bool


_SPELLED_NUMBERS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

NUMBER_RE = re.compile(
    r"\b(?:(?P<rlo>\d+)\s*[-–]\s*(?P<rhi>\d+)"
    r"|(?P<digits>\d+)(?!:)"
    r"|(?P<spelled>" + "|".join(_SPELLED_NUMBERS) + r"))\b",
    re.IGNORECASE,
)

CLOCK_RE = re.compile(
    r"\b(?:(?P<h12>\d{1,2})(?:[:.](?P<m12>\d{2}))?\s*(?P<ap>[ap])\.?\s?m(?:\.|\b)"
    r"|(?P<h24>\d{1,2}):(?P<m24>\d{2})\b)",
    re.IGNORECASE,
)

_BASE_UNIT_SURFACES = (
    "minutes", "minute", "mins", "min", "hours", "hour", "hrs", "hr",
    "days", "day", "weeks", "week",
)
_FREQ_UNIT_SURFACES = _BASE_UNIT_SURFACES + ("daily", "weekly", "hourly")

DAYPART_RE = re.compile(r"\b(morning|noon|evening)\b", re.IGNORECASE)


def _phrase_pattern(surface: str) -> str:
    return r"\s+".join(re.escape(word) for word in surface.split())


def _alternation(surfaces: Sequence[str]) -> re.Pattern:
    ordered = sorted(surfaces, key=lambda s: (-len(s), s))
    body = "|".join(_phrase_pattern(s) for s in ordered)
    return re.compile(r"\b(?:" + body + r")\b", re.IGNORECASE)


def _parse_clock_match(m: re.Match) -> Optional[int]:
    if m.group("h12") is not None:
        hours = int(m.group("h12"))
        minutes = int(m.group("m12") or 0)
        if not 1 <= hours <= 12 or minutes >= 60:
            return None
        hours = hours % 12
        if m.group("ap").lower() == "p":
            hours += 12
        return hours * 60 + minutes
    hours, minutes = int(m.group("h24")), int(m.group("m24"))
    if hours >= 24 or minutes >= 60:
        return None
    return hours * 60 + minutes


class _TokenFinder:
    """Compiled matcher for one token kind against raw statement text."""

    def __init__(self, token: Token, vocab: ActivityVocabulary):
        self.token = token
        self.vocab = vocab
        if token.kind == "LIT":
            self.pattern = _alternation(token.surfaces)
        elif token.kind == "NUMBER":
            self.pattern = NUMBER_RE
        elif token.kind == "UNIT":
            surfaces = _FREQ_UNIT_SURFACES if token.freq_units else _BASE_UNIT_SURFACES
            self.pattern = _alternation(surfaces)
        elif token.kind == "ACTIVITY":
            self.pattern = _alternation([s for s, _ in vocab.surface_forms()])
        elif token.kind == "CLOCKTIME":
            self.pattern = CLOCK_RE
        elif token.kind == "DAYPART":
            self.pattern = DAYPART_RE
        else:
            raise ValueError(f"unknown token kind {self.token.kind!r}")

    def first(self, text: str, pos: int) -> Optional[TokenMatch]:
        for match in self.pattern.finditer(text, pos):
            resolved = self._resolve(match)
            if resolved is not None:
                return resolved
        return None

    def all(self, text: str) -> list:
        out = []
        for match in self.pattern.finditer(text):
            resolved = self._resolve(match)
            if resolved is not None:
                out.append(resolved)
        return out

    def _resolve(self, match: re.Match) -> Optional[TokenMatch]:
        token, text = self.token, match.group(0)
        span = (match.start(), match.end())
        if token.kind == "NUMBER":
            if match.group("rhi") is not None:
                return TokenMatch(*span, int(match.group("rhi")), True)
            if match.group("digits") is not None:
                return TokenMatch(*span, int(match.group("digits")), False)
            return TokenMatch(*span, _SPELLED_NUMBERS[text.lower()], False)
        if token.kind == "CLOCKTIME":
            minutes = _parse_clock_match(match)
            if minutes is None:
                return None
            return TokenMatch(*span, minutes, False)
        if token.kind == "UNIT":
            return TokenMatch(*span, singularize_unit(text), False)
        if token.kind == "ACTIVITY":
            return TokenMatch(*span, self.vocab.normalize(text), False)
        if token.kind == "DAYPART":
            return TokenMatch(*span, text.lower(), False)
        # LIT: capture the normalized surface, or its mapped value
        normalized = re.sub(r"\s+", " ", text.lower())
        return TokenMatch(*span, token.value_for(normalized), False)


# ---------------------------------------------------------------------------
# Statement splitting
# ---------------------------------------------------------------------------

# A period splits statements unless it belongs to "a.m.", "p.m.", or a
# decimal/clock figure; semicolons and newlines always split.
_SPLIT_RE = re.compile(r"(?<!\b[ap])(?<!\ba\.m)(?<!\bp\.m)\.(?!\d)|[;\n]")


@dataclass(frozen=True)
class Statement:
    text: str
    index: int
    offset: int  # character offset of the statement within the document


def split_statements(document: str) -> list:
    """Split a document into trimmed statements, keeping document offsets."""
    statements = []
    last = 0
    pieces = []
    for sep in _SPLIT_RE.finditer(document):
        pieces.append((last, document[last:sep.start()]))
        last = sep.end()
    pieces.append((last, document[last:]))
    index = 0
    for offset, raw in pieces:
        stripped = raw.strip()
        if not stripped:
            continue
        statements.append(Statement(stripped, index, offset + raw.index(stripped)))
        index += 1
    return statements


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchResult:
    """One extracted constraint with its evidence spans.

    ``spans`` are (start, end) character ranges within the statement, one per
    template token, strictly left to right.  ``from_range`` marks numeric
    slots that bound the upper end of a spelled range like "1-30".
    """

    constraint: Constraint
    statement_index: int
    spans: tuple
    template_id: str
    from_range: bool = False

    @property
    def tag(self) -> str:
        return to_record(self.constraint)["type"]


@dataclass(frozen=True)
class _Candidate:
    result: MatchResult
    token_count: int
    anchor_spans: tuple  # spans of non-activity tokens

    @property
    def spans(self):
        return self.result.spans

    @property
    def extent(self):
        return (self.spans[0][0], self.spans[-1][1])

    @property
    def width(self):
        return self.extent[1] - self.extent[0]


def _spans_overlap(a, b) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _any_overlap(spans_a, spans_b) -> bool:
    return any(_spans_overlap(a, b) for a in spans_a for b in spans_b)


class TemplateMatcher:
    """Matches a template set against statements of one vocabulary."""

    def __init__(self, vocab: ActivityVocabulary | None = None,
                 templates: Sequence[Template] | None = None):
        self.vocab = vocab if vocab is not None else DEFAULT_VOCABULARY
        self.templates = (tuple(templates) if templates is not None
                          else enumerate_templates(self.vocab))
        self._finders: dict[Token, _TokenFinder] = {}
        for template in self.templates:
            for token in template.tokens:
                if token not in self._finders:
                    self._finders[token] = _TokenFinder(token, self.vocab)

    def match_statement(self, statement: str, statement_index: int = 0) -> list:
        """All surviving matches in one statement, in positional order."""
        candidates = []
        for template in self.templates:
            candidates.extend(self._candidates(template, statement, statement_index))
        candidates = self._dedupe(candidates)
        candidates = self._prune_same_template(candidates)
        candidates = self._prune_cross_template(candidates)
        candidates.sort(key=lambda c: (c.extent[0], c.result.template_id, c.spans))
        return [c.result for c in candidates]

    def extract(self, document: str) -> "ExtractionResult":
        statements = split_statements(document)
        matches = []
        for statement in statements:
            matches.extend(self.match_statement(statement.text, statement.index))
        return ExtractionResult(tuple(statements), tuple(matches))

    # -- candidate generation -------------------------------------------------

    def _candidates(self, template: Template, text: str, statement_index: int):
        out = []
        first = self._finders[template.tokens[0]]
        for head in first.all(text):
            spans = [(head.start, head.end)]
            captures = {}
            is_range = head.is_range
            if template.tokens[0].slot:
                captures[template.tokens[0].slot] = head.value
            pos = head.end
            complete = True
            for token in template.tokens[1:]:
                found = self._finders[token].first(text, pos)
                if found is None:
                    complete = False
                    break
                spans.append((found.start, found.end))
                if token.slot:
                    captures[token.slot] = found.value
                is_range = is_range or found.is_range
                pos = found.end
            if not complete:
                continue
            try:
                constraint = template.build(captures)
            except ValueError:
                continue  # e.g. "0 hours before eating" fails count validation
            anchor = tuple(span for span, token in zip(spans, template.tokens)
                           if token.kind != "ACTIVITY")
            out.append(_Candidate(
                MatchResult(constraint, statement_index, tuple(spans),
                            template.id, is_range),
                len(template.tokens), anchor))
        return out

    @staticmethod
    def _dedupe(candidates):
        seen = set()
        out = []
        for c in candidates:
            key = (c.result.template_id, c.result.spans)
            if key not in seen:
                seen.add(key)
                out.append(c)
        return out

    @staticmethod
    def _prune_same_template(candidates):
        by_template: dict[str, list] = {}
        for c in candidates:
            by_template.setdefault(c.result.template_id, []).append(c)
        survivors = []
        for group in by_template.values():
            group.sort(key=lambda c: (c.width, c.extent[0], c.spans))
            kept = []
            for c in group:
                if not any(_any_overlap(c.anchor_spans, k.anchor_spans) for k in kept):
                    kept.append(c)
            survivors.extend(kept)
        return survivors

    @staticmethod
    def _prune_cross_template(candidates):
        ordered = sorted(candidates,
                         key=lambda c: (-c.token_count, c.extent[0], c.width,
                                        c.result.template_id))
        kept = []
        for c in ordered:
            shadowed = any(k.token_count > c.token_count
                           and _any_overlap(k.spans, c.spans) for k in kept)
            if not shadowed:
                kept.append(c)
        return kept


def match_statement(statement: str, vocab: ActivityVocabulary | None = None,
                    templates: Sequence[Template] | None = None) -> list:
    return TemplateMatcher(vocab, templates).match_statement(statement)


def extract_from_guideline(document: str, vocab: ActivityVocabulary | None = None,
                           templates: Sequence[Template] | None = None) -> "ExtractionResult":
    return TemplateMatcher(vocab, templates).extract(document)


@dataclass(frozen=True)
class ExtractionResult:
    statements: tuple
    matches: tuple

    def tag_set(self) -> set:
        """The set of constraint type tags extracted from the document."""
        return {m.tag for m in self.matches}

    def constraints(self) -> list:
        return [m.constraint for m in self.matches]


# ---------------------------------------------------------------------------
# Evaluation against labeled documents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeScore:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int


def _prf(tp: int, fp: int, fn: int) -> tuple:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class ExtractionReport:
    per_type: dict
    micro: TypeScore
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def as_text(self) -> str:
        lines = [f"{'type':<10} {'prec':>7} {'recall':>7} {'f1':>7} {'support':>8}"]
        for tag in sorted(self.per_type):
            s = self.per_type[tag]
            lines.append(f"{tag:<10} {s.precision:7.4f} {s.recall:7.4f}"
                         f" {s.f1:7.4f} {s.support:8d}")
        lines.append(f"{'micro':<10} {self.micro.precision:7.4f}"
                     f" {self.micro.recall:7.4f} {self.micro.f1:7.4f}"
                     f" {self.micro.support:8d}")
        lines.append(f"{'weighted':<10} {self.weighted_precision:7.4f}"
                     f" {self.weighted_recall:7.4f} {self.weighted_f1:7.4f}"
                     f" {self.micro.support:8d}")
        return "\n".join(lines)


def evaluate_extraction(predicted: Mapping[str, Iterable[str]],
                        gold: Mapping[str, Iterable[str]]) -> ExtractionReport:
    """Score per-document constraint type sets against gold labels.

    Both arguments map document id -> iterable of type tags.  Raises
    :class:`MismatchedCorpus` when the two cover different documents.
    """
    if set(predicted) != set(gold):
        only_pred = sorted(set(predicted) - set(gold))
        only_gold = sorted(set(gold) - set(predicted))
        raise MismatchedCorpus(f"document sets differ: prediction-only "
                               f"{only_pred}, gold-only {only_gold}")
    pred_sets = {doc: set(tags) for doc, tags in predicted.items()}
    gold_sets = {doc: set(tags) for doc, tags in gold.items()}
    universe = sorted(set().union(*pred_sets.values(), *gold_sets.values(), set()))
    per_type = {}
    total_tp = total_fp = total_fn = 0
    for tag in universe:
        tp = sum(1 for d in gold_sets if tag in gold_sets[d] and tag in pred_sets[d])
        fp = sum(1 for d in gold_sets if tag not in gold_sets[d] and tag in pred_sets[d])
        fn = sum(1 for d in gold_sets if tag in gold_sets[d] and tag not in pred_sets[d])
        precision, recall, f1 = _prf(tp, fp, fn)
        per_type[tag] = TypeScore(precision, recall, f1, tp + fn, tp, fp, fn)
        total_tp, total_fp, total_fn = total_tp + tp, total_fp + fp, total_fn + fn
    precision, recall, f1 = _prf(total_tp, total_fp, total_fn)
    micro = TypeScore(precision, recall, f1, total_tp + total_fn,
                      total_tp, total_fp, total_fn)
    total_support = sum(s.support for s in per_type.values())
    if total_support:
        weighted_p = sum(s.precision * s.support for s in per_type.values()) / total_support
        weighted_r = sum(s.recall * s.support for s in per_type.values()) / total_support
        weighted_f1 = sum(s.f1 * s.support for s in per_type.values()) / total_support
    else:
        weighted_p = weighted_r = weighted_f1 = 0.0
    return ExtractionReport(per_type, micro, weighted_p, weighted_r, weighted_f1)
