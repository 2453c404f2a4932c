"""Seeded generators for extraction recall/precision exercises.

Instantiates a template with concrete slot values, sprinkles distractor
words between the tokens, and reports the constraint the sentence should
yield.  Distractors are chosen so that no template token can match them,
which makes the expected outcome unambiguous.
"""

from __future__ import annotations

import random

from adherence.constraints import DEFAULT_VOCABULARY, format_clock
from adherence.extraction import enumerate_templates

_UNIT_SURFACES = {
    "minute": ["minute", "minutes", "min", "mins"],
    "hour": ["hour", "hours", "hr", "hrs"],
    "day": ["day", "days"],
    "week": ["week", "weeks"],
}
_FREQ_SURFACES = {"day": ["daily"], "week": ["weekly"], "hour": ["hourly"]}
_SPELLED = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six",
            7: "seven", 8: "eight", 9: "nine", 10: "ten", 11: "eleven",
            12: "twelve"}


def _token_words() -> set:
    """Every word that appears in any template literal or slot surface."""
    words = set()
    for template in enumerate_templates(DEFAULT_VOCABULARY):
        for token in template.tokens:
            for surface in token.surfaces:
                words.update(surface.lower().split())
    for surfaces in _UNIT_SURFACES.values():
        words.update(surfaces)
    for surfaces in _FREQ_SURFACES.values():
        words.update(surfaces)
    words.update(_SPELLED.values())
    words.update(["morning", "noon", "evening", "am", "pm", "once", "twice"])
    for surface, _ in DEFAULT_VOCABULARY.surface_forms():
        words.update(surface.lower().split())
    return words


_FORBIDDEN = _token_words()

DISTRACTORS = [w for w in (
    "please", "gently", "tablet", "capsule", "swallow", "water", "plenty",
    "slowly", "whole", "glass", "carefully", "kindly", "promptly", "quietly",
    "remember", "usually", "with", "it", "this", "if", "needed", "doctor",
    "ask", "about", "more", "information", "keep", "away", "from", "children",
) if w not in _FORBIDDEN]

assert len(DISTRACTORS) >= 20, "distractor pool collided with template tokens"


def _render_number(rng: random.Random):
    n = rng.randint(1, 60)
    style = rng.random()
    if style < 0.25 and n <= 12:
        return _SPELLED[n], n, False
    if style < 0.45 and n >= 2:
        lo = rng.randint(1, n - 1)
        return f"{lo}-{n}", n, True
    return str(n), n, False


def _render_clock(rng: random.Random):
    minutes = rng.randrange(0, 1440)
    hour24, minute = divmod(minutes, 60)
    style = rng.random()
    if style < 0.34:
        return format_clock(minutes), minutes
    hour12 = hour24 % 12 or 12
    suffix = "am" if hour24 < 12 else "pm"
    if style < 0.67:
        if minute == 0:
            return f"{hour12} {suffix}", minutes
        return f"{hour12}:{minute:02d} {suffix}", minutes
    if minute == 0:
        return f"{hour12} {'a.m.' if suffix == 'am' else 'p.m.'}", minutes
    return f"{hour12}.{minute:02d} {suffix}", minutes


def _render_token(token, rng: random.Random, vocab):
    if token.kind == "NUMBER":
        return _render_number(rng)
    if token.kind == "UNIT":
        unit = rng.choice(list(_UNIT_SURFACES))
        pool = list(_UNIT_SURFACES[unit])
        if token.freq_units and unit in _FREQ_SURFACES:
            pool += _FREQ_SURFACES[unit]
        return rng.choice(pool), unit, False
    if token.kind == "ACTIVITY":
        forms = vocab.surface_forms()
        surface, canonical = rng.choice(forms)
        return surface, canonical, False
    if token.kind == "CLOCKTIME":
        surface, minutes = _render_clock(rng)
        return surface, minutes, False
    if token.kind == "DAYPART":
        daypart = rng.choice(["morning", "noon", "evening"])
        return daypart, daypart, False
    surface = rng.choice(list(token.surfaces))
    return surface, token.value_for(surface), False


def random_instance(rng: random.Random, vocab=None, templates=None):
    """One (sentence, expected_constraint) pair with distractor padding."""
    vocab = vocab if vocab is not None else DEFAULT_VOCABULARY
    templates = templates if templates is not None else enumerate_templates(vocab)
    template = rng.choice(list(templates))
    captures = {}
    rendered = []
    for token in template.tokens:
        surface, value, _ = _render_token(token, rng, vocab)
        rendered.append(surface)
        if token.slot:
            captures[token.slot] = value
    expected = template.build(captures)
    words = []
    for surface in rendered:
        words.extend(rng.choices(DISTRACTORS, k=rng.randint(0, 3)))
        words.append(surface)
    words.extend(rng.choices(DISTRACTORS, k=rng.randint(0, 3)))
    return " ".join(words), expected


def random_negative(rng: random.Random) -> str:
    """A sentence built only from distractor words; must match nothing."""
    return " ".join(rng.choices(DISTRACTORS, k=rng.randint(5, 12)))
