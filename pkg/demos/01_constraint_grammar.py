"""Build timing constraints by hand and move them through the wire format.

Run from the repository root:  python3 demos/01_constraint_grammar.py
"""

from adherence import (
    Compound,
    Consistency,
    DefinitiveDependency,
    Frequency,
    Negated,
    SAME_TIME,
    TimeOfDay,
    canonicalize,
    deserialize,
    serialize,
)

print("A few constraints, built directly:")
examples = [
    DefinitiveDependency(2, "hour", "before", "eating"),
    Frequency(1, "day"),
    Consistency("at", SAME_TIME, "day"),
    TimeOfDay("in", "morning"),
    Negated(DefinitiveDependency(1, "hour", "after", "exercise")),
    Compound((DefinitiveDependency(2, "hour", "before", "eating"),
              DefinitiveDependency(1, "hour", "after", "eating"))),
]
for constraint in examples:
    print(f"  {constraint}")

print("\nEach serializes to one JSON line:")
for constraint in examples:
    print(f"  {serialize(constraint)}")

print("\n...and parses back to an equal value:")
for constraint in examples:
    assert deserialize(serialize(constraint)) == constraint
print("  round trip ok for all", len(examples))

print("\nCanonicalization maps activity synonyms onto the shared vocabulary")
raw = DefinitiveDependency(2, "hour", "before", "meals")
print(f"  {raw}")
print(f"  -> {canonicalize(raw)}")

print("\n...and collapses double negation:")
twice = Negated(Negated(Frequency(2, "day")))
print(f"  {twice}")
print(f"  -> {canonicalize(twice)}")
