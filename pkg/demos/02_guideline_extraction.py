"""Extract timing constraints from drug guideline prose.

Run from the repository root:  python3 demos/02_guideline_extraction.py
"""

from pathlib import Path

from adherence import extract_from_guideline, serialize

text = (Path(__file__).parent / "guideline.txt").read_text()
print("Guideline:")
for line in text.strip().splitlines():
    print(f"  {line}")

result = extract_from_guideline(text)
print(f"\n{len(result.statements)} statements, "
      f"{len(result.matches)} constraints extracted:\n")
for match in result.matches:
    statement = result.statements[match.statement_index]
    print(f"  [{match.tag}] {statement.text.strip()}")
    print(f"       -> {serialize(match.constraint)}")

print("\nType tags found:", ", ".join(sorted(result.tag_set())))
