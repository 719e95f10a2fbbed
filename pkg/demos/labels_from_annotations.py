"""Turning an annotated reading order into col/row training labels.

Annotators give paragraphs in reading order but no pattern. Each step from
one paragraph to the next is classified as vertical, horizontal, or unknown
from the box geometry, and the two steps around a paragraph decide its label.

    python3 demos/labels_from_annotations.py
"""

from collections import Counter

from readorder import SynthConfig, generate, label_patterns
from readorder.labeling import group_relations


def show(kind, seed=0):
    _, truth = generate(SynthConfig(kind=kind, seed=seed))
    group = truth.groups()[0]
    steps = group_relations(group)
    labels = label_patterns(group)
    print(f"{kind}: {len(labels)} paragraphs")
    print("  steps :", " ".join(s[0].upper() for s in steps))
    print("  labels:", " ".join(p for _, p in labels))
    hits = sum(p == truth.paragraph_pattern[pid] for pid, p in labels)
    print(f"  agree with generator: {hits}/{len(labels)}  {dict(Counter(p for _, p in labels))}")


def main():
    for kind in ("columns", "table", "mixed"):
        show(kind)


if __name__ == "__main__":
    main()
