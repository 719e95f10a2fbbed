"""OCR document model: words, lines, documents and ground-truth annotations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import RotatedBox

COL = "col"
ROW = "row"
PATTERNS = (COL, ROW)


@dataclass(frozen=True)
class Word:
    id: int
    text: str
    box: RotatedBox


@dataclass(frozen=True)
class TextLine:
    """An OCR line. ``words`` are in the order the OCR engine produced them."""

    id: int
    box: RotatedBox
    words: tuple[Word, ...] = ()


@dataclass(frozen=True)
class Document:
    """Lines in OCR output order."""

    lines: tuple[TextLine, ...]
    id: str = "doc"

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        seen = set()
        for ln in self.lines:
            if ln.id in seen:
                raise ValueError(f"duplicate line id {ln.id}")
            seen.add(ln.id)

    def __len__(self):
        return len(self.lines)

    def line(self, line_id: int) -> TextLine:
        return self.line_map[line_id]

    @property
    def line_map(self) -> dict[int, TextLine]:
        return {ln.id: ln for ln in self.lines}

    @property
    def words(self) -> list[Word]:
        return [w for ln in self.lines for w in ln.words]


@dataclass(frozen=True)
class AnnotatedGroup:
    """An ordered run of paragraphs whose reading order is known."""

    paragraph_ids: tuple[int, ...]
    boxes: tuple[RotatedBox, ...]

    def __post_init__(self):
        object.__setattr__(self, "paragraph_ids", tuple(self.paragraph_ids))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if len(self.paragraph_ids) != len(self.boxes):
            raise ValueError("paragraph_ids and boxes differ in length")
        if len(set(self.paragraph_ids)) != len(self.paragraph_ids):
            raise ValueError("duplicate paragraph id in group")

    def __len__(self):
        return len(self.paragraph_ids)


@dataclass
class GroundTruth:
    line_paragraph: dict[int, int]
    paragraph_pattern: dict[int, str]
    paragraph_order: list[int]
    paragraph_words: dict[int, list[int]] = field(default_factory=dict)
    paragraph_boxes: dict[int, RotatedBox] = field(default_factory=dict)

    def paragraph_lines(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {p: [] for p in self.paragraph_order}
        for line_id, p in self.line_paragraph.items():
            out.setdefault(p, []).append(line_id)
        return out

    def groups(self) -> list[AnnotatedGroup]:
        """The whole truth order as a single annotated group."""
        if not self.paragraph_order:
            return []
        return [AnnotatedGroup(
            tuple(self.paragraph_order),
            tuple(self.paragraph_boxes[p] for p in self.paragraph_order),
        )]
