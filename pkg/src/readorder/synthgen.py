"""Seeded synthetic layouts with known reading order.

Three layouts are produced: text columns (read down each column, then the
next column), tables (read across each row, then the next row), and a page
with one block of each, stacked vertically. Lines carry synthetic word
tokens so the evaluation metric can match words by id.

Lines are emitted in a shuffled paragraph order, as an OCR engine without
layout analysis might, but each paragraph's own lines stay in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .document import COL, ROW, Document, GroundTruth, TextLine, Word
from .geometry import RotatedBox, containing_box, rotate_about

COLUMNS = "columns"
TABLE = "table"
MIXED = "mixed"
KINDS = (COLUMNS, TABLE, MIXED)


class SynthError(ValueError):
    """Configuration cannot produce a valid page."""


@dataclass(frozen=True)
class SynthConfig:
    kind: str = COLUMNS
    seed: int = 0
    # columns layout
    n_columns: int = 2
    paragraphs_per_column: tuple[int, int] = (2, 4)
    lines_per_paragraph: tuple[int, int] = (2, 5)
    column_width: float = 320.0
    column_gap: float = 48.0
    paragraph_gap: float = 28.0
    # table layout
    n_rows: int = 4
    n_cols: int = 3
    lines_per_cell: tuple[int, int] = (1, 2)
    cell_width: float = 140.0
    cell_gap: float = 32.0
    row_gap: float = 28.0
    # shared
    line_height: float = 16.0
    line_gap: float = 8.0
    words_per_line: tuple[int, int] = (2, 6)
    region_gap: float = 64.0
    margin: float = 40.0
    page_size: tuple[float, float] | None = None
    jitter: float = 1.0
    angle_jitter_deg: float = 0.2
    rotation_deg: float = 0.0
    doc_id: str | None = None

    def validate(self):
        if self.kind not in KINDS:
            raise SynthError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not -90.0 < self.rotation_deg < 90.0:
            raise SynthError(f"rotation_deg must lie in (-90, 90), got {self.rotation_deg}")
        for name in ("paragraphs_per_column", "lines_per_paragraph", "lines_per_cell", "words_per_line"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise SynthError(f"{name} must be a range (lo, hi) with 1 <= lo <= hi")
        if self.n_columns < 1 or self.n_rows < 1 or self.n_cols < 1:
            raise SynthError("layout counts must be positive")
        gaps = [self.line_gap, self.paragraph_gap, self.column_gap, self.cell_gap, self.row_gap]
        if self.jitter < 0 or self.jitter >= 0.25 * min(gaps):
            raise SynthError(f"jitter {self.jitter} must be below a quarter of the smallest gap")

    @property
    def name(self) -> str:
        return self.doc_id or f"{self.kind}-{self.seed}"


@dataclass
class _Para:
    pattern: str
    lines: list[RotatedBox]


def _stack_lines(rng, x0: float, y0: float, n: int, width: float, cfg: SynthConfig,
                 min_frac: float) -> list[RotatedBox]:
    pitch = cfg.line_height + cfg.line_gap
    boxes = []
    for k in range(n):
        frac = rng.uniform(min_frac, 1.0)
        w = width * frac
        boxes.append(RotatedBox(x0 + w / 2, y0 + k * pitch + cfg.line_height / 2, w, cfg.line_height))
    return boxes


def _block_height(n_lines: int, cfg: SynthConfig) -> float:
    return n_lines * cfg.line_height + (n_lines - 1) * cfg.line_gap


def _columns_block(rng, cfg: SynthConfig, x0: float, y0: float) -> tuple[list[_Para], float, float]:
    paras = []
    bottom = y0
    for c in range(cfg.n_columns):
        x = x0 + c * (cfg.column_width + cfg.column_gap)
        y = y0
        n_par = int(rng.integers(cfg.paragraphs_per_column[0], cfg.paragraphs_per_column[1] + 1))
        for _ in range(n_par):
            n_lines = int(rng.integers(cfg.lines_per_paragraph[0], cfg.lines_per_paragraph[1] + 1))
            lines = _stack_lines(rng, x, y, n_lines, cfg.column_width, cfg, 0.6)
            # last line of a paragraph tends to be short
            if n_lines > 1:
                last = lines[-1]
                w = cfg.column_width * rng.uniform(0.3, 0.9)
                lines[-1] = RotatedBox(x + w / 2, last.cy, w, last.h)
            paras.append(_Para(COL, lines))
            y += _block_height(n_lines, cfg) + cfg.paragraph_gap
        bottom = max(bottom, y - cfg.paragraph_gap)
    width = cfg.n_columns * cfg.column_width + (cfg.n_columns - 1) * cfg.column_gap
    return paras, width, bottom - y0


def _table_block(rng, cfg: SynthConfig, x0: float, y0: float) -> tuple[list[_Para], float, float]:
    paras = []
    y = y0
    counts = rng.integers(cfg.lines_per_cell[0], cfg.lines_per_cell[1] + 1, size=(cfg.n_rows, cfg.n_cols))
    for r in range(cfg.n_rows):
        for c in range(cfg.n_cols):
            x = x0 + c * (cfg.cell_width + cfg.cell_gap)
            lines = _stack_lines(rng, x, y, int(counts[r, c]), cfg.cell_width, cfg, 0.4)
            paras.append(_Para(ROW, lines))
        y += _block_height(int(counts[r].max()), cfg) + cfg.row_gap
    width = cfg.n_cols * cfg.cell_width + (cfg.n_cols - 1) * cfg.cell_gap
    return paras, width, y - cfg.row_gap - y0


def _layout(rng, cfg: SynthConfig) -> tuple[list[_Para], float, float]:
    m = cfg.margin
    if cfg.kind == COLUMNS:
        paras, w, h = _columns_block(rng, cfg, m, m)
    elif cfg.kind == TABLE:
        paras, w, h = _table_block(rng, cfg, m, m)
    else:
        table_first = bool(rng.integers(0, 2))
        first, second = (_table_block, _columns_block) if table_first else (_columns_block, _table_block)
        pa, wa, ha = first(rng, cfg, m, m)
        pb, wb, hb = second(rng, cfg, m, m + ha + cfg.region_gap)
        paras, w, h = pa + pb, max(wa, wb), ha + cfg.region_gap + hb
    return paras, w + 2 * m, h + 2 * m


def _aabb_overlap(a: list[RotatedBox], b: list[RotatedBox]) -> bool:
    def span(boxes):
        return (min(x.cx - x.w / 2 for x in boxes), max(x.cx + x.w / 2 for x in boxes),
                min(x.cy - x.h / 2 for x in boxes), max(x.cy + x.h / 2 for x in boxes))
    ax0, ax1, ay0, ay1 = span(a)
    bx0, bx1, by0, by1 = span(b)
    return ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1


def _jittered(rng, paras: list[_Para], jitter: float, angle_jitter: float) -> list[_Para]:
    out = []
    for p in paras:
        lines = []
        for b in p.lines:
            dx, dy = rng.uniform(-jitter, jitter, size=2) if jitter > 0 else (0.0, 0.0)
            da = rng.uniform(-angle_jitter, angle_jitter) if angle_jitter > 0 else 0.0
            lines.append(RotatedBox(b.cx + dx, b.cy + dy, b.w, b.h, math.radians(da)))
        out.append(_Para(p.pattern, lines))
    return out


def _paragraphs_disjoint(paras: list[_Para]) -> bool:
    spans = []
    for p in paras:
        b = containing_box(p.lines, 0.0)
        spans.append((b.cx - b.w / 2, b.cx + b.w / 2, b.cy - b.h / 2, b.cy + b.h / 2))
    a = np.array(spans)
    order = np.argsort(a[:, 2], kind="stable")
    a = a[order]
    # candidates: later boxes starting above this one's bottom
    end = np.searchsorted(a[:, 2], a[:, 3], side="left")
    for i in range(len(a)):
        rest = a[i + 1:end[i]]
        if len(rest) and np.any((rest[:, 0] < a[i, 1]) & (a[i, 0] < rest[:, 1])
                                & (rest[:, 2] < a[i, 3])):
            return False
    return True


def _words_for_line(rng, box: RotatedBox, cfg: SynthConfig) -> list[tuple[float, float, float]]:
    """Word centers along the line axis and widths, in the line frame."""
    k = int(rng.integers(cfg.words_per_line[0], cfg.words_per_line[1] + 1))
    gap = min(4.0, box.w / (4 * k))
    seg = (box.w - gap * (k - 1)) / k
    left = -box.w / 2
    return [(left + i * (seg + gap) + seg / 2, seg, box.h) for i in range(k)]


def generate(cfg: SynthConfig) -> tuple[Document, GroundTruth]:
    """Build a document and its ground truth from ``cfg``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    paras, page_w, page_h = _layout(rng, cfg)
    if cfg.page_size is not None and (page_w > cfg.page_size[0] or page_h > cfg.page_size[1]):
        raise SynthError(
            f"layout needs {page_w:.0f}x{page_h:.0f} px but page is "
            f"{cfg.page_size[0]:.0f}x{cfg.page_size[1]:.0f}")

    jitter = cfg.jitter
    for _attempt in range(10):
        placed = _jittered(rng, paras, jitter, cfg.angle_jitter_deg)
        ok = _paragraphs_disjoint(placed)
        if ok and cfg.kind == MIXED:
            col = [b for p in placed if p.pattern == COL for b in p.lines]
            row = [b for p in placed if p.pattern == ROW for b in p.lines]
            ok = not _aabb_overlap(col, row)
        if ok:
            break
        jitter *= 0.5
    else:
        raise SynthError("could not place paragraphs without overlap")

    theta = math.radians(cfg.rotation_deg)
    pw, ph = cfg.page_size or (page_w, page_h)
    ox, oy = pw / 2, ph / 2

    # OCR emission order: paragraphs shuffled, lines within a paragraph kept
    emit = rng.permutation(len(placed)).tolist()
    word_layout = {(p, k): _words_for_line(rng, b, cfg)
                   for p in emit for k, b in enumerate(placed[p].lines)}

    lines: list[TextLine] = []
    line_paragraph: dict[int, int] = {}
    paragraph_words: dict[int, list[int]] = {p: [] for p in range(len(placed))}
    paragraph_lines: dict[int, list[RotatedBox]] = {p: [] for p in range(len(placed))}
    word_id = 0
    for p in emit:
        for k, box in enumerate(placed[p].lines):
            c, s = math.cos(box.angle), math.sin(box.angle)
            words = []
            for u, w, h in word_layout[(p, k)]:
                wb = RotatedBox(box.cx + c * u, box.cy + s * u, w, h, box.angle)
                words.append(Word(word_id, f"w{word_id:05d}", rotate_about(wb, theta, ox, oy)))
                paragraph_words[p].append(word_id)
                word_id += 1
            line_box = rotate_about(box, theta, ox, oy)
            lid = len(lines)
            lines.append(TextLine(lid, line_box, tuple(words)))
            line_paragraph[lid] = p
            paragraph_lines[p].append(line_box)

    truth = GroundTruth(
        line_paragraph=line_paragraph,
        paragraph_pattern={p: placed[p].pattern for p in range(len(placed))},
        paragraph_order=list(range(len(placed))),
        paragraph_words=paragraph_words,
        paragraph_boxes={p: containing_box(paragraph_lines[p]) for p in range(len(placed))},
    )
    return Document(tuple(lines), cfg.name), truth


def gen_columns(cfg: SynthConfig) -> tuple[Document, GroundTruth]:
    return generate(replace(cfg, kind=COLUMNS))


def gen_table(cfg: SynthConfig) -> tuple[Document, GroundTruth]:
    return generate(replace(cfg, kind=TABLE))


def gen_mixed(cfg: SynthConfig) -> tuple[Document, GroundTruth]:
    return generate(replace(cfg, kind=MIXED))


def truth_line_order(doc: Document, truth: GroundTruth) -> list[int]:
    """Lines in reading order: paragraphs in truth order, lines in OCR order."""
    by_para = truth.paragraph_lines()
    pos = {ln.id: k for k, ln in enumerate(doc.lines)}
    return [lid for p in truth.paragraph_order for lid in sorted(by_para.get(p, []), key=pos.get)]
