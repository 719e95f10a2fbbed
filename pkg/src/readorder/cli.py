"""Command-line interface.

Exit codes: 0 success, 1 internal error, 2 invalid input, 3 inputs that are
valid on their own but disagree with each other (unknown ids, missing
results).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .document import PATTERNS, Document
from .labeling import COVER_FRACTION, UNKNOWN, binary_label, label_patterns
from .metrics import EvalDocument, EvaluationError, evaluate, format_table
from .ordering import OrderConfig, ReadingOrderResult, cluster_and_sort
from .render import render_svg
from .signals import (
    THRESHOLD,
    PredictionError,
    PredictionMismatch,
    constant_predictor,
    feature_matrix,
    load_predictions,
    oracle_predictor,
    predictions_to_dict,
)
from .skeleton import build_skeleton
from .synthgen import KINDS, SynthConfig, SynthError, generate

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_MISMATCH = 3


class UsageError(ValueError):
    pass


# -- shared steps -------------------------------------------------------------

def _config(args) -> OrderConfig:
    return OrderConfig(edge_threshold=args.threshold, pattern_threshold=args.threshold,
                       containment=args.T, max_merge_edge_length=args.max_merge_length)


def _predictions(args, doc: Document, graph):
    if args.baseline and args.predictions:
        raise UsageError("--baseline and --predictions are mutually exclusive")
    if args.baseline:
        return constant_predictor(doc, graph, args.baseline, same_para=False)
    if not args.predictions:
        raise UsageError("one of --predictions or --baseline is required")
    data = io.read_predictions_file(args.predictions)
    try:
        return load_predictions(doc, graph, data)
    except PredictionMismatch as exc:
        raise io.ConsistencyError(f"{args.predictions}: {exc}") from exc
    except PredictionError as exc:
        raise io.FormatError(args.predictions, "", str(exc)) from exc


def _run(args):
    doc = io.load_document(args.lines)
    graph = build_skeleton(doc.lines)
    preds = _predictions(args, doc, graph)
    if not doc.lines:
        return doc, None
    return doc, cluster_and_sort(doc, preds, _config(args), graph)


# -- subcommands --------------------------------------------------------------

def cmd_order(args) -> int:
    doc, trace = _run(args)
    result = trace.result if trace is not None else ReadingOrderResult()
    io.write_json(args.out, io.result_to_dict(result, doc.id))
    if args.svg:
        io.write_text(args.svg, render_svg(doc, result, doc.id))
    return EXIT_OK


def cmd_tree(args) -> int:
    doc, trace = _run(args)
    if trace is None:
        out = {"doc_id": doc.id, "paragraphs": [], "root": None, "clusters": []}
    else:
        out = {"doc_id": doc.id}
        out["paragraphs"] = [
            {"id": p.id, "pattern": p.pattern, "line_ids": list(p.line_ids), "box": io.box_to_dict(p.box)}
            for p in trace.paragraphs
        ]
        out.update(trace.tree.to_dict())
    io.write_json(args.out, out)
    return EXIT_OK


def cmd_graph(args) -> int:
    doc = io.load_document(args.lines)
    out = {"doc_id": doc.id}
    out.update(io.graph_to_dict(build_skeleton(doc.lines)))
    io.write_json(args.out, out)
    return EXIT_OK


def cmd_features(args) -> int:
    doc = io.load_document(args.lines)
    io.write_json(args.out, feature_matrix(doc))
    return EXIT_OK


def cmd_label(args) -> int:
    _, groups = io.load_groups(args.annotations)
    page = None
    if args.scope == "page":
        seen: dict[int, object] = {}
        for g in groups:
            for pid, box in zip(g.paragraph_ids, g.boxes):
                seen.setdefault(pid, box)
        page = list(seen.items())
    labels = []
    for g in groups:
        for pid, pat in label_patterns(g, page, args.cover):
            if pat == UNKNOWN and args.unknown == "drop":
                continue
            if args.unknown == "col":
                pat = binary_label(pat)
            labels.append((pid, pat))
    io.write_json(args.out, io.labels_to_list(labels))
    return EXIT_OK


def _load_results(path: str) -> tuple[str, dict[str, ReadingOrderResult]]:
    """A method's results: a result file, a file with a ``results`` list, or a directory."""
    p = Path(path)
    name = p.stem
    items: list[tuple[str, object]] = []
    if p.is_dir():
        files = sorted(f for f in p.glob("*.json"))
        items = [(str(f), io.read_json(f)) for f in files]
    else:
        data = io.read_json(p)
        if isinstance(data, dict) and "results" in data:
            name = data.get("method", name)
            if not isinstance(data["results"], list):
                raise io.FormatError(path, "$.results", "expected an array")
            items = [(f"{path}$.results[{k}]", d) for k, d in enumerate(data["results"])]
        else:
            items = [(path, data)]
    out: dict[str, ReadingOrderResult] = {}
    for src, data in items:
        doc_id, res = io.result_from_dict(data, src)
        if doc_id is None:
            raise io.FormatError(src, "$.doc_id", "result needs a doc_id for evaluation")
        if doc_id in out:
            raise io.ConsistencyError(f"{src}: second result for document {doc_id!r}")
        out[doc_id] = res
    return str(name), out


def cmd_eval(args) -> int:
    dataset = io.load_dataset(args.dataset)
    if not dataset:
        raise UsageError(f"{args.dataset}: dataset has no documents")
    items = [EvalDocument(doc, groups) for doc, groups in dataset]
    reports = {}
    for path in args.results:
        name, results = _load_results(path)
        for item in items:
            if item.id not in results:
                raise io.ConsistencyError(f"{path}: no result for document {item.id!r}")
            io.check_result_matches(results[item.id], item.doc, path)
        extra = sorted(set(results) - {it.id for it in items})
        if extra:
            raise io.ConsistencyError(f"{path}: result for unknown document {extra[0]!r}")
        if name in reports:
            name = path
        reports[name] = evaluate(items, results)
    io.write_json(args.out, {"methods": [dict(method=n, **r.to_dict()) for n, r in reports.items()]})
    print(format_table(reports))
    return EXIT_OK


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    page = (args.page_width, args.page_height) if args.page_width and args.page_height else None
    entries = []
    for k in range(args.count):
        cfg = SynthConfig(
            kind=args.kind, seed=args.seed + k, n_columns=args.n_columns, n_rows=args.n_rows,
            n_cols=args.n_cols, rotation_deg=args.rotation, jitter=args.jitter, page_size=page,
        )
        doc, truth = generate(cfg)
        doc_dict = io.document_to_dict(doc)
        # predictions must match the graph built from the file as written
        stored = io.document_from_dict(json.loads(io.dumps(doc_dict)), "<synth>")
        graph = build_skeleton(stored.lines)
        name = doc.id
        io.write_json(out_dir / f"{name}.lines.json", doc_dict)
        io.write_json(out_dir / f"{name}.annotations.json", io.annotations_to_dict(doc.id, truth))
        io.write_json(out_dir / f"{name}.predictions.json",
                      predictions_to_dict(oracle_predictor(stored, graph, truth)))
        entries.append(io.dataset_entry(name, f"{name}.lines.json", f"{name}.annotations.json"))
    io.write_json(out_dir / "dataset.json", {"documents": entries})
    return EXIT_OK


def cmd_render(args) -> int:
    doc = io.load_document(args.lines)
    _, result = io.load_result(args.result)
    io.check_result_matches(result, doc, args.result)
    io.write_text(args.out, render_svg(doc, result, doc.id))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _prob(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _pipeline_flags(p: argparse.ArgumentParser):
    p.add_argument("--lines", required=True, help="document JSON")
    p.add_argument("--predictions", help="prediction JSON (node and edge scores)")
    p.add_argument("--baseline", choices=PATTERNS,
                   help="ignore predictions: one paragraph per line, every node this pattern")
    p.add_argument("--T", type=_prob, default=0.9, help="cluster containment ratio (default 0.9)")
    p.add_argument("--threshold", type=_prob, default=THRESHOLD, help="score threshold (default 0.5)")
    p.add_argument("--max-merge-length", type=float, default=None,
                   help="longest edge allowed to merge column-wise clusters")
    p.add_argument("--out", required=True)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="readorder", description="Reading order for OCR text lines.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("order", help="compute the reading order of a document")
    _pipeline_flags(p)
    p.add_argument("--svg", help="also write an SVG picture here")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("tree", help="write paragraphs and the cluster hierarchy")
    _pipeline_flags(p)
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("graph", help="write the proximity graph with edge boxes")
    p.add_argument("--lines", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("features", help="write per-line spatial feature vectors")
    p.add_argument("--lines", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("label", help="derive col/row labels from annotated order")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scope", choices=("group", "page"), default="group",
                   help="paragraphs that can turn a horizontal step vertical")
    p.add_argument("--cover", type=_prob, default=COVER_FRACTION,
                   help="area fraction that counts as covering a paragraph")
    p.add_argument("--unknown", choices=("keep", "drop", "col"), default="keep",
                   help="what to do with paragraphs whose pattern is unknown")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="score results against annotated groups")
    p.add_argument("--dataset", required=True)
    p.add_argument("--results", required=True, action="append",
                   help="results of one method (file or directory); repeat to compare methods")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic documents with ground truth")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--n-columns", type=int, default=2)
    p.add_argument("--n-rows", type=int, default=4)
    p.add_argument("--n-cols", type=int, default=3)
    p.add_argument("--rotation", type=float, default=0.0, help="degrees, in (-90, 90)")
    p.add_argument("--jitter", type=float, default=1.0)
    p.add_argument("--page-width", type=float)
    p.add_argument("--page-height", type=float)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="draw a result as SVG")
    p.add_argument("--lines", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="readorder: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.FormatError, UsageError, SynthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (io.ConsistencyError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
