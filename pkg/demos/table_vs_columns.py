"""Why a single reading pattern is not enough.

A page with a two-column article above a table is read twice: once with the
all-column-wise baseline (every line its own paragraph, everything read top
to bottom per column) and once with the oracle stand-in classifier. The
baseline walks down the table columns; the oracle reads the table row by row.

    python3 demos/table_vs_columns.py --out-dir /tmp/readorder-demo
"""

import argparse
from pathlib import Path

from readorder import EvalDocument, SynthConfig, build_skeleton, constant_predictor, evaluate, generate
from readorder import oracle_predictor, read_order_pipeline
from readorder.metrics import format_table
from readorder.render import render_svg


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--out-dir", default="demo-out")
    args = ap.parse_args()

    doc, truth = generate(SynthConfig(kind="mixed", seed=args.seed, n_rows=3, n_cols=3))
    graph = build_skeleton(doc.lines)
    print(f"{doc.id}: {len(doc.lines)} lines, {graph.n_edges} graph edges")

    runs = {
        "baseline": read_order_pipeline(doc, constant_predictor(doc, graph), graph=graph),
        "oracle": read_order_pipeline(doc, oracle_predictor(doc, graph, truth), graph=graph),
    }
    item = EvalDocument(doc, truth.groups())
    print(format_table({name: evaluate([item], {doc.id: r}) for name, r in runs.items()}))

    # the first few table lines show the difference best
    table_lines = {lid for lid, pid in truth.line_paragraph.items() if truth.paragraph_pattern[pid] == "row"}
    for name, r in runs.items():
        seq = [lid for lid in r.line_order if lid in table_lines][:9]
        print(f"{name:>8} table lines: {seq}")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, r in runs.items():
        (out / f"{name}.svg").write_text(render_svg(doc, r, f"{doc.id} {name}"))
    print(f"pictures in {out}/")


if __name__ == "__main__":
    main()
