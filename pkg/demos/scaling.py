"""Pipeline time against document size on a synthetic grid.

Prints wall time (best of three, cyclic collector off while timing) for
grids of 2,500 to 40,000 lines and the ratio to the previous size.

    python3 demos/scaling.py
"""

import gc
import timeit

from readorder import SynthConfig, build_skeleton, generate, oracle_predictor, read_order_pipeline


def main():
    prev = None
    for rows in (250, 500, 1000, 2000, 4000):
        doc, truth = generate(SynthConfig(kind="table", seed=1, n_rows=rows, n_cols=10, lines_per_cell=(1, 1)))
        preds = oracle_predictor(doc, build_skeleton(doc.lines), truth)
        gc.collect()
        t = min(timeit.repeat(lambda: read_order_pipeline(doc, preds), number=1, repeat=3))
        ratio = f"x{t / prev:.2f}" if prev else ""
        print(f"{len(doc.lines):>6} lines  {t:7.3f}s  {ratio}")
        prev = t


if __name__ == "__main__":
    main()
