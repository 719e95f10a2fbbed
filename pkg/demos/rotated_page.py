"""A tilted scan reads the same as a straight one.

Boxes are sorted in the frame of their circular-mean angle, so rotating the
whole page (and every box with it) leaves the order untouched.

    python3 demos/rotated_page.py
"""

from readorder import SynthConfig, build_skeleton, generate, oracle_predictor, read_order_pipeline


def order_for(angle):
    doc, truth = generate(SynthConfig(kind="mixed", seed=5, rotation_deg=angle))
    graph = build_skeleton(doc.lines)
    return read_order_pipeline(doc, oracle_predictor(doc, graph, truth), graph=graph).line_order


def main():
    upright = order_for(0)
    print(f"upright: {upright[:12]} ... ({len(upright)} lines)")
    for angle in (-60, -30, 15, 45, 75, 89):
        same = order_for(angle) == upright
        print(f"{angle:>4} deg: {'same order' if same else 'DIFFERENT'}")


if __name__ == "__main__":
    main()
