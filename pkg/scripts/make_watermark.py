#!/usr/bin/env python3
"""Generate a random square watermark bitmap and save it as a PBM file."""
import argparse

import numpy as np

from gridmark.model_io import WatermarkBitmap, save_watermark


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--w", type=int, default=32, help="side length in bits")
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--out", required=True, help="output .pbm path")
    args = ap.parse_args(argv)

    bits = np.random.default_rng(args.seed).integers(
        0, 2, size=(args.w, args.w), dtype=np.uint8
    )
    save_watermark(WatermarkBitmap(bits), args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
