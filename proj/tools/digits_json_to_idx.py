#!/usr/bin/env python3
"""Convert the digit JSON files shipped with the npm `mnist` package to IDX.

Usage: digits_json_to_idx.py <package/src/digits> <out_dir> [--test-per-class N]

Each <d>.json holds {"data": [...]} with 784 floats per image in [0, 1].
Images are interleaved across classes (round-robin) so any prefix is close to
class balanced. The last N images of every class form the test split.
"""
import argparse
import json
import os
import struct


def write_idx(path, magic, dims, payload):
    with open(path, "wb") as fh:
        fh.write(struct.pack(">I", magic))
        for d in dims:
            fh.write(struct.pack(">I", d))
        fh.write(payload)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--test-per-class", type=int, default=100)
    args = ap.parse_args()

    per_class = []
    for d in range(10):
        with open(os.path.join(args.digits_dir, f"{d}.json")) as fh:
            raw = json.load(fh)["data"]
        n = len(raw) // 784
        imgs = [bytes(min(255, max(0, round(v * 255))) for v in raw[i * 784:(i + 1) * 784]) for i in range(n)]
        per_class.append(imgs)

    def interleave(groups):
        out = []
        longest = max(len(g) for g in groups)
        for i in range(longest):
            for label, g in enumerate(groups):
                if i < len(g):
                    out.append((label, g[i]))
        return out

    k = args.test_per_class
    train = interleave([g[:-k] for g in per_class])
    test = interleave([g[-k:] for g in per_class])
    os.makedirs(args.out_dir, exist_ok=True)
    for name, rows in (("train", train), ("t10k", test)):
        write_idx(os.path.join(args.out_dir, f"{name}-images-idx3-ubyte"), 0x00000803,
                  (len(rows), 28, 28), b"".join(img for _, img in rows))
        write_idx(os.path.join(args.out_dir, f"{name}-labels-idx1-ubyte"), 0x00000801,
                  (len(rows),), bytes(label for label, _ in rows))
        print(f"{name}: {len(rows)} images")


if __name__ == "__main__":
    main()
