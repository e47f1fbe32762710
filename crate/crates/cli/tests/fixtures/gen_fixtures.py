"""Regenerates the CLI test fixtures.

rle_cases.json      masks with counts computed by pycocotools
three_entities.png  16-bit idmap written by Pillow
eval_gt.png, eval_pred.png, eval_oracle.json
                    5-entity pair scored by exhaustive assignment
"""

import itertools
import json
import random
from pathlib import Path

import numpy as np
from PIL import Image
from pycocotools import mask as mask_util

HERE = Path(__file__).parent
rng = random.Random(20241015)


def runs(mask):
    flat = mask.flatten(order="F")
    out, cur, n = [], 0, 0
    for v in flat:
        if v != cur:
            out.append(n)
            cur, n = v, 0
        n += 1
    out.append(n)
    return out


def rle_cases():
    cases = []
    shapes = [(1, 1), (3, 5), (17, 9), (40, 33), (64, 64)]
    for h, w in shapes:
        for density in (0.0, 0.1, 0.5, 0.9, 1.0):
            m = np.array([[rng.random() < density for _ in range(w)] for _ in range(h)], dtype=np.uint8)
            enc = mask_util.encode(np.asfortranarray(m))
            cases.append(
                {
                    "height": h,
                    "width": w,
                    "rows": ["".join(str(v) for v in row) for row in m],
                    "counts": runs(m),
                    "compact": enc["counts"].decode("ascii"),
                }
            )
    # Long runs exercise multi-character values and negative deltas.
    m = np.zeros((300, 200), dtype=np.uint8)
    m[10:290, 5:7] = 1
    m[0:3, 100:200] = 1
    enc = mask_util.encode(np.asfortranarray(m))
    cases.append(
        {
            "height": 300,
            "width": 200,
            "rows": ["".join(str(v) for v in row) for row in m],
            "counts": runs(m),
            "compact": enc["counts"].decode("ascii"),
        }
    )
    (HERE / "rle_cases.json").write_text(json.dumps(cases) + "\n")


def save_idmap(arr, name):
    Image.fromarray(arr.astype(np.uint16)).save(HERE / name)


def three_entities():
    ids = np.zeros((88, 88), dtype=np.uint16)
    ids[4:20, 4:20] = 1  # top-left
    ids[40:52, 60:80] = 2  # middle row, right
    yy, xx = np.mgrid[0:88, 0:88]
    ids[(yy - 74) ** 2 + (xx - 30) ** 2 <= 36] = 3  # bottom, left of center
    save_idmap(ids, "three_entities.png")


def iou(a, b):
    union = np.logical_or(a, b).sum()
    return np.logical_and(a, b).sum() / union if union else 0.0


def eval_pair():
    h, w = 64, 48
    gt = np.zeros((h, w), dtype=np.uint16)
    gt[2:20, 2:20] = 1
    gt[2:14, 24:46] = 2
    gt[26:40, 6:30] = 3
    gt[30:60, 34:44] = 4
    gt[46:62, 4:20] = 5
    pred = np.zeros((h, w), dtype=np.uint16)
    pred[3:22, 1:18] = 1  # good match for gt 1
    pred[2:14, 24:34] = 2  # half of gt 2
    pred[2:14, 34:46] = 3  # other half of gt 2
    pred[24:42, 8:32] = 4  # shifted gt 3
    pred[54:64, 34:46] = 5  # bottom of gt 4
    pred[44:50, 2:10] = 6  # clips gt 5
    save_idmap(gt, "eval_gt.png")
    save_idmap(pred, "eval_pred.png")

    g = [gt == k for k in range(1, 6)]
    p = [pred == k for k in range(1, 7)]
    mat = [[iou(a, b) for b in p] for a in g]
    best, best_perm = -1.0, None
    for perm in itertools.permutations(range(len(p)), len(g)):
        total = sum(mat[i][j] for i, j in enumerate(perm))
        if total > best:
            best, best_perm = total, perm
    per_entity = [mat[i][j] for i, j in enumerate(best_perm)]
    oracle = {
        "miou": best / len(g),
        "recall": sum(v >= 0.5 for v in per_entity) / len(g),
        "per_entity": per_entity,
        "pairs": [{"gt": i, "pred": j} for i, j in enumerate(best_perm)],
        "unmatched_pred": sorted(set(range(len(p))) - set(best_perm)),
    }
    (HERE / "eval_oracle.json").write_text(json.dumps(oracle, indent=2) + "\n")


if __name__ == "__main__":
    rle_cases()
    three_entities()
    eval_pair()
