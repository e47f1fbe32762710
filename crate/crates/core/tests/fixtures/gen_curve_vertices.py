"""Regenerates curve_vertices.json with the `bezier` package (pip install bezier)."""
import json
import random

import bezier
import numpy as np


def vertices(b, e):
    mx = (b[0] + b[2]) / 2
    my = (b[1] + b[3]) / 2
    nodes = [
        [[b[0], mx, b[2]], [b[1], e[1], b[1]]],
        [[b[2], e[2], b[2]], [b[1], my, b[3]]],
        [[b[2], mx, b[0]], [b[3], e[3], b[3]]],
        [[b[0], e[0], b[0]], [b[3], my, b[1]]],
    ]
    out = []
    for n in nodes:
        curve = bezier.Curve(np.asfortranarray(n, dtype=float), degree=2)
        xs, ys = [], []
        for i in range(1, 19):
            p = curve.evaluate(i * 0.05)
            x, y = p[0][0], p[1][0]
            if x not in xs and y not in ys:
                out.append([x, y])
                xs.append(x)
                ys.append(y)
    return out


rng = random.Random(20240620)
cases = [([10, 10, 30, 30], [5, 5, 35, 35]), ([0, 0, 1, 1], [0, 0, 2, 2]), ([40, 7, 41, 90], [38, 0, 44, 100])]
for _ in range(40):
    x0, y0 = rng.randint(0, 400), rng.randint(0, 400)
    x1, y1 = x0 + rng.randint(1, 100), y0 + rng.randint(1, 100)
    ext = [max(0, x0 - rng.randint(0, 20)), max(0, y0 - rng.randint(0, 20)), x1 + rng.randint(0, 20), y1 + rng.randint(0, 20)]
    cases.append(([x0, y0, x1, y1], ext))

fixture = [{"bbox": b, "extended": e, "vertices": vertices(b, e)} for b, e in cases]
with open("curve_vertices.json", "w") as f:
    json.dump(fixture, f, indent=1)
