"""Rasterize the stroke descriptions below into src/glyphnet/glyphs/<letter>.txt.

Run from the repository root; the generated text files are the embedded
templates and are committed, so this script only matters when editing a glyph.
"""

import math
import sys
from pathlib import Path

import numpy as np

SIDE = 50
PEN = 2.6  # stroke half-width in pixels


def line(*pts):
    return [tuple(map(float, p)) for p in pts]


def arc(cx, cy, rx, ry, t0, t1, steps=64):
    # angles in degrees, counter-clockwise on screen (y grows downward)
    ts = np.linspace(math.radians(t0), math.radians(t1), steps)
    return [(cx + rx * math.cos(t), cy - ry * math.sin(t)) for t in ts]


def dot(cx, cy):
    return [(float(cx), float(cy))]


STROKES = {
    "a": [arc(24, 33, 9, 10, 0, 360), line((33, 22), (33, 44))],
    "b": [line((14, 4), (14, 44)), arc(24, 33, 10, 10, 0, 360)],
    "c": [arc(26, 31, 12, 13, 45, 315)],
    "d": [arc(24, 33, 10, 10, 0, 360), line((34, 4), (34, 44))],
    "e": [line((14, 31), (38, 31)), arc(26, 31, 12, 13, 0, 320)],
    "f": [line((22, 12), (22, 44)), arc(30, 12, 8, 7, 180, 20), line((13, 21), (32, 21))],
    "g": [arc(24, 28, 9, 9, 0, 360), line((33, 19), (33, 42)), arc(24, 42, 9, 6, 0, -160)],
    "h": [line((14, 4), (14, 44)), arc(24, 29, 10, 8, 180, 0), line((34, 29), (34, 44))],
    "i": [line((25, 20), (25, 44)), dot(25, 9)],
    "j": [line((28, 20), (28, 42)), arc(21, 42, 7, 6, 0, -180), dot(28, 9)],
    "k": [line((14, 4), (14, 44)), line((34, 20), (16, 33)), line((21, 30), (35, 44))],
    "l": [line((24, 4), (24, 40)), arc(29, 40, 5, 4, 180, 300)],
    "m": [line((10, 20), (10, 44)), arc(17, 27, 7, 6, 180, 0), line((24, 27), (24, 44)),
          arc(31, 27, 7, 6, 180, 0), line((38, 27), (38, 44))],
    "n": [line((14, 20), (14, 44)), arc(24, 29, 10, 8, 180, 0), line((34, 29), (34, 44))],
    "o": [arc(25, 32, 11, 12, 0, 360)],
    "p": [line((14, 20), (14, 48)), arc(24, 29, 10, 9, 0, 360)],
    "q": [line((34, 20), (34, 48)), arc(24, 29, 10, 9, 0, 360)],
    "r": [line((16, 20), (16, 44)), arc(26, 29, 10, 7, 180, 45)],
    "s": [arc(25, 25, 9, 6, 20, 270), arc(25, 37, 9, 6, 90, -160)],
    "t": [line((22, 8), (22, 40)), arc(28, 40, 6, 4, 180, 300), line((13, 20), (33, 20))],
    "u": [line((14, 20), (14, 34)), arc(24, 34, 10, 10, 180, 360), line((34, 20), (34, 44))],
    "v": [line((12, 20), (25, 44), (38, 20))],
    "w": [line((8, 20), (16, 44), (25, 26), (34, 44), (42, 20))],
    "x": [line((12, 20), (38, 44)), line((38, 20), (12, 44))],
    "y": [line((12, 20), (25, 38)), line((38, 20), (18, 48))],
    "z": [line((12, 20), (38, 20), (12, 44), (38, 44))],
}


def _segment_distance(px, py, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        t = np.zeros_like(px)
    else:
        t = np.clip(((px - ax) * dx + (py - ay) * dy) / denom, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def render(strokes):
    py, px = np.mgrid[0:SIDE, 0:SIDE].astype(float)
    dist = np.full((SIDE, SIDE), np.inf)
    for pts in strokes:
        if len(pts) == 1:
            dist = np.minimum(dist, np.hypot(px - pts[0][0], py - pts[0][1]) - 1.0)
            continue
        for a, b in zip(pts, pts[1:]):
            dist = np.minimum(dist, _segment_distance(px, py, a, b))
    return (dist <= PEN).astype(np.uint8)


def main(out_dir="src/glyphnet/glyphs"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for letter, strokes in STROKES.items():
        bits = render(strokes)
        text = "".join("".join("#" if b else "." for b in row) + "\n" for row in bits)
        (out / f"{letter}.txt").write_text(text)


if __name__ == "__main__":
    main(*sys.argv[1:])
