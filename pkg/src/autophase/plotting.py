"""Minimal raster plotting for dependency-free figure previews.

Only what the figure commands need: a log-x line plot of visibility curves
rendered into an RGB array, written as PPM by :func:`csvio.write_ppm`.
"""
from __future__ import annotations

import math

import numpy as np

BACKGROUND = (255, 255, 255)
AXIS = (0, 0, 0)
GRIDLINE = (220, 220, 220)


def _draw_segment(img, x0, y0, x1, y1, color, width):
    n = int(max(abs(x1 - x0), abs(y1 - y0))) * 2 + 2
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    h, w = img.shape[:2]
    r = (width - 1) / 2
    for dx in np.arange(-r, r + 1):
        for dy in np.arange(-r, r + 1):
            px = np.clip(np.round(xs + dx).astype(int), 0, w - 1)
            py = np.clip(np.round(ys + dy).astype(int), 0, h - 1)
            img[py, px] = color


def render_curves(curves, size=(480, 320), margin=40, y_range=(0.0, 1.0)) -> np.ndarray:
    """Plot ``(x, y, color, width)`` tuples on a log-x / linear-y canvas.

    Decade gridlines are drawn in light grey; the frame in black.
    """
    width, height = size
    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    xs = np.concatenate([np.asarray(c[0], dtype=float) for c in curves])
    lx0, lx1 = math.floor(np.log10(xs.min())), math.ceil(np.log10(xs.max()))
    if lx1 == lx0:
        lx1 += 1
    y0, y1 = y_range
    left, right, top, bottom = margin, width - margin // 2, margin // 2, height - margin

    def px(x):
        return left + (np.log10(x) - lx0) / (lx1 - lx0) * (right - left)

    def py(y):
        return bottom - (np.asarray(y) - y0) / (y1 - y0) * (bottom - top)

    for decade in range(lx0, lx1 + 1):
        gx = px(10.0 ** decade)
        _draw_segment(img, gx, top, gx, bottom, GRIDLINE, 1)
    for frac in (0.25, 0.5, 0.75):
        gy = py(y0 + frac * (y1 - y0))
        _draw_segment(img, left, gy, right, gy, GRIDLINE, 1)
    for x_a, y_a, x_b, y_b in ((left, top, right, top), (right, top, right, bottom),
                               (right, bottom, left, bottom), (left, bottom, left, top)):
        _draw_segment(img, x_a, y_a, x_b, y_b, AXIS, 1)
    for x, y, color, line_width in curves:
        cx, cy = px(np.asarray(x, dtype=float)), py(np.clip(y, y0, y1))
        for k in range(len(cx) - 1):
            _draw_segment(img, cx[k], cy[k], cx[k + 1], cy[k + 1], color, line_width)
    return img
