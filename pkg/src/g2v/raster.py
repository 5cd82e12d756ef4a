"""Integer 2-D rasterization primitives: Bresenham lines, filled and hollow
disks. No anti-aliasing, so output bytes are identical across platforms."""

from __future__ import annotations

import numpy as np


def bresenham(x0: int, y0: int, x1: int, y1: int):
    """Integer line pixels from (x0,y0) to (x1,y1), inclusive."""
    pts = []
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        pts.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return pts


def draw_line(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color,
              width: int = 3) -> None:
    """Stamp a (width x width) block on every Bresenham pixel of the segment.

    img is HxWx3 uint8, indexed [y, x]. width=3 keeps every painted pixel
    within sqrt(2) px of the ideal segment.
    """
    h, w = img.shape[:2]
    r = width // 2
    col = np.asarray(color, dtype=np.uint8)
    for x, y in bresenham(x0, y0, x1, y1):
        ya, yb = max(0, y - r), min(h, y + r + 1)
        xa, xb = max(0, x - r), min(w, x + r + 1)
        if ya < yb and xa < xb:
            img[ya:yb, xa:xb] = col


def draw_disk(img: np.ndarray, cx: int, cy: int, radius: int, color) -> None:
    """Filled disk: pixels with (x-cx)^2 + (y-cy)^2 <= radius^2."""
    h, w = img.shape[:2]
    ya, yb = max(0, cy - radius), min(h, cy + radius + 1)
    xa, xb = max(0, cx - radius), min(w, cx + radius + 1)
    if ya >= yb or xa >= xb:
        return
    ys = np.arange(ya, yb)[:, None]
    xs = np.arange(xa, xb)[None, :]
    mask = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius
    img[ya:yb, xa:xb][mask] = np.asarray(color, dtype=np.uint8)


def draw_ring(img: np.ndarray, cx: int, cy: int, radius: int, color) -> None:
    """Hollow disk: a 1-pixel annulus at the given radius."""
    h, w = img.shape[:2]
    ya, yb = max(0, cy - radius), min(h, cy + radius + 1)
    xa, xb = max(0, cx - radius), min(w, cx + radius + 1)
    if ya >= yb or xa >= xb:
        return
    ys = np.arange(ya, yb)[:, None]
    xs = np.arange(xa, xb)[None, :]
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    inner = max(radius - 1, 0)
    mask = (d2 <= radius * radius) & (d2 > inner * inner)
    img[ya:yb, xa:xb][mask] = np.asarray(color, dtype=np.uint8)
