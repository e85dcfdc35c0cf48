"""Tiny rasterizer: filled disks and thick segments on a square canvas.

World coordinates span [-extent, extent] on both axes with y pointing up; pixel rows
run top to bottom. No anti-aliasing, so a frame is a pure function of the geometry.
"""

from __future__ import annotations

import numpy as np

# Per-body colours for RGB rendering; grayscale uses the luminance column.
COLORS: dict[str, tuple[float, float, float]] = {
    "body": (0.9, 0.9, 0.9),
    "pole": (0.85, 0.45, 0.2),
    "cart": (0.3, 0.55, 0.9),
    "agent": (0.95, 0.85, 0.25),
    "goal": (0.25, 0.8, 0.35),
    "rail": (0.35, 0.35, 0.35),
}
GRAY: dict[str, float] = {
    "body": 1.0,
    "pole": 1.0,
    "cart": 0.7,
    "agent": 1.0,
    "goal": 0.5,
    "rail": 0.25,
}


class Canvas:
    def __init__(self, size: int, channels: int, extent: float):
        self.size = size
        self.channels = channels
        self.extent = extent
        self.pixels = np.zeros((size, size, channels), dtype=np.float32)
        centers = (np.arange(size) + 0.5) / size * (2.0 * extent) - extent
        self._wx = centers[None, :]
        self._wy = -centers[:, None]

    def _paint(self, mask: np.ndarray, body: str) -> None:
        if self.channels == 3:
            self.pixels[mask] = COLORS[body]
        else:
            self.pixels[mask] = GRAY[body]

    def disk(self, x: float, y: float, radius: float, body: str) -> None:
        mask = (self._wx - x) ** 2 + (self._wy - y) ** 2 <= radius * radius
        self._paint(mask, body)

    def segment(self, x0: float, y0: float, x1: float, y1: float, width: float, body: str) -> None:
        dx, dy = x1 - x0, y1 - y0
        length2 = dx * dx + dy * dy
        px, py = self._wx - x0, self._wy - y0
        if length2 == 0.0:
            t = np.zeros_like(px * py)
        else:
            t = np.clip((px * dx + py * dy) / length2, 0.0, 1.0)
        dist2 = (px - t * dx) ** 2 + (py - t * dy) ** 2
        self._paint(dist2 <= (0.5 * width) ** 2, body)

    def box(self, x: float, y: float, half_w: float, half_h: float, body: str) -> None:
        mask = (np.abs(self._wx - x) <= half_w) & (np.abs(self._wy - y) <= half_h)
        self._paint(mask, body)
