"""Deterministic test sequences."""

import numpy as np


def talking_head(width=352, height=288, frames=44, seed=0):
    """Static textured background with a moving textured blob and sensor noise.

    Loosely mimics a head-and-shoulders clip: most pixels only carry noise,
    a central region carries motion.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    background = 90 + 50 * np.sin(xx / 23.0) * np.cos(yy / 31.0) + 20 * (xx / width)
    texture = rng.normal(0, 12, (height + 64, width + 64))
    out = np.empty((frames, height, width), dtype=np.uint8)
    for t in range(frames):
        cx = width / 2 + 30 * np.sin(t / 7.0)
        cy = height / 2 + 12 * np.cos(t / 9.0)
        blob = ((xx - cx) / 70.0) ** 2 + ((yy - cy) / 90.0) ** 2 < 1.0
        ox, oy = int(round(cx - width / 2)) + 32, int(round(cy - height / 2)) + 32
        face = 160 + texture[oy:oy + height, ox:ox + width]
        frame = np.where(blob, face, background) + rng.normal(0, 2.0, (height, width))
        out[t] = np.clip(np.round(frame), 0, 255).astype(np.uint8)
    return out


def random_video(rng, max_side=16, max_frames=40):
    """Small random video: random-walk or step-function pixel trajectories."""
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    n = int(rng.integers(1, max_frames + 1))
    c = int(rng.choice([1, 3]))
    if rng.random() < 0.5:
        steps = rng.integers(-20, 21, (n, h, w, c))
        data = np.cumsum(steps, axis=0) + rng.integers(0, 256, (1, h, w, c))
    else:
        jumps = rng.random((n, h, w, 1)) < 0.15
        levels = rng.integers(0, 256, (n, h, w, c))
        idx = np.maximum.accumulate(np.where(jumps, np.arange(n)[:, None, None, None], 0), axis=0)
        data = np.take_along_axis(levels, np.broadcast_to(idx, levels.shape), axis=0)
    return np.clip(data, 0, 255).astype(np.uint8)
