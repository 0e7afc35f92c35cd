"""Block-matching motion estimation used as a comparison baseline.

A motion vector ``(dx, dy)`` for the block at ``(y, x)`` means the block is
predicted by ``ref[y + dy, x + dx]``. Candidates that would move part of the
block outside the reference frame are never considered. Among equal-MAE
candidates the one with the smaller ``|dx| + |dy|`` wins, then the first in
raster order of ``(dy, dx)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

# large and small diamond patterns as (dx, dy)
LDSP = ((0, 0), (0, -2), (-1, -1), (1, -1), (-2, 0), (2, 0), (-1, 1), (1, 1), (0, 2))
SDSP = ((0, 0), (0, -1), (-1, 0), (1, 0), (0, 1))


@dataclass(frozen=True)
class BmaConfig:
    block_size: int = 16
    search_range: int = 7

    def __post_init__(self):
        if self.block_size < 1:
            raise InvalidArgument(f"block_size must be >= 1, got {self.block_size}")
        if self.search_range < 0:
            raise InvalidArgument(f"search_range must be >= 0, got {self.search_range}")


@dataclass
class MotionField:
    vectors: np.ndarray  # (blocks_y, blocks_x, 2) as (dx, dy)
    mae: np.ndarray  # (blocks_y, blocks_x)
    block_size: int

    @property
    def grid(self) -> tuple[int, int]:
        return self.vectors.shape[:2]


def _as_plane(frame) -> np.ndarray:
    arr = np.asarray(frame)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise InvalidArgument(f"block matching needs 1-channel frames, got shape {arr.shape}")
    return arr.astype(np.int64)


def _pair(ref, cur) -> tuple[np.ndarray, np.ndarray]:
    r, c = _as_plane(ref), _as_plane(cur)
    if r.shape != c.shape:
        raise InvalidArgument(f"frame geometry mismatch: {r.shape} vs {c.shape}")
    return r, c


def block_grid(height: int, width: int, block_size: int) -> tuple[list[int], list[int]]:
    """Top-left row and column offsets of every block."""
    return list(range(0, height, block_size)), list(range(0, width, block_size))


def block_mae(cur, ref_candidate) -> float:
    a = np.asarray(cur, dtype=np.float64)
    b = np.asarray(ref_candidate, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"block shapes differ: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).mean())


def candidate_order(w: int) -> list[tuple[int, int]]:
    """All ``(dx, dy)`` in the window, best tie-break rank first."""
    cands = [(dx, dy) for dy in range(-w, w + 1) for dx in range(-w, w + 1)]
    return sorted(cands, key=lambda v: (abs(v[0]) + abs(v[1]), v[1], v[0]))


def _tie_key(sad, dx, dy):
    return (sad, abs(dx) + abs(dy), dy, dx)


def _in_bounds(y0, x0, bh, bw, dx, dy, height, width) -> bool:
    return 0 <= y0 + dy and y0 + dy + bh <= height and 0 <= x0 + dx and x0 + dx + bw <= width


def full_search(ref, cur, config: BmaConfig = BmaConfig()) -> MotionField:
    """Exhaustive search over the ``±w`` window for every block."""
    r, c = _pair(ref, cur)
    h, w = c.shape
    bs = config.block_size
    rows, cols = block_grid(h, w, bs)
    heights = np.minimum(bs, h - np.array(rows))
    widths = np.minimum(bs, w - np.array(cols))
    areas = heights[:, None] * widths[None, :]
    best = np.full((len(rows), len(cols)), np.iinfo(np.int64).max, dtype=np.int64)
    vec = np.zeros((len(rows), len(cols), 2), dtype=np.int64)
    row0 = np.array(rows)
    col0 = np.array(cols)
    for dx, dy in candidate_order(config.search_range):
        ok_y = (row0 + dy >= 0) & (row0 + dy + heights <= h)
        ok_x = (col0 + dx >= 0) & (col0 + dx + widths <= w)
        if not ok_y.any() or not ok_x.any():
            continue
        diff = np.zeros((h, w), dtype=np.int64)
        ys, ye = max(0, -dy), min(h, h - dy)
        xs, xe = max(0, -dx), min(w, w - dx)
        diff[ys:ye, xs:xe] = np.abs(c[ys:ye, xs:xe] - r[ys + dy:ye + dy, xs + dx:xe + dx])
        sad = np.add.reduceat(np.add.reduceat(diff, rows, axis=0), cols, axis=1)
        better = ok_y[:, None] & ok_x[None, :] & (sad < best)
        best[better] = sad[better]
        vec[better] = (dx, dy)
    return MotionField(vec, best / areas, bs)


def _block_sad(r, c, y0, x0, bh, bw, dx, dy) -> int:
    return int(np.abs(c[y0:y0 + bh, x0:x0 + bw] - r[y0 + dy:y0 + dy + bh, x0 + dx:x0 + dx + bw]).sum())


def diamond_search(ref, cur, config: BmaConfig = BmaConfig()) -> MotionField:
    """Large-diamond steps until the centre wins, then one small-diamond step."""
    r, c = _pair(ref, cur)
    h, w = c.shape
    bs, rng = config.block_size, config.search_range
    rows, cols = block_grid(h, w, bs)
    vec = np.zeros((len(rows), len(cols), 2), dtype=np.int64)
    mae = np.zeros((len(rows), len(cols)))
    for bi, y0 in enumerate(rows):
        bh = min(bs, h - y0)
        for bj, x0 in enumerate(cols):
            bw = min(bs, w - x0)
            cache = {}

            def key(dx, dy):
                if (dx, dy) not in cache:
                    cache[(dx, dy)] = _block_sad(r, c, y0, x0, bh, bw, dx, dy)
                return _tie_key(cache[(dx, dy)], dx, dy)

            def best_around(cx, cy, pattern):
                found = []
                for px, py in pattern:
                    dx, dy = cx + px, cy + py
                    if max(abs(dx), abs(dy)) <= rng and _in_bounds(y0, x0, bh, bw, dx, dy, h, w):
                        found.append(key(dx, dy))
                return min(found)

            cx = cy = 0
            while True:
                k = best_around(cx, cy, LDSP)
                if (k[3], k[2]) == (cx, cy):
                    break
                cx, cy = k[3], k[2]
            k = best_around(cx, cy, SDSP)
            vec[bi, bj] = (k[3], k[2])
            mae[bi, bj] = k[0] / (bh * bw)
    return MotionField(vec, mae, bs)


def reconstruct(ref, field: MotionField, config: BmaConfig | None = None) -> np.ndarray:
    """Motion-compensated prediction of the current frame from ``ref``."""
    r = _as_plane(ref)
    h, w = r.shape
    bs = field.block_size if config is None else config.block_size
    rows, cols = block_grid(h, w, bs)
    if field.vectors.shape != (len(rows), len(cols), 2):
        raise InvalidArgument(f"motion field grid {field.vectors.shape[:2]} does not fit a {h}x{w} frame")
    out = np.empty_like(r)
    for bi, y0 in enumerate(rows):
        bh = min(bs, h - y0)
        for bj, x0 in enumerate(cols):
            bw = min(bs, w - x0)
            dx, dy = (int(v) for v in field.vectors[bi, bj])
            if not _in_bounds(y0, x0, bh, bw, dx, dy, h, w):
                raise InvalidArgument(f"vector ({dx}, {dy}) of block ({bi}, {bj}) leaves the frame")
            out[y0:y0 + bh, x0:x0 + bw] = r[y0 + dy:y0 + dy + bh, x0 + dx:x0 + dx + bw]
    return out.astype(np.uint8)
