"""Break-and-fit linear Bezier approximation of per-pixel temporal trajectories.

A trajectory is the sequence of values one pixel takes across the frames of
a video, shape ``(n,)`` for intensity data or ``(n, C)`` for C-channel data.
Fitting keeps a subset of frames verbatim (the *keypixels*) and replaces
everything in between by the straight line joining neighbouring keypixels,
rounded back to 8-bit samples.

Two fitters live here:

* :func:`fit_trajectory` handles one trajectory and follows the worst-segment-
  first loop literally, with a heap keyed by segment MSE.
* :func:`fit_keypixel_mask` fits many trajectories at once with numpy. It
  splits every violating segment in the same pass. Splits are local to a
  segment, so the final keypixel set does not depend on the order in which
  segments are processed and both fitters agree exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CorruptInput, InvalidArgument

DEFAULT_LAMBDA = 100.0
DEFAULT_DELTA = 12


@dataclass(frozen=True)
class FitConfig:
    """Fitting parameters.

    ``lambda_limit`` bounds the mean squared error of every segment, in
    squared intensity units. ``delta`` is the spacing of the initial keypixel
    grid, in frames.
    """

    lambda_limit: float = DEFAULT_LAMBDA
    delta: int = DEFAULT_DELTA

    def __post_init__(self):
        lam = float(self.lambda_limit)
        if math.isnan(lam) or lam < 0:
            raise InvalidArgument(f"lambda_limit must be >= 0, got {self.lambda_limit!r}")
        if int(self.delta) != self.delta or self.delta < 1:
            raise InvalidArgument(f"delta must be a positive integer, got {self.delta!r}")
        object.__setattr__(self, "lambda_limit", lam)
        object.__setattr__(self, "delta", int(self.delta))


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    mse: float


@dataclass(frozen=True)
class FitResult:
    """Keypixel frame indices of one trajectory and the samples stored there.

    ``values`` has shape ``(k,)`` for 1-D trajectories and ``(k, C)``
    otherwise, mirroring the trajectory that was fitted.
    """

    keypixels: tuple[int, ...]
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, FitResult):
            return NotImplemented
        return self.keypixels == other.keypixels and np.array_equal(self.values, other.values)

    def __len__(self):
        return len(self.keypixels)


def as_points(traj) -> np.ndarray:
    """Validate a trajectory and return it as an ``(n, C)`` int64 array."""
    arr = np.asarray(traj)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgument(f"trajectory must have shape (n,) or (n, C) with n >= 1, got {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(arr == np.round(arr)):
            raise InvalidArgument("trajectory samples must be integers")
    elif arr.dtype.kind not in "iub":
        raise InvalidArgument(f"unsupported trajectory dtype {arr.dtype}")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() > 255:
        raise InvalidArgument("trajectory samples must lie in [0, 255]")
    return arr


def interpolate_segment(p_start, p_end, num_points: int) -> np.ndarray:
    """Real-valued points on the line from ``p_start`` to ``p_end``.

    Point ``k`` sits at parameter ``t = k / (num_points - 1)``; the first and
    last points equal the endpoints exactly.
    """
    if num_points < 2:
        raise InvalidArgument(f"num_points must be >= 2, got {num_points}")
    a = np.asarray(p_start, dtype=np.float64)
    b = np.asarray(p_end, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument("endpoints must have the same number of channels")
    span = num_points - 1
    k = np.arange(num_points, dtype=np.float64).reshape((-1,) + (1,) * a.ndim)
    # one rounding step only: exact halves stay exact halves
    return (a * (span - k) + b * k) / span


def quantize(value) -> np.ndarray:
    """Round to the nearest integer (halves up) and clamp to [0, 255]."""
    v = np.floor(np.asarray(value, dtype=np.float64) + 0.5)
    return np.clip(v, 0, 255).astype(np.int64)


def _decoded_span(a: np.ndarray, b: np.ndarray, num_points: int) -> np.ndarray:
    # Integer form of quantize(interpolate_segment(a, b, num_points)).
    span = num_points - 1
    k = np.arange(num_points, dtype=np.int64)[:, None]
    return (2 * (a * (span - k) + b * k) + span) // (2 * span)


def initial_keypixels(n: int, delta: int) -> list[int]:
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if delta < 1:
        raise InvalidArgument(f"delta must be >= 1, got {delta}")
    kps = list(range(0, n, delta))
    if kps[-1] != n - 1:
        kps.append(n - 1)
    return kps


def _squared_errors(original: np.ndarray, decoded: np.ndarray) -> np.ndarray:
    return ((original - decoded) ** 2).sum(axis=1)


def segment_mse(original, keypixel_start, keypixel_end) -> float:
    """MSE of a slice against the quantized line through its end values.

    The mean runs over every frame of the slice, endpoints included.
    """
    pts = as_points(original)
    if len(pts) < 2:
        raise InvalidArgument("a segment needs at least 2 frames")
    a = np.asarray(keypixel_start, dtype=np.int64).reshape(-1)
    b = np.asarray(keypixel_end, dtype=np.int64).reshape(-1)
    if a.shape != (pts.shape[1],) or b.shape != a.shape:
        raise InvalidArgument("keypixel channel count does not match the slice")
    decoded = _decoded_span(a, b, len(pts))
    return float(_squared_errors(pts, decoded).sum() / len(pts))


def find_split_point(original, decoded) -> int:
    """Index of the largest squared distance, smallest index on ties."""
    o = as_points(original)
    d = np.asarray(decoded)
    d = d[:, None] if d.ndim == 1 else d
    if len(o) < 3:
        raise InvalidArgument("only segments of 3 or more frames can be split")
    if d.shape != o.shape:
        raise InvalidArgument(f"shape mismatch: {o.shape} vs {d.shape}")
    return int(np.argmax(_squared_errors(o, d)))


def _segment_stats(pts: np.ndarray, start: int, end: int) -> tuple[float, int]:
    # (mse, split index) of pts[start:end + 1]
    decoded = _decoded_span(pts[start], pts[end], end - start + 1)
    err = _squared_errors(pts[start:end + 1], decoded)
    return float(err.sum() / len(err)), start + int(np.argmax(err))


def fit_trajectory(traj, config: FitConfig = FitConfig()) -> FitResult:
    """Fit one trajectory by break-and-fit.

    Segments are kept in a heap ordered by (MSE descending, start ascending).
    The worst segment is split at its point of maximum error while its MSE
    exceeds ``config.lambda_limit``; only the two halves are re-evaluated.
    """
    pts = as_points(traj)
    n = len(pts)
    keys = initial_keypixels(n, config.delta)
    heap = []
    for s, e in zip(keys, keys[1:]):
        mse, split = _segment_stats(pts, s, e)
        heap.append((-mse, s, e, split))
    heapq.heapify(heap)
    added = []
    while heap and -heap[0][0] > config.lambda_limit:
        _, s, e, split = heapq.heappop(heap)
        added.append(split)
        for a, b in ((s, split), (split, e)):
            mse, sp = _segment_stats(pts, a, b)
            heapq.heappush(heap, (-mse, a, b, sp))
    kps = tuple(sorted(keys + added))
    values = np.asarray(traj)[list(kps)]
    return FitResult(kps, np.array(values, dtype=np.int64))


def decode_trajectory(result: FitResult, n: int) -> np.ndarray:
    """Rebuild all ``n`` samples of a fitted trajectory."""
    kps = list(result.keypixels)
    if not kps or kps[0] != 0 or kps[-1] != n - 1:
        raise CorruptInput(f"keypixels must start at 0 and end at {n - 1}")
    if any(b <= a for a, b in zip(kps, kps[1:])):
        raise CorruptInput("keypixel indices must be strictly increasing")
    vals = np.asarray(result.values, dtype=np.int64)
    flat = vals.ndim == 1
    pts = vals[:, None] if flat else vals
    if len(pts) != len(kps):
        raise CorruptInput("keypixel value count does not match index count")
    out = np.empty((n, pts.shape[1]), dtype=np.int64)
    out[0] = pts[0]
    for (s, e), a, b in zip(zip(kps, kps[1:]), pts, pts[1:]):
        out[s:e + 1] = _decoded_span(a, b, e - s + 1)
    return out[:, 0] if flat else out


def segments(traj, result: FitResult) -> list[Segment]:
    pts = as_points(traj)
    kps = result.keypixels
    return [Segment(s, e, _segment_stats(pts, s, e)[0]) for s, e in zip(kps, kps[1:])]


# ---------------------------------------------------------------------------
# batch fitting over many trajectories

def interpolate_masked(data: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Decode trajectories from their keypixel samples.

    ``data`` is ``(P, n, C)``; only entries where ``mask`` (``(P, n)``) is set
    are read. Every row of ``mask`` must have its first and last frame set.
    Returns the quantized piecewise-linear reconstruction as int64.
    """
    P, n, C = data.shape
    m = mask.reshape(-1)
    vals = data.reshape(-1, C).astype(np.int64)
    idx = np.arange(m.size)
    prev = np.maximum.accumulate(np.where(m, idx, 0))
    nxt = np.minimum.accumulate(np.where(m, idx, m.size)[::-1])[::-1]
    span = (nxt - prev)[:, None]
    k = (idx - prev)[:, None]
    a = vals[prev]
    b = vals[nxt]
    safe = np.maximum(span, 1)
    out = (2 * (a * (span - k) + b * k) + span) // (2 * safe)
    out = np.where(span == 0, a, out)
    return out.reshape(P, n, C)


def _split_pass(data: np.ndarray, mask: np.ndarray, lam: float) -> np.ndarray:
    # One parallel round: every segment with mse > lam gets its split point.
    P, n, C = data.shape
    decoded = interpolate_masked(data, mask)
    err = ((data.astype(np.int64) - decoded) ** 2).sum(axis=2).reshape(-1)
    m = mask.reshape(-1)
    starts = np.flatnonzero(m)
    lengths = np.diff(np.append(starts, m.size)) + 1
    sse = np.add.reduceat(err, starts)
    violating = sse / lengths > lam
    new = np.zeros(m.size, dtype=bool)
    if not violating.any():
        return new.reshape(P, n)
    seg = np.cumsum(m) - 1
    seg_max = np.maximum.reduceat(err, starts)
    cand = np.flatnonzero(violating[seg] & (err == seg_max[seg]))
    _, first = np.unique(seg[cand], return_index=True)
    new[cand[first]] = True
    return new.reshape(P, n)


def fit_keypixel_mask(data: np.ndarray, config: FitConfig = FitConfig()) -> np.ndarray:
    """Fit every trajectory in ``data`` (``(P, n)`` or ``(P, n, C)``).

    Returns a ``(P, n)`` boolean keypixel mask identical to running
    :func:`fit_trajectory` on each row.
    """
    arr = np.asarray(data)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[1] < 1:
        raise InvalidArgument(f"expected (P, n) or (P, n, C) data, got {arr.shape}")
    P, n, _ = arr.shape
    mask = np.zeros((P, n), dtype=bool)
    mask[:, initial_keypixels(n, config.delta)] = True
    active = np.arange(P)
    while active.size:
        new = _split_pass(arr[active], mask[active], config.lambda_limit)
        hit = new.any(axis=1)
        active = active[hit]
        mask[active] |= new[hit]
    return mask


def fit_result_from_mask(traj, mask_row: Sequence[bool]) -> FitResult:
    kps = tuple(int(i) for i in np.flatnonzero(mask_row))
    return FitResult(kps, np.asarray(traj, dtype=np.int64)[list(kps)])
