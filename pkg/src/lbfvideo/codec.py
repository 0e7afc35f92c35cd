"""Whole-video encoding, the sentinel symbol stream, and the LBF1 container.

LBF1 layout (little-endian)::

    "LBF1" | version u8 | channels u8 | reserved u16 |
    width u32 | height u32 | frame_count u32 | delta u32 | lambda_limit f64 |
    per frame: bitmask (ceil(W*H/8) bytes, MSB first) + keypixel values

Keypixel values are written in raster order with channels interleaved.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CorruptInput, InvalidArgument, UnsupportedVersion, WrongFormat
from .trajectory import FitConfig, fit_keypixel_mask, interpolate_masked

MAGIC = b"LBF1"
VERSION = 1
SENTINEL = 256
_HEADER = struct.Struct("<4sBBHIIIId")


@dataclass(frozen=True, eq=False)
class VideoSequence:
    """8-bit video held as a ``(frames, height, width, channels)`` array."""

    frames: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.frames)
        if arr.ndim == 3:
            arr = arr[..., None]
        if arr.ndim != 4:
            raise InvalidArgument(f"video must be (n, H, W) or (n, H, W, C), got {arr.shape}")
        if arr.shape[0] < 1:
            raise InvalidArgument("video needs at least one frame")
        if arr.shape[3] not in (1, 3):
            raise InvalidArgument(f"channels must be 1 or 3, got {arr.shape[3]}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise InvalidArgument("samples must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        object.__setattr__(self, "frames", arr)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def channels(self) -> int:
        return self.frames.shape[3]

    @property
    def geometry(self) -> tuple[int, int, int, int]:
        return self.frames.shape

    def __eq__(self, other):
        if not isinstance(other, VideoSequence):
            return NotImplemented
        return np.array_equal(self.frames, other.frames)

    def trajectories(self) -> np.ndarray:
        """``(H*W, n, C)`` view ordered by pixel in raster order."""
        n, h, w, c = self.frames.shape
        return self.frames.reshape(n, h * w, c).transpose(1, 0, 2)


@dataclass(frozen=True, eq=False)
class EncodedVideo:
    width: int
    height: int
    channels: int
    frame_count: int
    delta: int
    lambda_limit: float
    masks: np.ndarray  # (frame_count, width*height) bool
    values: tuple  # per frame, uint8 array of popcount * channels samples

    def __eq__(self, other):
        if not isinstance(other, EncodedVideo):
            return NotImplemented
        head = (self.width, self.height, self.channels, self.frame_count, self.delta)
        other_head = (other.width, other.height, other.channels, other.frame_count, other.delta)
        if head != other_head:
            return False
        if struct.pack("<d", self.lambda_limit) != struct.pack("<d", other.lambda_limit):
            return False
        if not np.array_equal(self.masks, other.masks):
            return False
        return len(self.values) == len(other.values) and all(
            np.array_equal(a, b) for a, b in zip(self.values, other.values)
        )

    @property
    def pixels(self) -> int:
        return self.width * self.height

    @property
    def keypixel_count(self) -> int:
        return int(self.masks.sum())

    @property
    def keypixel_fraction(self) -> float:
        return self.keypixel_count / (self.frame_count * self.pixels)

    def validate(self):
        """Raise :class:`CorruptInput` unless the structure is decodable."""
        n, p = self.frame_count, self.pixels
        if self.masks.shape != (n, p):
            raise CorruptInput(f"mask shape {self.masks.shape} does not match header ({n}, {p})")
        if not self.masks[0].all() or not self.masks[-1].all():
            raise CorruptInput("first and last frames must be all keypixels")
        if len(self.values) != n:
            raise CorruptInput("value array count does not match frame count")
        for f, (m, v) in enumerate(zip(self.masks, self.values)):
            if len(v) != int(m.sum()) * self.channels:
                raise CorruptInput(f"frame {f}: value count {len(v)} does not match bitmask")


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return workers
    try:
        return int(os.environ.get("LBF_THREADS", "0"))
    except ValueError:
        raise InvalidArgument("LBF_THREADS must be an integer") from None


def encode_video(video: VideoSequence, config: FitConfig = FitConfig(), workers: int | None = None) -> EncodedVideo:
    """Fit every pixel's trajectory and pack the keypixels frame by frame.

    ``workers`` > 1 splits the pixels into chunks fitted on a thread pool;
    ``None`` reads ``LBF_THREADS`` (0 or unset means sequential). Output is
    identical for any worker count.
    """
    traj = video.trajectories()
    workers = _worker_count(workers)
    if workers > 1 and len(traj) > 1:
        chunks = np.array_split(np.arange(len(traj)), min(workers, len(traj)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: fit_keypixel_mask(traj[idx], config), chunks))
        mask = np.concatenate(parts, axis=0)
    else:
        mask = fit_keypixel_mask(traj, config)
    masks = np.ascontiguousarray(mask.T)
    c = video.channels
    flat = video.frames.reshape(video.frame_count, -1, c)
    values = tuple(flat[f][masks[f]].reshape(-1) for f in range(video.frame_count))
    return EncodedVideo(
        width=video.width,
        height=video.height,
        channels=c,
        frame_count=video.frame_count,
        delta=config.delta,
        lambda_limit=config.lambda_limit,
        masks=masks,
        values=values,
    )


def _keypixel_samples(encoded: EncodedVideo) -> np.ndarray:
    # (n, P, C) with keypixel samples in place and zeros elsewhere
    n, p, c = encoded.frame_count, encoded.pixels, encoded.channels
    full = np.zeros((n, p, c), dtype=np.uint8)
    for f in range(n):
        full[f][encoded.masks[f]] = np.asarray(encoded.values[f], dtype=np.uint8).reshape(-1, c)
    return full


def decode_video(encoded: EncodedVideo) -> VideoSequence:
    encoded.validate()
    n, c = encoded.frame_count, encoded.channels
    full = _keypixel_samples(encoded)
    decoded = interpolate_masked(full.transpose(1, 0, 2), encoded.masks.T)
    frames = decoded.transpose(1, 0, 2).reshape(n, encoded.height, encoded.width, c)
    return VideoSequence(frames.astype(np.uint8))


def symbol_stream(encoded: EncodedVideo) -> np.ndarray:
    """Frame-major, raster-order, channel-interleaved stream with 256 at non-keypixels."""
    c = encoded.channels
    stream = np.full((encoded.frame_count, encoded.pixels, c), SENTINEL, dtype=np.int16)
    for f in range(encoded.frame_count):
        stream[f][encoded.masks[f]] = np.asarray(encoded.values[f]).reshape(-1, c)
    return stream.reshape(-1)


def serialize(encoded: EncodedVideo) -> bytes:
    header = _HEADER.pack(
        MAGIC, VERSION, encoded.channels, 0,
        encoded.width, encoded.height, encoded.frame_count, encoded.delta,
        float(encoded.lambda_limit),
    )
    parts = [header]
    for m, v in zip(encoded.masks, encoded.values):
        parts.append(np.packbits(m).tobytes())
        parts.append(np.asarray(v, dtype=np.uint8).tobytes())
    return b"".join(parts)


def deserialize(data: bytes) -> EncodedVideo:
    data = bytes(data)
    if len(data) < len(MAGIC):
        raise CorruptInput(f"input too short ({len(data)} bytes)")
    if data[:4] != MAGIC:
        raise WrongFormat(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < _HEADER.size:
        raise CorruptInput("truncated header")
    _, version, channels, _reserved, width, height, n, delta, lam = _HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersion(f"container version {version} is not supported")
    if channels not in (1, 3):
        raise CorruptInput(f"invalid channel count {channels}")
    if n < 1 or width < 1 or height < 1 or delta < 1:
        raise CorruptInput("header has zero-sized fields")
    pixels = width * height
    mask_len = (pixels + 7) // 8
    masks = np.empty((n, pixels), dtype=bool)
    values = []
    pos = _HEADER.size
    for f in range(n):
        if pos + mask_len > len(data):
            raise CorruptInput(f"truncated bitmask in frame {f}")
        bits = np.frombuffer(data, dtype=np.uint8, count=mask_len, offset=pos)
        masks[f] = np.unpackbits(bits, count=pixels).astype(bool)
        pos += mask_len
        count = int(masks[f].sum()) * channels
        if pos + count > len(data):
            raise CorruptInput(f"truncated keypixel values in frame {f}")
        values.append(np.frombuffer(data, dtype=np.uint8, count=count, offset=pos).copy())
        pos += count
    if pos != len(data):
        raise CorruptInput(f"{len(data) - pos} trailing bytes after last frame")
    return EncodedVideo(width, height, channels, n, delta, lam, masks, tuple(values))


def keypixel_mask_frame(video: VideoSequence, encoded: EncodedVideo, frame_index: int) -> np.ndarray:
    """Frame ``frame_index`` with every non-keypixel painted white (255)."""
    if not 0 <= frame_index < encoded.frame_count:
        raise InvalidArgument(f"frame index {frame_index} out of range [0, {encoded.frame_count})")
    if video.frame_count != encoded.frame_count or video.frames.shape[1:3] != (encoded.height, encoded.width):
        raise InvalidArgument("video geometry does not match the encoding")
    frame = video.frames[frame_index].copy()
    keep = encoded.masks[frame_index].reshape(encoded.height, encoded.width)
    frame[~keep] = 255
    return frame
