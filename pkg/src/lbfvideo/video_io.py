"""Readers and writers for raw 8-bit video, YUV4MPEG2 and PGM/PPM frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import VideoSequence
from .errors import CorruptInput, InvalidArgument, UnsupportedFormat, WrongFormat

Y4M_SIGNATURE = b"YUV4MPEG2"
# colour spaces whose luma plane is followed by two quarter-size chroma planes
_C420 = {"420", "420jpeg", "420paldv", "420mpeg2"}


@dataclass(frozen=True)
class RawVideoSpec:
    width: int
    height: int
    channels: int = 1
    frame_count: int | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgument(f"invalid raw geometry {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise InvalidArgument(f"channels must be 1 or 3, got {self.channels}")
        if self.frame_count is not None and self.frame_count < 1:
            raise InvalidArgument("frame_count must be >= 1")

    @property
    def frame_size(self) -> int:
        return self.width * self.height * self.channels


def read_raw(data: bytes, spec: RawVideoSpec) -> VideoSequence:
    size = spec.frame_size
    if len(data) == 0 or len(data) % size:
        raise CorruptInput(f"{len(data)} bytes is not a whole number of {size}-byte frames")
    n = len(data) // size
    if spec.frame_count is not None and spec.frame_count != n:
        raise CorruptInput(f"expected {spec.frame_count} frames, found {n}")
    arr = np.frombuffer(data, dtype=np.uint8).reshape(n, spec.height, spec.width, spec.channels)
    return VideoSequence(arr.copy())


def write_raw(video: VideoSequence) -> bytes:
    return np.ascontiguousarray(video.frames).tobytes()


def _parse_y4m_params(tokens: list[bytes]) -> dict[str, str]:
    params = {}
    for tok in tokens:
        if tok:
            params[chr(tok[0])] = tok[1:].decode("ascii", "replace")
    return params


def read_y4m(data: bytes) -> VideoSequence:
    """Luma planes of a YUV4MPEG2 stream.

    4:2:0 chroma planes are skipped; ``Cmono`` streams are read directly.
    """
    if not data.startswith(Y4M_SIGNATURE):
        raise WrongFormat("missing YUV4MPEG2 signature")
    end = data.find(b"\n")
    if end < 0:
        raise CorruptInput("unterminated stream header")
    params = _parse_y4m_params(data[len(Y4M_SIGNATURE):end].split(b" "))
    try:
        width, height = int(params["W"]), int(params["H"])
    except (KeyError, ValueError):
        raise CorruptInput("stream header lacks valid W/H") from None
    if width < 1 or height < 1:
        raise CorruptInput(f"invalid frame size {width}x{height}")
    colorspace = params.get("C", "420jpeg")
    luma = width * height
    if colorspace in _C420:
        chroma = 2 * ((width + 1) // 2) * ((height + 1) // 2)
    elif colorspace == "mono":
        chroma = 0
    else:
        raise UnsupportedFormat(f"unsupported colour space C{colorspace}")

    frames = []
    pos = end + 1
    while pos < len(data):
        line_end = data.find(b"\n", pos)
        if line_end < 0 or not data.startswith(b"FRAME", pos):
            raise CorruptInput(f"bad frame header at byte {pos}")
        pos = line_end + 1
        if pos + luma + chroma > len(data):
            raise CorruptInput(f"truncated frame {len(frames)}")
        frames.append(np.frombuffer(data, dtype=np.uint8, count=luma, offset=pos).reshape(height, width))
        pos += luma + chroma
    if not frames:
        raise CorruptInput("stream contains no frames")
    return VideoSequence(np.stack(frames))


def write_y4m(video: VideoSequence, fps: str = "25:1") -> bytes:
    if video.channels != 1:
        raise InvalidArgument("YUV4MPEG2 output supports 1-channel video only")
    header = f"YUV4MPEG2 W{video.width} H{video.height} F{fps} Ip A1:1 Cmono\n".encode("ascii")
    parts = [header]
    for frame in video.frames:
        parts.append(b"FRAME\n")
        parts.append(np.ascontiguousarray(frame).tobytes())
    return b"".join(parts)


def write_pgm(frame) -> bytes:
    arr = np.asarray(frame)
    if arr.ndim == 3:
        if arr.shape[2] != 1:
            raise InvalidArgument(f"PGM needs a 1-channel frame, got {arr.shape[2]} channels")
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise InvalidArgument(f"expected a 2-D frame, got shape {arr.shape}")
    h, w = arr.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + arr.astype(np.uint8).tobytes()


def write_ppm(frame) -> bytes:
    arr = np.asarray(frame)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidArgument(f"PPM needs an (H, W, 3) frame, got shape {arr.shape}")
    h, w, _ = arr.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + arr.astype(np.uint8).tobytes()


def read_pnm(data: bytes) -> np.ndarray:
    """Parse a binary PGM (P5) or PPM (P6) with maxval 255."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise CorruptInput("truncated PNM header")
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptInput("truncated PNM header")
        tokens.append(data[start:pos])
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise WrongFormat(f"not a binary PGM/PPM: {magic!r}")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise UnsupportedFormat(f"maxval {maxval} is not supported")
    c = 1 if magic == b"P5" else 3
    pos += 1
    if len(data) - pos < w * h * c:
        raise CorruptInput("truncated PNM pixel data")
    arr = np.frombuffer(data, dtype=np.uint8, count=w * h * c, offset=pos)
    return arr.reshape(h, w) if c == 1 else arr.reshape(h, w, 3)
