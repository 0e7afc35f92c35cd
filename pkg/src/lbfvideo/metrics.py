"""Rate and quality measures: symbol entropy, MSE and PSNR."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codec import SENTINEL, EncodedVideo, VideoSequence, symbol_stream
from .errors import InvalidArgument

PEAK = 255.0


@dataclass
class SymbolHistogram:
    counts: np.ndarray = field(default_factory=lambda: np.zeros(SENTINEL + 1, dtype=np.int64))

    @classmethod
    def from_stream(cls, stream) -> "SymbolHistogram":
        s = np.asarray(stream).reshape(-1)
        if s.size and (s.min() < 0 or s.max() > SENTINEL):
            raise InvalidArgument(f"symbols must lie in [0, {SENTINEL}]")
        return cls(np.bincount(s.astype(np.int64), minlength=SENTINEL + 1))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def probabilities(self) -> np.ndarray:
        return self.counts / self.total


def entropy(hist: SymbolHistogram) -> float:
    """Shannon entropy in bits per symbol."""
    total = hist.total
    if total <= 0:
        raise InvalidArgument("entropy of an empty histogram is undefined")
    p = hist.counts[hist.counts > 0] / total
    return float(-(p * np.log2(p)).sum()) + 0.0


def frame_mse(original, reconstructed) -> float:
    """Mean over pixels of the squared Euclidean distance across channels."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstructed, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"frame shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 3:
        return float(((a - b) ** 2).sum(axis=2).mean())
    return float(((a - b) ** 2).mean())


def psnr(mse: float) -> float:
    if mse < 0 or math.isnan(mse):
        raise InvalidArgument(f"mse must be >= 0, got {mse}")
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


@dataclass
class MetricsReport:
    entropy_bpp: float | None
    per_frame_mse: list[float]
    aggregate_mse: float
    per_frame_psnr_db: list[float]
    aggregate_psnr_db: float
    keypixel_fraction: float | None

    def to_dict(self) -> dict:
        return {
            "entropy_bpp": self.entropy_bpp,
            "aggregate_mse": self.aggregate_mse,
            "aggregate_psnr_db": format_db(self.aggregate_psnr_db),
            "keypixel_fraction": self.keypixel_fraction,
            "per_frame_mse": self.per_frame_mse,
            "per_frame_psnr_db": [format_db(v) for v in self.per_frame_psnr_db],
        }


def format_db(value: float):
    return "inf" if math.isinf(value) else value


def video_report(original: VideoSequence, reconstructed: VideoSequence,
                 encoded: EncodedVideo | None = None) -> MetricsReport:
    """Per-frame and aggregate quality of ``reconstructed`` against ``original``.

    Entropy and keypixel fraction come from ``encoded`` and are ``None`` when
    it is not given. The aggregate PSNR is taken from the mean frame MSE.
    """
    if original.geometry != reconstructed.geometry:
        raise InvalidArgument(f"geometry mismatch: {original.geometry} vs {reconstructed.geometry}")
    if encoded is not None:
        expected = (encoded.frame_count, encoded.height, encoded.width, encoded.channels)
        if expected != original.geometry:
            raise InvalidArgument(f"encoding geometry {expected} does not match video {original.geometry}")
    per_mse = [frame_mse(a, b) for a, b in zip(original.frames, reconstructed.frames)]
    agg = float(np.mean(per_mse))
    ent = frac = None
    if encoded is not None:
        ent = entropy(SymbolHistogram.from_stream(symbol_stream(encoded)))
        frac = encoded.keypixel_fraction
    return MetricsReport(
        entropy_bpp=ent,
        per_frame_mse=per_mse,
        aggregate_mse=agg,
        per_frame_psnr_db=[psnr(m) for m in per_mse],
        aggregate_psnr_db=psnr(agg),
        keypixel_fraction=frac,
    )
