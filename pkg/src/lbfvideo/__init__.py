"""Temporal video approximation by per-pixel error-bounded linear Bezier fitting."""

from .codec import (
    EncodedVideo,
    VideoSequence,
    decode_video,
    deserialize,
    encode_video,
    keypixel_mask_frame,
    serialize,
    symbol_stream,
)
from .errors import (
    CorruptInput,
    InvalidArgument,
    LBFError,
    UnsupportedFormat,
    UnsupportedVersion,
    WrongFormat,
)
from .trajectory import FitConfig, FitResult, decode_trajectory, fit_trajectory

__version__ = "0.1.0"
