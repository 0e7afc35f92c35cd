"""Exception types shared by every lbfvideo module."""


class LBFError(Exception):
    """Base class for all lbfvideo errors."""

    kind = "error"


class InvalidArgument(LBFError, ValueError):
    kind = "invalid-argument"


class CorruptInput(LBFError, ValueError):
    kind = "corrupt-input"


class WrongFormat(LBFError, ValueError):
    kind = "wrong-format"


class UnsupportedVersion(LBFError, ValueError):
    kind = "unsupported-version"


class UnsupportedFormat(LBFError, ValueError):
    kind = "unsupported-format"
