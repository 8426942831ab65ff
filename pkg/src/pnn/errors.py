"""Exception types raised across the package."""

from __future__ import annotations


class PnnError(Exception):
    """Base class; the CLI turns these into a machine-readable error line."""

    kind = "error"


class ShapeError(PnnError, ValueError):
    kind = "shape"

    def __init__(self, op: str, *shapes):
        self.op = op
        self.shapes = tuple(tuple(s) for s in shapes)
        shown = " vs ".join(str(s) for s in self.shapes)
        super().__init__(f"{op}: incompatible shapes {shown}")


class IdxFormatError(PnnError, ValueError):
    kind = "idx_format"

    def __init__(self, path, offset: int, message: str):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{path}: at byte offset {offset}: {message}")


class ArchError(PnnError, ValueError):
    kind = "arch"

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class CheckpointError(PnnError, ValueError):
    kind = "checkpoint"
