"""Exception types shared across the package."""

from __future__ import annotations


class SeamGraphError(Exception):
    """Base class for seamgraph failures."""


class MeshError(SeamGraphError, ValueError):
    """Malformed or unsupported mesh input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(SeamGraphError, ArithmeticError):
    """A computation produced non-finite or degenerate values."""

    def __init__(self, message: str, epoch: int | None = None, face: int | None = None):
        self.epoch = epoch
        self.face = face
        super().__init__(message)


class DecimationError(SeamGraphError):
    """Decimation stopped above the requested face count."""

    def __init__(self, message: str, achieved_faces: int):
        self.achieved_faces = achieved_faces
        super().__init__(f"{message} (achieved {achieved_faces} faces)")


class StageError(SeamGraphError):
    """A pipeline stage failed on one mesh; the message is prefixed with the stage."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"{stage}: {message}")
