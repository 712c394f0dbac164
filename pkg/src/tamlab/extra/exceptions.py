"""Errors raised by tamlab.

Every error carries the fields a caller needs to report the failure
without parsing the message.
"""


class TamlabError(Exception):
    """Base class of all tamlab errors."""


class ShapeError(TamlabError, ValueError):
    """An operation received tensors whose shapes break its shape rule."""
    def __init__(self, op, shapes, detail=''):
        self.op = op
        self.shapes = [tuple(shape) for shape in shapes]
        message = '[Tensor] %s shape mismatch: %s' % (op, self.shapes)
        if detail:
            message += ' (%s)' % detail
        super().__init__(message)


class IndexRangeError(TamlabError, IndexError):
    """A lookup index falls outside the table it addresses."""
    def __init__(self, op, index, size):
        self.op = op
        self.index = int(index)
        self.size = int(size)
        super().__init__(
            '[Tensor] %s index %s out of bounds for table of size %s'
            % (op, self.index, self.size))


class TapeError(TamlabError, RuntimeError):
    """Backward was asked for something the tape cannot differentiate."""


class GradientCheckError(TamlabError, ArithmeticError):
    """A finite-difference evaluation produced a non-finite value."""
    def __init__(self, param_index, coordinate, value):
        self.param_index = param_index
        self.coordinate = tuple(coordinate)
        self.value = value
        super().__init__(
            '[GradCheck] non-finite value %s at parameter %s coordinate %s'
            % (value, param_index, self.coordinate))


class LabelerError(TamlabError, ValueError):
    """A labeling transform was applied to an empty sequence."""


class GenerationError(TamlabError, RuntimeError):
    """Benchmark generation could not satisfy its configuration."""
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class SplitFormatError(TamlabError, ValueError):
    """A split file is malformed or truncated."""
    def __init__(self, record_index, reason):
        self.record_index = record_index
        self.reason = reason
        super().__init__(
            '[Split] record %s: %s' % (record_index, reason))


class CheckpointError(TamlabError, ValueError):
    """A checkpoint is malformed or does not fit the data it is used with."""
    def __init__(self, message, fields=None):
        self.fields = list(fields or [])
        super().__init__(message)


class AdaptationError(TamlabError, ArithmeticError):
    """The adaptation or training loss became non-finite."""
    def __init__(self, message, step=None, z=None):
        self.step = step
        self.z = z
        super().__init__(message)


class ConfigError(TamlabError, ValueError):
    """A configuration violates its schema."""
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            '[Config] %s violation(s):\n  %s'
            % (len(self.violations), '\n  '.join(self.violations)))
