"""Tensor and computation tape.

A :class:`Tensor` wraps a float64 numpy array. Operations on tensors that
require gradients are recorded, in execution order, on the tape of the
current thread; :func:`backward` walks that tape once in reverse.

Example:
    .. code-block:: python

        from tamlab.numerics import Tensor, recording, backward, ops

        x = Tensor([1., 2.], requires_grad=True)
        with recording():
            loss = ops.sum(x * x)
            backward(loss)
        x.grad  # array([2., 4.])

"""
import contextlib
import logging
import threading

import numpy as np

from tamlab.extra.exceptions import TapeError

logger = logging.getLogger(__name__)

_local = threading.local()


class Operation:
    """One recorded differentiable operation.

    Attributes:
        name (str): Op name, used in error messages.
        inputs (list(Tensor)): Operands in call order.
        output (Tensor): Result tensor.
        backward_fn (function): Maps the output gradient to one gradient
            (or None) per input.
        position (int): Index of the operation on its tape.
    """
    def __init__(self, name, inputs, output, backward_fn):
        self.name = name
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn
        self.position = None


class Tape:
    """Ordered record of executed operations.

    Every operation is appended after its inputs were produced, so the
    list is already topologically ordered.
    """
    def __init__(self):
        self.operations = []

    def __len__(self):
        return len(self.operations)

    def record(self, operation):
        operation.position = len(self.operations)
        self.operations.append(operation)

    def holds(self, operation):
        """True when ``operation`` is recorded on this tape."""
        pos = operation.position
        return (pos is not None and pos < len(self.operations)
                and self.operations[pos] is operation)

    def clear(self):
        self.operations = []


def current_tape():
    """Return the tape of the calling thread, creating it on first use."""
    tape = getattr(_local, 'tape', None)
    if tape is None:
        tape = Tape()
        _local.tape = tape
    return tape


def grad_enabled():
    return getattr(_local, 'enabled', True)


@contextlib.contextmanager
def recording():
    """Record on a fresh tape for the duration of the block.

    The previous tape of the thread is restored on exit, so the operations
    of one loss evaluation are released together with the block.
    """
    previous = getattr(_local, 'tape', None)
    tape = Tape()
    _local.tape = tape
    try:
        yield tape
    finally:
        _local.tape = previous


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording anything."""
    previous = grad_enabled()
    _local.enabled = False
    try:
        yield
    finally:
        _local.enabled = previous


class Tensor:
    """Dense float64 array taking part in reverse-mode differentiation.

    Args:
        data (array-like): Values; stored as float64 without copying when
            already a float64 array.
        requires_grad (bool): Whether backward fills :attr:`grad`.
        name (str): Optional label for logs and checkpoints.
    """
    __array_priority__ = 100

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.name = name
        self.op = None
        self.tape = None

    def __repr__(self):
        label = '' if self.name is None else ' name=%s' % self.name
        return 'Tensor(shape=%s%s, requires_grad=%s)' % (
            self.shape, label, self.requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def is_leaf(self):
        return self.op is None

    def item(self):
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def zero_grad(self):
        self.grad = None

    def detach(self):
        """Leaf sharing the same array, never requiring gradients."""
        return Tensor(self.data, requires_grad=False, name=self.name)

    def backward(self):
        backward(self)

    # Operator sugar, resolved lazily to keep ops importing this module.
    def __add__(self, other):
        from tamlab.numerics import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from tamlab.numerics import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from tamlab.numerics import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from tamlab.numerics import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from tamlab.numerics import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from tamlab.numerics import ops
        return ops.mul(other, self)

    def __neg__(self):
        from tamlab.numerics import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from tamlab.numerics import ops
        return ops.matmul(self, other)

    def __getitem__(self, key):
        from tamlab.numerics import ops
        return ops.getitem(self, key)


def as_tensor(value):
    """Return ``value`` if it is a Tensor, else wrap it as a constant."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def record(name, inputs, data, backward_fn):
    """Wrap ``data`` as the output of op ``name`` and record it if needed.

    The operation goes on the current tape when gradients are enabled and
    any input requires them; the output then requires gradients too.
    """
    track = grad_enabled() and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=track)
    if track:
        operation = Operation(name, list(inputs), out, backward_fn)
        current_tape().record(operation)
        out.op = operation
        out.tape = current_tape()
    return out


def backward(loss):
    """Accumulate d(loss)/d(leaf) into ``grad`` of every reachable leaf.

    Args:
        loss (Tensor): Scalar produced by a recorded operation on the
            current tape.

    Raises:
        TapeError: If loss is not a scalar or is not on the current tape.
    """
    if loss.size != 1:
        raise TapeError('[Tape] backward needs a scalar loss, got shape %s'
                        % (loss.shape,))
    tape = current_tape()
    if loss.op is None or loss.tape is not tape \
            or not tape.holds(loss.op):
        raise TapeError('[Tape] loss was not produced on the current tape')

    pending = {id(loss): np.ones_like(loss.data)}
    visited = 0
    for operation in reversed(tape.operations[:loss.op.position + 1]):
        grad_out = pending.pop(id(operation.output), None)
        if grad_out is None:
            continue
        visited += 1
        grads = operation.backward_fn(grad_out)
        for tensor, grad in zip(operation.inputs, grads):
            if grad is None or not tensor.requires_grad:
                continue
            if tensor.is_leaf:
                tensor.grad = grad.copy() if tensor.grad is None \
                    else tensor.grad + grad
            elif id(tensor) in pending:
                pending[id(tensor)] = pending[id(tensor)] + grad
            else:
                pending[id(tensor)] = grad
    logger.debug('[Tape] backward visited %s of %s operations',
                 visited, len(tape))
