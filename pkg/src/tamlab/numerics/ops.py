"""Differentiable operations over :class:`~tamlab.numerics.tensor.Tensor`.

Every op computes its value with numpy and hands a closure producing the
input gradients to :func:`~tamlab.numerics.tensor.record`. Binary
arithmetic broadcasts like numpy; gradients are summed back to each input
shape.
"""
import numpy as np

from tamlab.extra.exceptions import ShapeError, IndexRangeError
from tamlab.numerics.tensor import Tensor, as_tensor, record

LAYER_NORM_EPS = 1e-5
_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_K = 0.044715


def unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, [a.shape, b.shape], 'not broadcastable') from None


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('add', a, b)

    def grad_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)
    return record('add', (a, b), a.data + b.data, grad_fn)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('sub', a, b)

    def grad_fn(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)
    return record('sub', (a, b), a.data - b.data, grad_fn)


def mul(a, b):
    """Elementwise product."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape('mul', a, b)

    def grad_fn(g):
        return (unbroadcast(g * b.data, a.shape),
                unbroadcast(g * a.data, b.shape))
    return record('mul', (a, b), a.data * b.data, grad_fn)


def scale(a, factor):
    """Multiply by a constant real ``factor``."""
    a = as_tensor(a)
    factor = float(factor)
    return record('scale', (a,), a.data * factor, lambda g: (g * factor,))


def matmul(a, b):
    """Batched matrix product over the last two axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError('matmul', [a.shape, b.shape],
                         'inner dimensions must agree')
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise ShapeError('matmul', [a.shape, b.shape],
                         'batch dimensions not broadcastable') from None

    def grad_fn(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return unbroadcast(ga, a.shape), unbroadcast(gb, b.shape)
    return record('matmul', (a, b), np.matmul(a.data, b.data), grad_fn)


def softmax(a):
    """Softmax over the last axis."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=-1, keepdims=True)

    def grad_fn(g):
        return (s * (g - (g * s).sum(axis=-1, keepdims=True)),)
    return record('softmax', (a,), s, grad_fn)


def layer_norm(a, eps=LAYER_NORM_EPS):
    """Normalise the last axis to zero mean and unit variance, no affine."""
    a = as_tensor(a)
    mean = a.data.mean(axis=-1, keepdims=True)
    centered = a.data - mean
    inv_std = 1.0 / np.sqrt((centered ** 2).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std

    def grad_fn(g):
        g_mean = g.mean(axis=-1, keepdims=True)
        gx_mean = (g * normed).mean(axis=-1, keepdims=True)
        return (inv_std * (g - g_mean - normed * gx_mean),)
    return record('layer_norm', (a,), normed, grad_fn)


def gelu(a):
    """GELU, tanh approximation."""
    a = as_tensor(a)
    x = a.data
    inner = _GELU_C * (x + _GELU_K * x ** 3)
    t = np.tanh(inner)

    def grad_fn(g):
        d_inner = _GELU_C * (1.0 + 3.0 * _GELU_K * x ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * d_inner),)
    return record('gelu', (a,), 0.5 * x * (1.0 + t), grad_fn)


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return record('relu', (a,), a.data * mask, lambda g: (g * mask,))


def embedding(table, indices):
    """Rows of ``table`` (V, D) picked by integer ``indices`` of any shape."""
    table = as_tensor(table)
    indices = np.asarray(indices, dtype=np.int64)
    if table.ndim != 2:
        raise ShapeError('embedding', [table.shape], 'table must be 2-D')
    size = table.shape[0]
    bad = (indices < 0) | (indices >= size)
    if bad.any():
        raise IndexRangeError('embedding', indices[bad].reshape(-1)[0], size)

    def grad_fn(g):
        grad = np.zeros_like(table.data)
        np.add.at(grad, indices, g)
        return (grad,)
    return record('embedding', (table,), table.data[indices], grad_fn)


def concatenate(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    first = tensors[0]
    axis = axis % first.ndim
    for t in tensors[1:]:
        if t.ndim != first.ndim or any(
                da != db for i, (da, db) in enumerate(zip(first.shape, t.shape))
                if i != axis):
            raise ShapeError('concatenate', [x.shape for x in tensors],
                             'shapes differ off axis %s' % axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def grad_fn(g):
        return tuple(np.split(g, bounds, axis=axis))
    return record('concatenate', tensors,
                  np.concatenate([t.data for t in tensors], axis=axis),
                  grad_fn)


def getitem(a, key):
    """Basic or integer-array indexing."""
    a = as_tensor(a)

    def grad_fn(g):
        grad = np.zeros_like(a.data)
        np.add.at(grad, key, g)
        return (grad,)
    return record('getitem', (a,), a.data[key], grad_fn)


def reshape(a, shape):
    a = as_tensor(a)
    shape = tuple(shape)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise ShapeError('reshape', [a.shape, shape],
                         'sizes differ') from None
    return record('reshape', (a,), out, lambda g: (g.reshape(a.shape),))


def transpose(a, axes=None):
    a = as_tensor(a)
    axes = tuple(reversed(range(a.ndim))) if axes is None else tuple(axes)
    if sorted(axes) != list(range(a.ndim)):
        raise ShapeError('transpose', [a.shape], 'bad axes %s' % (axes,))
    inverse = tuple(np.argsort(axes))
    return record('transpose', (a,), np.transpose(a.data, axes),
                  lambda g: (np.transpose(g, inverse),))


def expand(a, shape):
    """Broadcast ``a`` to ``shape``."""
    a = as_tensor(a)
    try:
        out = np.broadcast_to(a.data, tuple(shape))
    except ValueError:
        raise ShapeError('expand', [a.shape, tuple(shape)],
                         'not broadcastable') from None
    return record('expand', (a,), out.copy(),
                  lambda g: (unbroadcast(g, a.shape),))


def sum(a, axis=None, keepdims=False):  # pylint: disable=redefined-builtin
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def grad_fn(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)
    return record('sum', (a,), out, grad_fn)


def mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    count = a.size if axis is None else np.prod(
        [a.shape[i] for i in np.atleast_1d(axis)])
    return scale(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def cross_entropy(logits, targets):
    """Per-row negative log-likelihood of integer ``targets``.

    Args:
        logits (Tensor): Shape (n, V).
        targets (array-like): n integers in [0, V).

    Returns:
        Tensor: Shape (n,).
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    if logits.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ShapeError('cross_entropy', [logits.shape, targets.shape],
                         'expects logits (n, V) and targets (n,)')
    size = logits.shape[1]
    bad = (targets < 0) | (targets >= size)
    if bad.any():
        raise IndexRangeError('cross_entropy', targets[bad][0], size)
    shifted = logits.data - logits.data.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1))
    rows = np.arange(targets.shape[0])
    losses = log_z - shifted[rows, targets]

    def grad_fn(g):
        probs = np.exp(shifted - log_z[:, None])
        probs[rows, targets] -= 1.0
        return (probs * g[:, None],)
    return record('cross_entropy', (logits,), losses, grad_fn)


def causal_mask(length):
    """Constant (length, length) additive mask, -inf above the diagonal."""
    mask = np.zeros((length, length))
    mask[np.triu_indices(length, k=1)] = -np.inf
    return Tensor(mask)
