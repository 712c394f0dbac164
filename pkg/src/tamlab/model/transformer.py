"""Task-conditioned transformer.

Classification runs an unmasked pre-LN encoder over ``[z-block, x]`` and
reads the class logits at position 0. Transduction runs a causal decoder
over ``[x, z-block, y_1 .. y_{m-1}]`` and reads the logits of ``y_1 .. y_m``
at the last ``m`` positions, starting at the last z-block position.

The z-block is z itself (input-token conditioning), the three primitive
rows of a compositional task, or the learned ``start_token`` when z is
consumed elsewhere: as the weights of two bottleneck adapters per layer
(adapter conditioning) or as the scale and bias of every layer norm
(layer-norm conditioning).
"""
import logging

import numpy as np

from tamlab.enums import Conditioning, Family
from tamlab.extra.exceptions import ShapeError
from tamlab.numerics import Tensor, ops

logger = logging.getLogger(__name__)


def _z_pieces(cfg):
    dim, rank = cfg.embed_dim, cfg.adapter_bottleneck_dim
    pieces = []
    if cfg.conditioning == Conditioning.adapter.value:
        for layer in range(cfg.num_layers):
            for site in (0, 1):
                name = 'layers.%s.adapter%s.' % (layer, site)
                pieces += [(name + 'down_w', (dim, rank)),
                           (name + 'down_b', (rank,)),
                           (name + 'up_w', (rank, dim)),
                           (name + 'up_b', (dim,))]
    elif cfg.conditioning == Conditioning.layer_norm.value:
        names = ['layers.%s.%s' % (layer, norm)
                 for layer in range(cfg.num_layers) for norm in ('ln1', 'ln2')]
        for name in names + ['final_ln']:
            pieces += [(name + '.scale', (dim,)), (name + '.bias', (dim,))]
    return pieces


def split_task_embedding(cfg, z):
    """Named views of a flat adapter or layer-norm z."""
    out = {}
    offset = 0
    for name, shape in _z_pieces(cfg):
        size = int(np.prod(shape))
        out[name] = ops.reshape(ops.getitem(z, slice(offset, offset + size)),
                                shape)
        offset += size
    return out


def primitive_block(params, primitive_ids, unknown_slot=None, z=None):
    """(3, D) block of a compositional task.

    Known slots read their row of ``primitive_embeddings``; the slot
    ``unknown_slot`` holds ``z`` instead.
    """
    rows = []
    for slot, pid in enumerate(primitive_ids):
        if slot == unknown_slot:
            rows.append(ops.reshape(z, (1, z.size)))
        else:
            rows.append(ops.embedding(params['primitive_embeddings'], [pid]))
    return ops.concatenate(rows, axis=0)


class _Conditioned:
    """Resolves the z-block and the z-dependent weights of one forward."""
    def __init__(self, params, z):
        self.params = params
        self.cfg = params.config
        self.mode = self.cfg.conditioning
        self.pieces = {}
        if self.mode == Conditioning.input_token.value:
            z = z if isinstance(z, Tensor) else Tensor(z)
            expected = self.cfg.embed_dim
            if z.shape[-1] != expected or z.ndim > 2:
                raise ShapeError('task_embedding', [z.shape, (expected,)])
            self.block = ops.reshape(z, (-1, expected))
        else:
            z = z if isinstance(z, Tensor) else Tensor(z)
            if tuple(z.shape) != self.cfg.task_embedding_shape():
                raise ShapeError('task_embedding',
                                 [z.shape, self.cfg.task_embedding_shape()])
            self.pieces = split_task_embedding(self.cfg, z)
            self.block = ops.reshape(params['start_token'],
                                     (1, self.cfg.embed_dim))

    def norm(self, h, name):
        if self.mode == Conditioning.layer_norm.value:
            scale = ops.add(self.pieces[name + '.scale'], 1.0)
            bias = self.pieces[name + '.bias']
        else:
            scale = self.params[name + '.scale']
            bias = self.params[name + '.bias']
        return ops.add(ops.mul(ops.layer_norm(h), scale), bias)

    def adapter(self, u, layer, site):
        if self.mode != Conditioning.adapter.value:
            return u
        name = 'layers.%s.adapter%s.' % (layer, site)
        down_w = ops.add(self.params[name + 'down_w'],
                         self.pieces[name + 'down_w'])
        down_b = ops.add(self.params[name + 'down_b'],
                         self.pieces[name + 'down_b'])
        mid = ops.gelu(ops.add(ops.matmul(u, down_w), down_b))
        up = ops.add(ops.matmul(mid, self.pieces[name + 'up_w']),
                     self.pieces[name + 'up_b'])
        return ops.add(u, up)


def _attention(params, prefix, a, causal):
    cfg = params.config
    batch, length, dim = a.shape
    heads, head_dim = cfg.num_heads, cfg.head_dim

    def project(name):
        out = ops.add(ops.matmul(a, params[prefix + 'w' + name]),
                      params[prefix + 'b' + name])
        out = ops.reshape(out, (batch, length, heads, head_dim))
        return ops.transpose(out, (0, 2, 1, 3))

    q, k, v = project('q'), project('k'), project('v')
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))),
                       1.0 / np.sqrt(head_dim))
    if causal:
        scores = ops.add(scores, ops.causal_mask(length))
    mixed = ops.matmul(ops.softmax(scores), v)
    mixed = ops.reshape(ops.transpose(mixed, (0, 2, 1, 3)),
                        (batch, length, dim))
    return ops.add(ops.matmul(mixed, params[prefix + 'wo']),
                   params[prefix + 'bo'])


def _feedforward(params, prefix, f):
    hidden = ops.gelu(ops.add(ops.matmul(f, params[prefix + 'w1']),
                              params[prefix + 'b1']))
    return ops.add(ops.matmul(hidden, params[prefix + 'w2']),
                   params[prefix + 'b2'])


def encode(params, cond, h, causal):
    """Run every layer over ``h`` (B, T, D) and the final layer norm."""
    for layer in range(params.config.num_layers):
        prefix = 'layers.%s.' % layer
        attn = _attention(params, prefix + 'attn.',
                          cond.norm(h, prefix + 'ln1'), causal)
        h = ops.add(h, cond.adapter(attn, layer, 0))
        ffn = _feedforward(params, prefix + 'ffn.',
                           cond.norm(h, prefix + 'ln2'))
        h = ops.add(h, cond.adapter(ffn, layer, 1))
    return cond.norm(h, 'final_ln')


def _tokens(params, tokens, op):
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.ndim != 2:
        raise ShapeError(op, [tokens.shape], 'expects (batch, length) tokens')
    return ops.embedding(params['token_embedding'], tokens)


def _with_positions(params, parts, op):
    h = ops.concatenate(parts, axis=1)
    length = h.shape[1]
    limit = params.config.max_positions
    if length > limit:
        raise ShapeError(op, [h.shape], 'sequence of %s positions exceeds '
                         'max_positions %s' % (length, limit))
    return ops.add(h, ops.getitem(params['position_embedding'],
                                  slice(0, length)))


def _batched_block(cond, batch):
    block = cond.block
    return ops.expand(ops.reshape(block, (1,) + block.shape),
                      (batch,) + block.shape)


def forward_classify(params, z, x):
    """Class logits of every input.

    Args:
        params (:class:`~tamlab.model.params.ModelParams`)
        z (Tensor): Task embedding, or a (3, D) primitive block.
        x (array-like): (B, n) tokens, or one (n,) sequence.

    Returns:
        Tensor: (B, C) logits, or (C,) for a single sequence.
    """
    single = np.ndim(x) == 1
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    cond = _Conditioned(params, z)
    tokens = _tokens(params, x, 'forward_classify')
    h = _with_positions(params, [_batched_block(cond, x.shape[0]), tokens],
                        'forward_classify')
    h = encode(params, cond, h, causal=False)
    logits = ops.add(ops.matmul(ops.getitem(h, (slice(None), 0)),
                                params['head.w']), params['head.b'])
    return ops.getitem(logits, 0) if single else logits


def forward_transduce(params, z, x, y):
    """Teacher-forced logits for every target position.

    Args:
        x (array-like): (B, n) source tokens, or one (n,) sequence.
        y (array-like): (B, m) target tokens, or one (m,) sequence; only
            ``y[:, :m-1]`` is read.

    Returns:
        Tensor: (B, m, V) logits, or (m, V) for a single pair.
    """
    single = np.ndim(x) == 1
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    y = np.atleast_2d(np.asarray(y, dtype=np.int64))
    if x.shape[0] != y.shape[0] or y.shape[1] < 1:
        raise ShapeError('forward_transduce', [x.shape, y.shape],
                         'needs matching batches and |y| >= 1')
    cond = _Conditioned(params, z)
    block = _batched_block(cond, x.shape[0])
    parts = [_tokens(params, x, 'forward_transduce'), block]
    if y.shape[1] > 1:
        parts.append(_tokens(params, y[:, :-1], 'forward_transduce'))
    h = _with_positions(params, parts, 'forward_transduce')
    h = encode(params, cond, h, causal=True)
    first = x.shape[1] + block.shape[1] - 1
    h = ops.getitem(h, (slice(None), slice(first, first + y.shape[1])))
    logits = ops.add(ops.matmul(h, params['output.w']), params['output.b'])
    return ops.getitem(logits, 0) if single else logits


def token_losses(params, z, batch):
    """Per-target cross-entropy.

    Returns:
        Tensor: (B,) for classification, (B, m) for sequence targets with
        padded positions zeroed.
    """
    if params.config.is_classifier:
        return ops.cross_entropy(forward_classify(params, z, batch.x),
                                 batch.y)
    logits = forward_transduce(params, z, batch.x, batch.y)
    b, m, v = logits.shape
    flat = ops.cross_entropy(ops.reshape(logits, (b * m, v)),
                             batch.y.reshape(-1))
    return ops.mul(ops.reshape(flat, (b, m)), batch.mask)


def nll_loss(params, z, batch, family=None):
    """Mean cross-entropy (classification) or mean per-sequence summed
    cross-entropy (sequence targets) of ``batch``.

    Raises:
        ValueError: If the batch is empty or of another family.
    """
    _check_batch(params, batch, family)
    losses = token_losses(params, z, batch)
    if params.config.is_classifier:
        return ops.mean(losses)
    return ops.scale(ops.sum(losses), 1.0 / len(batch))


def token_nll(params, z, batch, family=None):
    """Total negative log-likelihood and number of scored targets."""
    _check_batch(params, batch, family)
    losses = token_losses(params, z, batch)
    count = len(batch) if params.config.is_classifier \
        else int(batch.mask.sum())
    return ops.sum(losses), count


def _check_batch(params, batch, family):
    if len(batch) == 0:
        raise ValueError('[Model] empty batch')
    expected = params.config.family
    for name in (family, batch.family):
        if name is not None and Family(name).value != expected:
            raise ValueError('[Model] %s batch for a %s model'
                             % (name, expected))
