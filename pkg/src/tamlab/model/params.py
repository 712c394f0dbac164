"""Shared transformer parameters, task embeddings and checkpoints."""
import collections
import json
import logging

import numpy as np

from tamlab.enums import Conditioning
from tamlab.extra.const import CHECKPOINT_FORMAT, FORMAT_VERSION
from tamlab.extra.exceptions import CheckpointError
from tamlab.extra.utils import canonical_json, child_rng
from tamlab.model.config import ModelConfig
from tamlab.numerics import Tensor

logger = logging.getLogger(__name__)


def parameter_shapes(cfg):
    """Ordered ``name -> shape`` of every tensor a config owns.

    Layer-norm conditioning takes all layer-norm scales and biases from z,
    so those tensors are absent; adapter conditioning adds the learned base
    of every down projection.
    """
    dim, ffn = cfg.embed_dim, cfg.feedforward_dim
    shapes = collections.OrderedDict()
    shapes['token_embedding'] = (cfg.vocab_size, dim)
    shapes['position_embedding'] = (cfg.max_positions, dim)
    if cfg.conditioning != Conditioning.input_token.value:
        shapes['start_token'] = (dim,)
    own_norms = cfg.conditioning != Conditioning.layer_norm.value
    for layer in range(cfg.num_layers):
        prefix = 'layers.%s.' % layer
        for name in ('wq', 'wk', 'wv', 'wo'):
            shapes[prefix + 'attn.' + name] = (dim, dim)
            shapes[prefix + 'attn.b' + name[1]] = (dim,)
        shapes[prefix + 'ffn.w1'] = (dim, ffn)
        shapes[prefix + 'ffn.b1'] = (ffn,)
        shapes[prefix + 'ffn.w2'] = (ffn, dim)
        shapes[prefix + 'ffn.b2'] = (dim,)
        if own_norms:
            for norm in ('ln1', 'ln2'):
                shapes[prefix + norm + '.scale'] = (dim,)
                shapes[prefix + norm + '.bias'] = (dim,)
        if cfg.conditioning == Conditioning.adapter.value:
            for site in (0, 1):
                name = prefix + 'adapter%s.' % site
                shapes[name + 'down_w'] = (dim, cfg.adapter_bottleneck_dim)
                shapes[name + 'down_b'] = (cfg.adapter_bottleneck_dim,)
    if own_norms:
        shapes['final_ln.scale'] = (dim,)
        shapes['final_ln.bias'] = (dim,)
    if cfg.is_classifier:
        shapes['head.w'] = (dim, cfg.num_classes)
        shapes['head.b'] = (cfg.num_classes,)
    else:
        shapes['output.w'] = (dim, cfg.vocab_size)
        shapes['output.b'] = (cfg.vocab_size,)
    if cfg.compositional:
        shapes['primitive_embeddings'] = (cfg.num_primitives, dim)
        shapes['unknown_primitive'] = (dim,)
    return shapes


def _initial_value(name, shape, cfg, rng):
    if name.endswith('.scale'):
        return np.ones(shape)
    if name.startswith(('head.', 'output.')) and cfg.zero_init_output:
        return np.zeros(shape)
    if name.endswith(('.bias', '_b')) or name.split('.')[-1].startswith('b') \
            or name == 'unknown_primitive':
        return np.zeros(shape)
    return rng.normal(0.0, cfg.init_std, size=shape)


class ModelParams:
    """Named parameter tensors of one model, in a fixed order.

    Attributes:
        config (:class:`~tamlab.model.config.ModelConfig`)
        tensors (collections.OrderedDict): ``name -> Tensor``.
    """
    def __init__(self, config, tensors):
        self.config = config
        self.tensors = collections.OrderedDict(tensors)

    @classmethod
    def init(cls, config, rng=None):
        """Random init: N(0, init_std) weights, zero biases, unit scales.

        The head / output projection starts at zero unless
        ``zero_init_output`` is off, so an untrained model predicts the
        uniform distribution.
        """
        rng = rng if rng is not None else child_rng(config.seed, 0)
        tensors = collections.OrderedDict(
            (name, Tensor(_initial_value(name, shape, config, rng),
                          requires_grad=True, name=name))
            for name, shape in parameter_shapes(config).items())
        return cls(config, tensors)

    def __getitem__(self, name):
        return self.tensors[name]

    def __contains__(self, name):
        return name in self.tensors

    def __iter__(self):
        return iter(self.tensors.values())

    def __len__(self):
        return len(self.tensors)

    def names(self):
        return list(self.tensors)

    def get(self, name):
        return self.tensors.get(name)

    def trainable(self, exclude=()):
        """Tensors that require gradients, minus the names in ``exclude``."""
        return [t for name, t in self.tensors.items()
                if t.requires_grad and name not in exclude]

    def frozen(self):
        """Read-only view sharing every array, never requiring gradients."""
        return ModelParams(self.config, (
            (name, Tensor(t.data, requires_grad=False, name=name))
            for name, t in self.tensors.items()))

    def clone(self, requires_grad=True):
        """Deep copy with fresh arrays."""
        return ModelParams(self.config, (
            (name, Tensor(t.data.copy(), requires_grad=requires_grad,
                          name=name))
            for name, t in self.tensors.items()))

    def zero_grad(self):
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def arrays(self):
        return collections.OrderedDict(
            (name, t.data.copy()) for name, t in self.tensors.items())

    def equal(self, other):
        """True when every tensor is bit-identical to ``other``'s."""
        return self.names() == other.names() and all(
            np.array_equal(a.data, b.data) for a, b in zip(self, other))


def zero_task_embedding(cfg, requires_grad=True):
    """z = 0 with the shape ``cfg`` conditions on."""
    return Tensor(np.zeros(cfg.task_embedding_shape()),
                  requires_grad=requires_grad, name='z')


# Checkpoints

def _dump_array(array):
    return {'shape': list(array.shape),
            'data': [float(v) for v in np.asarray(array).reshape(-1)]}


def _load_array(record):
    return np.asarray(record['data'], dtype=np.float64).reshape(
        record['shape'])


def checkpoint_record(params, optimizer_state=None, extras=None):
    record = {
        'format': CHECKPOINT_FORMAT,
        'version': FORMAT_VERSION,
        'config': params.config.jsonable(),
        'params': collections.OrderedDict(
            (name, _dump_array(t.data)) for name, t in params.tensors.items()),
        'optimizer': None,
        'extras': {},
    }
    if optimizer_state is not None:
        state = optimizer_state.state_dict()
        state['first_moment'] = [_dump_array(m)
                                 for m in state['first_moment']]
        state['second_moment'] = [_dump_array(v)
                                  for v in state['second_moment']]
        record['optimizer'] = state
    for key, val in (extras or {}).items():
        record['extras'][key] = _dump_array(val) \
            if isinstance(val, np.ndarray) else val
    return record


def save_checkpoint(path, params, optimizer_state=None, extras=None):
    """Write config, named parameters, optimizer state and extras as JSON.

    ``extras`` values may be numpy arrays (stored with their shape) or any
    JSON value.
    """
    with open(path, 'w', encoding='utf-8', newline='\n') as fh:
        fh.write(canonical_json(checkpoint_record(
            params, optimizer_state, extras)))
        fh.write('\n')
    logger.debug('[Checkpoint] wrote %s', path)
    return path


def load_checkpoint(path):
    """Read a checkpoint written by :func:`save_checkpoint`.

    Returns:
        tuple: (ModelParams, AdamState or None, extras dict).
        Array extras come back as numpy arrays.

    Raises:
        CheckpointError: If the header, config or tensor shapes are wrong.
    """
    from tamlab.numerics.optim import AdamState
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            record = json.load(fh)
    except json.JSONDecodeError as err:
        raise CheckpointError('[Checkpoint] %s is not JSON: %s'
                              % (path, err.msg)) from None
    if not isinstance(record, dict) or \
            record.get('format') != CHECKPOINT_FORMAT or \
            record.get('version') != FORMAT_VERSION:
        raise CheckpointError('[Checkpoint] %s has no %s v%s header'
                              % (path, CHECKPOINT_FORMAT, FORMAT_VERSION),
                              ['format', 'version'])
    config = ModelConfig(**record['config'])
    violations = config.validate()
    if violations:
        raise CheckpointError('[Checkpoint] bad config: %s'
                              % '; '.join(violations), ['config'])
    expected = parameter_shapes(config)
    stored = record['params']
    bad = sorted(set(expected) ^ set(stored))
    bad += [name for name in expected if name in stored and
            tuple(stored[name]['shape']) != expected[name]]
    if bad:
        raise CheckpointError('[Checkpoint] tensors do not fit config: %s'
                              % ', '.join(bad), bad)
    params = ModelParams(config, (
        (name, Tensor(_load_array(stored[name]), requires_grad=True,
                      name=name)) for name in expected))
    optimizer = record.get('optimizer')
    if optimizer is not None:
        optimizer = dict(optimizer)
        optimizer['first_moment'] = [_load_array(m)
                                     for m in optimizer['first_moment']]
        optimizer['second_moment'] = [_load_array(v)
                                      for v in optimizer['second_moment']]
        optimizer = AdamState.from_state_dict(optimizer)
    extras = {key: _load_array(val)
              if isinstance(val, dict) and set(val) == {'shape', 'data'}
              else val for key, val in record.get('extras', {}).items()}
    return params, optimizer, extras
