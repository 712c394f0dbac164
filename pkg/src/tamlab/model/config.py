"""Transformer settings."""
from tamlab.enums import Conditioning, Family, Mode, check_is_enum
from tamlab.extra.body_obj import ConfigBody
from tamlab.extra.const import PATH_TOKEN_OFFSET
from tamlab.extra.decorators import config_obj


class ModelConfig(ConfigBody):
    """Shape and initialisation of a task-conditioned transformer.

    ``family`` picks the classification encoder or the causal decoder.
    ``compositional`` adds a primitive embedding table of
    ``num_primitives`` rows and is only defined for input-token
    conditioning.
    """
    DEFAULTS = {
        'family': Family.classification.value,
        'num_layers': 4,
        'embed_dim': 128,
        'num_heads': 4,
        'feedforward_dim': 512,
        'vocab_size': 12,
        'max_positions': 128,
        'num_classes': 4,
        'conditioning': Conditioning.input_token.value,
        'adapter_bottleneck_dim': 16,
        'compositional': False,
        'num_primitives': 0,
        'init_std': 0.02,
        'zero_init_output': True,
        'seed': 0,
    }

    @classmethod
    @config_obj(required=None)
    def create(cls, **kwargs):
        """Return ModelConfig with enum values normalised."""
        obj = cls(**kwargs)
        obj.family = check_is_enum(Family, obj.family)
        obj.conditioning = check_is_enum(Conditioning, obj.conditioning)
        return obj

    @classmethod
    def for_benchmark(cls, gen_config, **overrides):
        """Config whose vocabulary, classes and primitives fit a benchmark."""
        from tamlab.benchgen.tasks import build_inventory
        family = gen_config.family
        vocab = gen_config.vocab_size
        if family == Family.pathfinding.value:
            vocab = PATH_TOKEN_OFFSET + gen_config.grid_size ** 2
        compositional = gen_config.mode == Mode.comp.value
        values = {
            'family': family,
            'vocab_size': vocab,
            'num_classes': gen_config.num_classes,
            'compositional': compositional,
            'num_primitives': build_inventory(gen_config).size
            if compositional else 0,
        }
        values.update((k, v) for k, v in overrides.items() if v is not None)
        return cls.create(**values)

    @property
    def head_dim(self):
        return self.embed_dim // self.num_heads

    @property
    def is_classifier(self):
        return self.family == Family.classification.value

    @property
    def block_size(self):
        """Number of sequence positions the task embedding occupies."""
        return 3 if self.compositional else 1

    @property
    def num_layer_norms(self):
        return 2 * self.num_layers + 1

    def task_embedding_shape(self):
        """Shape of z for this configuration.

        input-token: (D,), or (3, D) for a full compositional block.
        adapter: two adapters per layer, each a down projection W (D x r),
        b (r) and an up projection W (r x D), b (D), flattened.
        layer-norm: scale and bias of every layer norm, flattened.
        """
        dim, rank = self.embed_dim, self.adapter_bottleneck_dim
        if self.conditioning == Conditioning.adapter.value:
            return (self.num_layers * 2 * (2 * dim * rank + rank + dim),)
        if self.conditioning == Conditioning.layer_norm.value:
            return (self.num_layer_norms * 2 * dim,)
        return (dim,)

    def _violations(self):
        out = self._choice('family', Family)
        out += self._choice('conditioning', Conditioning)
        for key in ('num_layers', 'embed_dim', 'num_heads', 'feedforward_dim',
                    'max_positions', 'adapter_bottleneck_dim'):
            out += self._int_at_least(key, 1)
        out += self._int_at_least('vocab_size', 2)
        out += self._int_at_least('num_classes', 2)
        out += self._int_at_least('num_primitives', 0)
        out += self._int_at_least('seed', 0)
        out += self._real_in('init_std', 0.0, low_open=True)
        if not isinstance(self.compositional, bool):
            out.append('compositional must be a boolean')
        if not isinstance(self.zero_init_output, bool):
            out.append('zero_init_output must be a boolean')
        if out:
            return out
        if self.embed_dim % self.num_heads:
            out.append('embed_dim %s is not divisible by num_heads %s'
                       % (self.embed_dim, self.num_heads))
        if self.compositional:
            if self.conditioning != Conditioning.input_token.value:
                out.append('compositional models need input-token '
                           'conditioning, got %s' % self.conditioning)
            if self.num_primitives < 1:
                out.append('compositional models need num_primitives >= 1')
        return out
