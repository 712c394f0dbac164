"""Experiment configuration files."""
import json
import os

from tamlab.benchgen import GenConfig
from tamlab.enums import Mode, TrainMethod, check_is_enum
from tamlab.extra.body_obj import ConfigBody
from tamlab.extra.decorators import config_obj
from tamlab.extra.exceptions import ConfigError
from tamlab.meta import TamConfig
from tamlab.model import ModelConfig

# fields of ModelConfig that follow from the benchmark
DERIVED_MODEL_KEYS = ('family', 'vocab_size', 'num_classes', 'compositional',
                      'num_primitives')


class ExperimentConfig(ConfigBody):
    """One training experiment: benchmark, method, model, loops, trials.

    ``split`` names a split file to train on; without it the split is
    generated from ``benchmark``. ``model`` holds ModelConfig overrides;
    the fields derived from the benchmark are filled in at run time.
    Every seed in ``seeds`` is one trial, written to ``seed-<s>`` under
    ``output_dir``. An experiment always names its ``method``.
    """
    DEFAULTS = {
        'method': TrainMethod.tam.value,
        'split': None,
        'benchmark': GenConfig.create(),
        'model': {},
        'tam': TamConfig.create(),
        'seeds': [0],
        'output_dir': 'runs',
    }
    NESTED = {'benchmark': GenConfig, 'tam': TamConfig}

    @classmethod
    @config_obj(required=['method'])
    def create(cls, **kwargs):
        """Return ExperimentConfig with nested configs created."""
        benchmark = kwargs.pop('benchmark', None)
        tam = kwargs.pop('tam', None)
        obj = cls(**kwargs)
        if isinstance(benchmark, dict):
            obj.benchmark = GenConfig.create(**benchmark)
        elif benchmark is not None:
            obj.benchmark = benchmark
        if isinstance(tam, dict):
            obj.tam = TamConfig.create(**tam)
        elif tam is not None:
            obj.tam = tam
        if isinstance(obj.method, str):
            try:
                obj.method = check_is_enum(TrainMethod, obj.method)
            except ValueError:
                pass
        return obj

    @classmethod
    def from_file(cls, path):
        """Read a JSON config file.

        Raises:
            ConfigError: If the file is not a JSON object.
        """
        try:
            with open(path, 'r', encoding='utf-8') as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(['cannot read %s: %s' % (path, err)]) from None
        if not isinstance(data, dict):
            raise ConfigError(['%s does not hold a JSON object' % path])
        try:
            return cls.create(**data)
        except ConfigError:
            raise
        except ValueError as err:
            raise ConfigError([str(err)]) from None

    def model_overrides(self):
        return dict(self.model)

    def trial_dir(self, seed):
        return os.path.join(self.output_dir, 'seed-%s' % seed)

    def _violations(self):
        out = self._choice('method', TrainMethod)
        if not isinstance(self.output_dir, str) or not self.output_dir:
            out.append('output_dir must be a non-empty path')
        seeds = self.seeds
        if not isinstance(seeds, list) or not seeds or any(
                isinstance(s, bool) or not isinstance(s, int) or s < 0
                for s in seeds):
            out.append('seeds must be a non-empty list of integers >= 0, '
                       'got %r' % (seeds,))
        elif len(set(seeds)) != len(seeds):
            out.append('seeds must be distinct, got %r' % (seeds,))
        if self.split is not None and (not isinstance(self.split, str)
                                       or not os.path.isfile(self.split)):
            out.append('split file %r does not exist' % (self.split,))
        if not isinstance(self.model, dict):
            out.append('model must be an object of ModelConfig overrides')
            return out
        unknown = sorted(set(self.model) - set(ModelConfig.DEFAULTS))
        derived = sorted(set(self.model) & set(DERIVED_MODEL_KEYS))
        if unknown:
            out.append('model: unknown keys %s' % unknown)
        if derived:
            out.append('model: %s follow from the benchmark and cannot be '
                       'set' % derived)
        if not unknown and not derived and isinstance(self.benchmark,
                                                      GenConfig):
            probe = ModelConfig.create(**dict(self.model))
            out.extend('model: %s' % v.split(': ', 1)[-1]
                       for v in probe.validate())
        if out or self.split is not None:
            return out
        if self.method == TrainMethod.comp_tam.value and \
                self.benchmark.mode != Mode.comp.value:
            out.append('method comp-tam needs a benchmark in comp mode, got '
                       '%s' % self.benchmark.mode)
        return out
