"""Benchmark generation settings."""
from tamlab.enums import Family, Mode, check_is_enum
from tamlab.extra.body_obj import ConfigBody
from tamlab.extra.const import PATH_TOKEN_OFFSET
from tamlab.extra.decorators import config_obj
from tamlab.extra.utils import child_seed

TASK_COUNTS = {
    Mode.plain.value: (500, 16, 64),
    Mode.comp.value: (5000, 100, 100),
}
PROBE_STREAM = 7


class GenConfig(ConfigBody):
    """Everything :func:`~tamlab.benchgen.split.build_split` reads.

    ``n_train``, ``n_val``, ``n_test`` default by mode and ``probe_seed``
    is derived from ``seed``; :meth:`create` fills them in so the stored
    config is complete.
    """
    DEFAULTS = {
        'family': Family.classification.value,
        'mode': Mode.plain.value,
        'seed': 0,
        'vocab_size': 12,
        'seq_len': 5,
        'num_classes': 4,
        'examples_per_task': 500,
        'n_train': None,
        'n_val': None,
        'n_test': None,
        'support_size': 20,
        'candidate_pool': 20000,
        'probe_size': 512,
        'probe_seed': None,
        'grid_size': 10,
        'num_obstacles': 8,
        'max_resamples': 1000,
        'held_out_fraction': 0.2,
        'max_candidates_factor': 20,
    }

    @classmethod
    @config_obj(required=None)
    def create(cls, **kwargs):
        """Return GenConfig with enum values normalised and counts resolved."""
        obj = cls(**kwargs)
        obj.family = check_is_enum(Family, obj.family)
        obj.mode = check_is_enum(Mode, obj.mode)
        train, val, test = TASK_COUNTS[obj.mode]
        obj.n_train = train if obj.n_train is None else obj.n_train
        obj.n_val = val if obj.n_val is None else obj.n_val
        obj.n_test = test if obj.n_test is None else obj.n_test
        if obj.probe_seed is None and isinstance(obj.seed, int):
            obj.probe_seed = child_seed(obj.seed, PROBE_STREAM)
        return obj

    @property
    def total_tasks(self):
        return self.n_train + self.n_val + self.n_test

    @property
    def is_compositional(self):
        return self.mode == Mode.comp.value

    def _violations(self):
        out = self._choice('family', Family) + self._choice('mode', Mode)
        for key in ('seed', 'n_train', 'n_val', 'n_test', 'probe_seed'):
            out += self._int_at_least(key, 0)
        out += self._int_at_least('vocab_size', 2)
        out += self._int_at_least('seq_len', 2)
        out += self._int_at_least('num_classes', 2)
        out += self._int_at_least('examples_per_task', 1)
        out += self._int_at_least('support_size', 1)
        out += self._int_at_least('candidate_pool', 1)
        out += self._int_at_least('probe_size', 1)
        out += self._int_at_least('grid_size', 3)
        out += self._int_at_least('num_obstacles', 0)
        out += self._int_at_least('max_resamples', 1)
        out += self._int_at_least('max_candidates_factor', 1)
        out += self._real_in('held_out_fraction', 0.0, 1.0, low_open=True)
        if out:
            return out
        if self.examples_per_task <= self.support_size:
            out.append('examples_per_task (%s) must exceed support_size (%s)'
                       % (self.examples_per_task, self.support_size))
        if self.family == Family.classification.value and \
                self.examples_per_task < self.num_classes:
            out.append('examples_per_task must be >= num_classes')
        if self.grid_size ** 2 > PATH_TOKEN_OFFSET:
            out.append('grid_size %s too large: cells must stay below %s'
                       % (self.grid_size, PATH_TOKEN_OFFSET))
        return out
