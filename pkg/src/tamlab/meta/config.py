"""Training and adaptation settings."""
from tamlab.extra.body_obj import ConfigBody
from tamlab.extra.decorators import config_obj


class TamConfig(ConfigBody):
    """Hyperparameters of the inner and outer loops.

    ``early_stop_patience`` of 0 disables early stopping, so an inner loop
    always runs ``max_inner_steps`` updates. The inner optimizer is a fresh
    Adam per adaptation; the outer optimizer is one Adam over the shared
    parameters for the whole run.
    """
    DEFAULTS = {
        'max_inner_steps': 25,
        'inner_lr': 1e-2,
        'inner_beta1': 0.9,
        'inner_beta2': 0.999,
        'inner_eps': 1e-8,
        'outer_lr': 1e-3,
        'outer_beta1': 0.9,
        'outer_beta2': 0.999,
        'outer_eps': 1e-8,
        'examples_per_task': 300,
        'early_stop_patience': 1,
        'improvement_tol': 1e-6,
        'max_outer_iterations': 2000,
        'k_values': [1, 5, 10, 20],
        'adaptation_steps_at_test': 25,
        'validation_interval': 250,
        'finetune_steps': 100,
        'finetune_lr': 1e-3,
        'show_progress': False,
        'seed': 0,
    }

    @classmethod
    @config_obj(required=None)
    def create(cls, **kwargs):
        """Return TamConfig with ``k_values`` sorted and deduplicated."""
        obj = cls(**kwargs)
        if isinstance(obj.k_values, (list, tuple)):
            obj.k_values = sorted(set(obj.k_values))
        return obj

    @property
    def max_k(self):
        return max(self.k_values)

    def inner_optimizer(self):
        return {'learning_rate': self.inner_lr, 'beta1': self.inner_beta1,
                'beta2': self.inner_beta2, 'epsilon': self.inner_eps}

    def outer_optimizer(self):
        return {'learning_rate': self.outer_lr, 'beta1': self.outer_beta1,
                'beta2': self.outer_beta2, 'epsilon': self.outer_eps}

    def _violations(self):
        out = []
        for key in ('max_inner_steps', 'early_stop_patience',
                    'max_outer_iterations', 'adaptation_steps_at_test',
                    'finetune_steps', 'seed'):
            out += self._int_at_least(key, 0)
        out += self._int_at_least('examples_per_task', 1)
        out += self._int_at_least('validation_interval', 1)
        for key in ('inner_lr', 'outer_lr', 'finetune_lr', 'improvement_tol'):
            out += self._real_in(key, 0.0)
        for key in ('inner_beta1', 'inner_beta2', 'outer_beta1',
                    'outer_beta2'):
            out += self._real_in(key, 0.0, 1.0)
        for key in ('inner_eps', 'outer_eps'):
            out += self._real_in(key, 0.0, low_open=True)
        if not isinstance(self.show_progress, bool):
            out.append('show_progress must be a boolean')
        ks = self.k_values
        if not isinstance(ks, (list, tuple)) or not ks or any(
                isinstance(k, bool) or not isinstance(k, int) or k < 1
                for k in ks):
            out.append('k_values must be a non-empty list of integers >= 1, '
                       'got %r' % (ks,))
        elif isinstance(self.examples_per_task, int) and \
                self.examples_per_task < max(ks):
            out.append('examples_per_task %s is smaller than the largest k %s'
                       % (self.examples_per_task, max(ks)))
        return out
