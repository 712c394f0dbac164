"""EvaluationJob scores a trained model on the test tasks of a split."""
import logging

from tamlab.extra.decorators import update
from tamlab.extra.exceptions import CheckpointError
from tamlab.extra.utils import gen_id
from tamlab.jobs.job import Job
from tamlab.jobs.task import CallableTask
from tamlab.meta import TamConfig, default_adapt_method, run_kshot
from tamlab.meta.training import model_config_for
from tamlab.model import load_checkpoint

logger = logging.getLogger(__name__)

SPLIT_FIELDS = ('family', 'vocab_size', 'num_classes', 'compositional',
                'num_primitives')


def check_fits_split(model_config, split, method):
    """Raise CheckpointError naming every field that does not fit ``split``.
    """
    expected = model_config_for(method, split.config)
    fields = [key for key in SPLIT_FIELDS
              if getattr(model_config, key) != getattr(expected, key)]
    if not model_config.is_classifier:
        fields = [f for f in fields if f != 'num_classes']
    if fields:
        raise CheckpointError(
            '[Eval] checkpoint does not fit the split: %s' % ', '.join(
                '%s=%r (split needs %r)' % (f, getattr(model_config, f),
                                           getattr(expected, f))
                for f in fields), fields)


def resolve_model(model):
    """Weights and training metadata of a TrainingJob or checkpoint path."""
    if isinstance(model, str):
        params, _, extras = load_checkpoint(model)
        return params, extras
    return model.params, {'method': model.method,
                          'seed': model.tam_config.seed,
                          'task_embeddings':
                          model.training.task_embeddings}


def trained_method(params, extras):
    """Training method recorded with a model, guessed when missing."""
    if extras.get('method'):
        return extras['method']
    return 'comp-tam' if params.config.compositional else 'tam'


def evaluate_on(data, model, tam_config, k_values=None, method=None,
                label=None, jobs=1):
    split = data.split
    params, extras = resolve_model(model)
    train_method = trained_method(params, extras)
    check_fits_split(params.config, split, train_method)
    method = method or default_adapt_method(train_method,
                                            params.config.compositional)
    table = run_kshot(params, split.test_tasks, method, tam_config,
                      split.support_size, k_values=k_values,
                      label=label or train_method, mode=split.config.mode,
                      seed=extras.get('seed', tam_config.seed), jobs=jobs)
    return {'metrics': table, 'method': method}


class EvaluationJob(Job):
    """k-shot evaluation of one trained model.

    Attributes:
        jobs (list(:class:`~tamlab.jobs.job.Job`)): [BenchmarkJob] plus the
            TrainingJob when the model is not a checkpoint path.
        metrics (:class:`pandas.DataFrame`): One row per k.
        method (str): Adaptation method used.
    """
    def __init__(self, data, model, tam_config=None, k_values=None,
                 method=None, label=None, jobs=1, name=None):
        tam_config = tam_config if tam_config is not None \
            else TamConfig.create()
        prerequired = [data] if isinstance(model, str) else [data, model]
        name = gen_id(self.__class__.__name__, name)
        super().__init__(
            task=CallableTask(evaluate_on, data, model, tam_config, k_values,
                              method, label, jobs, name=name),
            jobs=prerequired, name=name)
        self.metrics = None
        self.method = method

    @update
    def update_result(self, task_result):
        """Update from 'result' in Task response."""
        return
