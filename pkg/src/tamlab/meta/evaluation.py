"""k-shot evaluation and result tables.

Classification tasks are scored by accuracy, sequence tasks by perplexity,
``exp`` of the mean teacher-forced token NLL. Scores are computed per task
on the examples after the adaptation pool, then averaged across tasks.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from tamlab.enums import Family, check_is_enum
from tamlab.meta.adaptation import AdaptedState, adapt_test_task,\
                                   unadapted_state
from tamlab.model import ModelParams, collate, forward_classify, token_nll
from tamlab.numerics import no_grad, ops
from tamlab.extra.utils import progress

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ['method', 'family', 'mode', 'k', 'mean', 'std', 'n_tasks',
                  'seed']
EVAL_CHUNK = 256


def metric_name(family):
    if check_is_enum(Family, family) == Family.classification.value:
        return 'accuracy'
    return 'perplexity'


def is_better(family, value, reference):
    """Whether ``value`` beats ``reference``: higher accuracy, lower
    perplexity."""
    if reference is None:
        return True
    if metric_name(family) == 'accuracy':
        return value > reference
    return value < reference


def score_examples(state, examples):
    """Score ``examples`` with an adapted model.

    Returns:
        dict: ``value`` (accuracy or perplexity) and ``loss`` (mean NLL per
        scored target).
    """
    params = state.params
    family = params.config.family
    condition = state.conditioning()
    total_nll, scored, correct = 0.0, 0, 0
    with no_grad():
        for start in range(0, len(examples), EVAL_CHUNK):
            batch = collate(examples[start:start + EVAL_CHUNK], family)
            if params.config.is_classifier:
                logits = forward_classify(params, condition, batch.x)
                nll = ops.sum(ops.cross_entropy(logits, batch.y))
                count = len(batch)
                correct += int(np.sum(np.argmax(logits.data, axis=-1)
                                      == batch.y))
            else:
                nll, count = token_nll(params, condition, batch)
            total_nll += nll.item()
            scored += count
    loss = total_nll / scored
    if params.config.is_classifier:
        return {'value': correct / scored, 'loss': loss}
    return {'value': float(np.exp(loss)), 'loss': loss}


def _states_for(params_or_states, tasks):
    if isinstance(params_or_states, ModelParams):
        return [unadapted_state(params_or_states, task) for task in tasks]
    if isinstance(params_or_states, AdaptedState):
        return [params_or_states] * len(tasks)
    states = list(params_or_states)
    if len(states) != len(tasks):
        raise ValueError('[Eval] %s adapted states for %s tasks'
                         % (len(states), len(tasks)))
    return states


def evaluate(params_or_states, tasks, family=None, support_size=0):
    """Per-task scores.

    Args:
        params_or_states: ModelParams (scored without adaptation), one
            AdaptedState for every task, or a list aligned with ``tasks``.
        tasks (list(TaskData))
        family (str): Expected family; checked against model and tasks.
        support_size (int): Leading examples of every task that belong to
            the adaptation pool and are never scored.

    Returns:
        :class:`pandas.DataFrame`: columns task, metric, value, loss.

    Raises:
        ValueError: On a family mismatch or a task with nothing to score.
    """
    tasks = list(tasks)
    states = _states_for(params_or_states, tasks)
    rows = []
    for index, (state, task) in enumerate(zip(states, tasks)):
        expected = state.family if family is None \
            else check_is_enum(Family, family)
        if state.family != expected or task.spec.family != expected:
            raise ValueError('[Eval] family mismatch: model %s, task %s, '
                             'expected %s' % (state.family, task.spec.family,
                                              expected))
        query = task.query(support_size)
        if not query:
            raise ValueError('[Eval] task %s has no examples after the '
                             'first %s' % (index, support_size))
        score = score_examples(state, query)
        rows.append({'task': index, 'metric': metric_name(expected),
                     'value': score['value'], 'loss': score['loss']})
    return pd.DataFrame(rows, columns=['task', 'metric', 'value', 'loss'])


def summarize(table):
    """Mean and population std of ``table['value']`` across tasks."""
    values = table['value'].to_numpy(dtype=np.float64)
    return {'mean': float(np.mean(values)) if len(values) else float('nan'),
            'std': float(np.std(values)) if len(values) else float('nan'),
            'n_tasks': int(len(values))}


def kshot_states(params, tasks, k, method, cfg, jobs=1, show_progress=False):
    """Adapt ``params`` to every task; threads share the frozen weights."""
    def adapt(task):
        return adapt_test_task(params, task, k, method, cfg)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(progress(pool.map(adapt, tasks), total=len(tasks),
                                 desc='k=%s' % k, disable=not show_progress))
    return [adapt(task) for task in progress(
        tasks, desc='k=%s' % k, disable=not show_progress)]


def run_kshot(params, tasks, method, cfg, support_size, k_values=None,
              label=None, mode='plain', seed=0, jobs=1):
    """Metrics rows for every k.

    Args:
        params (:class:`~tamlab.model.params.ModelParams`)
        tasks (list(TaskData)): Test tasks.
        method (str): Adaptation method.
        cfg (:class:`~tamlab.meta.config.TamConfig`)
        support_size (int): Size of every task's adaptation pool.
        k_values (list(int)): Defaults to ``cfg.k_values``.
        label (str): Value of the method column, the method if None.

    Returns:
        :class:`pandas.DataFrame` with :data:`METRIC_COLUMNS`.
    """
    k_values = cfg.k_values if k_values is None else k_values
    too_large = [k for k in k_values if k > support_size]
    if too_large:
        raise ValueError('[Eval] k %s exceeds the adaptation pool of %s '
                         'examples' % (too_large, support_size))
    rows = []
    family = params.config.family
    for k in k_values:
        states = kshot_states(params, tasks, k, method, cfg, jobs,
                              cfg.show_progress)
        summary = summarize(evaluate(states, tasks, family, support_size))
        logger.info('[Eval] %s k=%s %s %.4f +- %.4f', label or method, k,
                    metric_name(family), summary['mean'], summary['std'])
        rows.append(dict(summary, method=label or method, family=family,
                         mode=mode, k=k, seed=seed))
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def summarize_trials(frames):
    """Combine per-seed metrics rows into mean +- std across seeds.

    Rows of one (method, family, mode, k) group are averaged; ``std`` is the
    population std of the per-seed means, ``seed`` becomes ``'all'``. A
    single trial keeps its across-task std.
    """
    table = pd.concat(list(frames), ignore_index=True)
    rows = []
    keys = ['method', 'family', 'mode', 'k']
    for key, group in table.groupby(keys, sort=True):
        means = group['mean'].to_numpy(dtype=np.float64)
        std = float(np.std(means)) if len(means) > 1 \
            else float(group['std'].iloc[0])
        rows.append(dict(zip(keys, key), mean=float(np.mean(means)), std=std,
                         n_tasks=int(group['n_tasks'].iloc[0]), seed='all'))
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def write_metrics_csv(table, path):
    """Write ``table`` with the metrics columns, six decimals."""
    table[METRIC_COLUMNS].to_csv(path, index=False, float_format='%.6f')
    return path
