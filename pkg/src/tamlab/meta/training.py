# pylint: disable=too-many-arguments
"""Outer training loops.

Every method runs the same loop: sample one training task and
``examples_per_task`` of its examples, fill a gradient buffer, apply one
outer Adam update with the buffer as the gradient. The methods differ only
in how the buffer is filled:

- tam: the weight gradients at every z the inner loop steps to.
- comp-tam: the same, with one primitive slot pretended unknown.
- multitask: one backward pass through a learned per-task embedding.
- task-agnostic: multitask over the union of all examples with z = 0.
"""
import json
import logging

import numpy as np

from tamlab.benchgen.tasks import TaskData
from tamlab.enums import AdaptMethod, Mode, TrainMethod, check_is_enum
from tamlab.extra.exceptions import AdaptationError
from tamlab.extra.utils import child_rng, progress
from tamlab.meta.adaptation import GradientBuffer, adapt_primitive_slot,\
                                   adapt_task_embedding, adapt_test_task,\
                                   unadapted_state
from tamlab.meta.evaluation import evaluate, is_better, metric_name,\
                                   summarize
from tamlab.model import ModelConfig, ModelParams, collate, nll_loss,\
                         primitive_block
from tamlab.numerics import Adam, Tensor, backward, ops, recording

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 1


class TrainingLog:
    """Structured run events, one JSON object per line.

    Attributes:
        events (list(dict)): ``iteration`` and ``validation`` events in the
            order they happened.
    """
    def __init__(self):
        self.events = []

    def add(self, event, **fields):
        self.events.append(dict(fields, event=event))

    def of_kind(self, event):
        return [e for e in self.events if e['event'] == event]

    def losses(self, field='loss'):
        """Per-iteration values of ``field``; ``loss_best`` is the inner
        loop's best loss under the tam methods."""
        return [e[field] for e in self.of_kind('iteration')]

    def write_jsonl(self, path):
        with open(path, 'w', encoding='utf-8', newline='\n') as fh:
            for event in self.events:
                fh.write(json.dumps(event, sort_keys=True))
                fh.write('\n')
        return path


class TrainerState:
    """Everything one training run owns.

    Attributes:
        params (:class:`~tamlab.model.params.ModelParams`): Shared weights,
            with the primitive table in compositional mode.
        optimizer (:class:`~tamlab.numerics.optim.Adam`): Outer optimizer
            over ``params.trainable()``.
        buffer (:class:`~tamlab.meta.adaptation.GradientBuffer`): The outer
            gradient, zeroed at the start of every iteration.
        iteration (int): Outer updates applied.
        rng (numpy.random.Generator): Task and example sampling.
    """
    def __init__(self, params, cfg, rng):
        self.params = params
        self.optimizer = Adam(params.trainable(), **cfg.outer_optimizer())
        self.buffer = GradientBuffer(self.optimizer.params)
        self.iteration = 0
        self.rng = rng


class TrainingResult:
    """Outcome of a training run.

    Attributes:
        params (:class:`~tamlab.model.params.ModelParams`): Weights of the
            best validation score, the final weights without validation.
        final_params (:class:`~tamlab.model.params.ModelParams`)
        log (:class:`TrainingLog`)
        optimizer_state (:class:`~tamlab.numerics.optim.AdamState`)
        task_embeddings (numpy.ndarray): Learned per-task z (multitask).
        best_iteration (int): Iteration of ``params``.
        best_metric (float): Validation score of ``params``.
    """
    def __init__(self, params, final_params, log, optimizer_state,
                 task_embeddings=None, best_iteration=None,
                 best_metric=None):
        self.params = params
        self.final_params = final_params
        self.log = log
        self.optimizer_state = optimizer_state
        self.task_embeddings = task_embeddings
        self.best_iteration = best_iteration
        self.best_metric = best_metric


def sample_batch(rng, tasks, cfg, family):
    """Draw a training task and ``examples_per_task`` of its examples
    without replacement (all of them for smaller tasks)."""
    index = int(rng.integers(len(tasks)))
    task = tasks[index]
    if not task.examples:
        raise ValueError('[Train] training task %s has no examples' % index)
    size = min(cfg.examples_per_task, len(task))
    rows = rng.choice(len(task), size=size, replace=False)
    return index, collate([task.examples[i] for i in rows], family)


def union_task(tasks):
    """One pseudo-task holding the examples of every task, in order."""
    tasks = list(tasks)
    return TaskData(tasks[0].spec, [ex for task in tasks
                                    for ex in task.examples])


def default_adapt_method(method, compositional):
    """Test-time adaptation matching a training method."""
    method = check_is_enum(TrainMethod, method)
    if method == TrainMethod.task_agnostic.value:
        return AdaptMethod.finetune_full.value
    if method == TrainMethod.comp_tam.value or (
            method == TrainMethod.multitask.value and compositional):
        return AdaptMethod.comp_slot.value
    return AdaptMethod.tam_z.value


def uses_primitive_table(method, mode):
    """Whether ``method`` on a ``mode`` split trains a primitive table."""
    method = check_is_enum(TrainMethod, method)
    return check_is_enum(Mode, mode) == Mode.comp.value and method in (
        TrainMethod.comp_tam.value, TrainMethod.multitask.value)


def model_config_for(method, gen_config, **overrides):
    """ModelConfig for training ``method`` on a benchmark."""
    cfg = ModelConfig.for_benchmark(gen_config, **overrides)
    if not uses_primitive_table(method, gen_config.mode):
        cfg = cfg.replace(compositional=False, num_primitives=0)
    return cfg


def validation_score(params, tasks, method, cfg, support_size):
    """Mean validation score after adapting to ``min(max_k, support)``
    examples; ``method`` None scores without adaptation."""
    k = min(cfg.max_k, support_size)
    if method is None:
        states = [unadapted_state(params, task) for task in tasks]
    else:
        states = [adapt_test_task(params, task, k, method, cfg)
                  for task in tasks]
    return summarize(evaluate(states, tasks, params.config.family,
                              support_size))['mean']


def _check_inputs(split, model_cfg, cfg):
    model_cfg.check()
    cfg.check()
    if not split.train_tasks:
        raise ValueError('[Train] split has no training tasks')
    if model_cfg.family != split.family:
        raise ValueError('[Train] %s model for a %s split'
                         % (model_cfg.family, split.family))


def _run(label, split, params, cfg, rng, step_fn, val_method):
    state = TrainerState(params, cfg, rng)
    log = TrainingLog()
    family = params.config.family
    best = {'metric': None, 'iteration': None, 'arrays': None}
    logger.info('[%s] %s outer iterations over %s tasks', label,
                cfg.max_outer_iterations, len(split.train_tasks))
    for _ in progress(range(cfg.max_outer_iterations), desc=label,
                      disable=not cfg.show_progress):
        index, batch = sample_batch(state.rng, split.train_tasks, cfg,
                                    family)
        state.buffer.zero()
        fields = step_fn(state, index, batch)
        if not state.buffer.is_finite():
            raise AdaptationError('[%s] non-finite outer gradient at '
                                  'iteration %s' % (label, state.iteration),
                                  step=state.iteration)
        state.optimizer.step(state.buffer.grads)
        state.iteration += 1
        log.add('iteration', iteration=state.iteration, task=index,
                **fields)

        if split.val_tasks and state.iteration % cfg.validation_interval == 0:
            value = validation_score(state.params, split.val_tasks,
                                     val_method, cfg, split.support_size)
            log.add('validation', iteration=state.iteration,
                    metric=metric_name(family), value=value)
            logger.info('[%s] iteration %s validation %s %.4f', label,
                        state.iteration, metric_name(family), value)
            if is_better(family, value, best['metric']):
                best = {'metric': value, 'iteration': state.iteration,
                        'arrays': state.params.arrays()}

    final = state.params
    chosen = final
    if best['arrays'] is not None:
        chosen = ModelParams(final.config, (
            (name, Tensor(array, requires_grad=True, name=name))
            for name, array in best['arrays'].items()))
    return TrainingResult(chosen, final, log, state.optimizer.state,
                          best_iteration=best['iteration'],
                          best_metric=best['metric'])


def _setup(model_cfg, cfg, rng, params):
    params = ModelParams.init(model_cfg) if params is None else params
    rng = child_rng(cfg.seed, SAMPLE_STREAM) if rng is None else rng
    return params, rng


def tam_train(split, model_cfg, cfg, rng=None, params=None):
    """Train shared weights by alternating minimisation.

    Per iteration z starts at zero and is inferred on the sampled batch.
    The weight gradients at every updated z sum to the outer update; the
    gradient at z = 0 only counts when ``max_inner_steps`` is 0.

    Returns:
        :class:`TrainingResult`
    """
    _check_inputs(split, model_cfg, cfg)
    if model_cfg.compositional:
        raise ValueError('[TAM] use comp_tam_train for compositional models')
    params, rng = _setup(model_cfg, cfg, rng, params)

    def step(state, _index, batch):
        result = adapt_task_embedding(state.params, batch, cfg,
                                      grad_accumulator=state.buffer)
        return {'loss': result.initial_loss, 'loss_best': result.best_loss,
                'inner_steps': result.steps_taken,
                'stop_reason': result.stop_reason}
    return _run('TAM', split, params, cfg, rng, step,
                AdaptMethod.tam_z.value)


def comp_tam_train(split, model_cfg, cfg, rng=None, params=None,
                   pretend_unknown=True):
    """Train shared weights and the primitive table.

    Per iteration one slot of the sampled task, chosen uniformly, is
    pretended unknown: its vector starts at zero and is inferred while the
    other slots read the table. With ``pretend_unknown`` off every slot
    reads the table and no inner loop runs.
    """
    _check_inputs(split, model_cfg, cfg)
    if split.compositional is None or not model_cfg.compositional:
        raise ValueError('[CompTAM] needs a compositional split and model')
    params, rng = _setup(model_cfg, cfg, rng, params)

    def step(state, index, batch):
        ids = split.train_tasks[index].spec.primitive_ids
        if not pretend_unknown:
            with recording():
                loss = nll_loss(state.params,
                                primitive_block(state.params, ids), batch)
                backward(loss)
            state.buffer.collect()
            return {'loss': loss.item(), 'inner_steps': 0}
        slot = int(state.rng.integers(3))
        result = adapt_primitive_slot(state.params, batch, ids, slot, cfg,
                                      grad_accumulator=state.buffer)
        return {'loss': result.initial_loss, 'loss_best': result.best_loss,
                'inner_steps': result.steps_taken, 'unknown_slot': slot,
                'stop_reason': result.stop_reason}
    return _run('CompTAM', split, params, cfg, rng, step,
                AdaptMethod.comp_slot.value)


def multitask_train(split, model_cfg, cfg, rng=None, params=None,
                    freeze_embeddings=False, label='Multitask',
                    val_method='auto'):
    """Train shared weights and one embedding per training task.

    The embedding table has its own Adam with the outer settings. A
    compositional model instead trains the primitive table and the shared
    unknown-primitive vector, which stands in for a uniformly chosen slot
    of every sampled task. ``freeze_embeddings`` pins the table at zero.

    Returns:
        :class:`TrainingResult` with ``task_embeddings`` of shape
        (n_train,) + z shape.
    """
    _check_inputs(split, model_cfg, cfg)
    params, rng = _setup(model_cfg, cfg, rng, params)
    compositional = model_cfg.compositional
    table = Tensor(np.zeros((len(split.train_tasks),)
                            + model_cfg.task_embedding_shape()),
                   requires_grad=not freeze_embeddings, name='task_table')
    table_opt = Adam([table], **cfg.outer_optimizer()) \
        if table.requires_grad and not compositional else None

    def step(state, index, batch):
        with recording():
            if compositional:
                slot = int(state.rng.integers(3))
                condition = primitive_block(
                    state.params, split.train_tasks[index].spec.primitive_ids,
                    slot, state.params['unknown_primitive'])
            else:
                condition = ops.getitem(table, index)
            loss = nll_loss(state.params, condition, batch)
            backward(loss)
        state.buffer.collect()
        if table_opt is not None:
            table_opt.step()
            table_opt.zero_grad()
        return {'loss': loss.item()}

    if val_method == 'auto':
        val_method = AdaptMethod.comp_slot.value if compositional \
            else AdaptMethod.tam_z.value
    result = _run(label, split, params, cfg, rng, step, val_method)
    result.task_embeddings = table.data.copy()
    return result


def task_agnostic_train(split, model_cfg, cfg, rng=None, params=None):
    """Train on the union of all training examples with z pinned at zero.

    The model sees a constant zero token where other methods put the task
    embedding, so it is never told which task an example comes from.
    """
    if model_cfg.compositional:
        raise ValueError('[TaskAgnostic] needs a non-compositional model')
    merged = union_task(split.train_tasks)
    logger.info('[TaskAgnostic] union of %s tasks: %s examples',
                len(split.train_tasks), len(merged))
    pseudo = _SingleTaskSplit(split, merged)
    result = multitask_train(pseudo, model_cfg, cfg, rng, params,
                             freeze_embeddings=True, label='TaskAgnostic',
                             val_method=None)
    result.task_embeddings = None
    return result


class _SingleTaskSplit:
    """A split view whose training tasks are replaced by one task."""
    def __init__(self, split, task):
        self.family = split.family
        self.train_tasks = [task]
        self.val_tasks = split.val_tasks
        self.support_size = split.support_size
        self.compositional = None


TRAINERS = {
    TrainMethod.tam.value: tam_train,
    TrainMethod.comp_tam.value: comp_tam_train,
    TrainMethod.multitask.value: multitask_train,
    TrainMethod.task_agnostic.value: task_agnostic_train,
}


def train(method, split, model_cfg, cfg, rng=None, params=None):
    """Run the trainer of ``method``."""
    method = check_is_enum(TrainMethod, method)
    return TRAINERS[method](split, model_cfg, cfg, rng=rng, params=params)
