"""Inferring task embeddings and adapting trained models to new tasks.

The inner loop of every method lives here: a fresh Adam updates z on the
full adaptation batch while the shared weights stay put. During training a
:class:`GradientBuffer` also collects the weight gradient of the loss at
every z the inner optimizer produced; their sum is the outer update.
"""
import logging

import numpy as np

from tamlab.enums import AdaptMethod, check_is_enum
from tamlab.extra.const import StopReason
from tamlab.extra.exceptions import AdaptationError
from tamlab.model import collate, nll_loss, primitive_block,\
                         zero_task_embedding
from tamlab.numerics import Adam, Tensor, backward, recording

logger = logging.getLogger(__name__)


class AdaptationResult:
    """Outcome of one inner loop.

    Attributes:
        z_best (numpy.ndarray): z of the lowest loss seen.
        loss_trace (list(float)): Loss before every update and after the
            last one, so ``len(loss_trace) == steps_taken + 1``.
        steps_taken (int): Optimizer updates applied to z.
        stop_reason (str): A :class:`~tamlab.extra.const.StopReason` value.
        best_step (int): Index of ``z_best`` in ``loss_trace``.
        z_trace (list(numpy.ndarray)): z at every loss evaluation, when
            requested.
    """
    def __init__(self, z_best, loss_trace, steps_taken, stop_reason,
                 best_step, z_trace=None):
        self.z_best = z_best
        self.loss_trace = loss_trace
        self.steps_taken = steps_taken
        self.stop_reason = stop_reason
        self.best_step = best_step
        self.z_trace = z_trace

    @property
    def best_loss(self):
        return self.loss_trace[self.best_step]

    @property
    def initial_loss(self):
        return self.loss_trace[0]

    def __repr__(self):
        return ('AdaptationResult(steps=%s, stop=%s, loss %.6g -> %.6g)'
                % (self.steps_taken, self.stop_reason, self.initial_loss,
                   self.best_loss))


class GradientBuffer:
    """Running sum of the gradients of a fixed tensor list.

    Attributes:
        tensors (list(Tensor)): Tensors whose ``grad`` is collected.
        grads (list(numpy.ndarray)): Accumulated sums, shaped like tensors.
    """
    def __init__(self, tensors):
        self.tensors = list(tensors)
        self.grads = [np.zeros(t.shape) for t in self.tensors]

    def zero(self):
        for grad in self.grads:
            grad.fill(0.0)

    def discard(self):
        """Clear every tensor's ``grad`` without adding it."""
        for tensor in self.tensors:
            tensor.zero_grad()

    def collect(self):
        """Add every tensor's ``grad`` to the sums and clear it."""
        for grad, tensor in zip(self.grads, self.tensors):
            if tensor.grad is not None:
                grad += tensor.grad
                tensor.zero_grad()

    def is_finite(self):
        return all(np.all(np.isfinite(grad)) for grad in self.grads)

    def norm(self):
        return float(np.sqrt(sum(np.sum(g * g) for g in self.grads)))


def inner_loop(loss_fn, z_init, cfg, max_steps=None, grad_accumulator=None,
               keep_trace=False, label='TAM'):
    """Minimise ``loss_fn(z)`` over z with a fresh Adam.

    The loss is evaluated at the current z before every update and once
    after the last one. An evaluation counts as an improvement when it
    beats the best loss so far by more than ``improvement_tol``; the loop
    stops after ``early_stop_patience`` evaluations in a row without one
    (0 disables early stopping) or after ``max_steps`` updates.

    Args:
        loss_fn (callable): Tensor z to a scalar loss Tensor.
        z_init (numpy.ndarray): Starting z, copied.
        cfg (:class:`~tamlab.meta.config.TamConfig`)
        max_steps (int): Update budget, ``cfg.max_inner_steps`` if None.
        grad_accumulator (:class:`GradientBuffer`): Collects the gradient
            of the shared weights at every evaluation after an update.
            The starting z is only collected when the budget is zero.
        keep_trace (bool): Store z at every evaluation.

    Returns:
        :class:`AdaptationResult`

    Raises:
        AdaptationError: If a loss is not finite.
    """
    max_steps = cfg.max_inner_steps if max_steps is None else max_steps
    patience = cfg.early_stop_patience
    z = Tensor(np.array(z_init, dtype=np.float64), requires_grad=True,
               name='z')
    optimizer = Adam([z], **cfg.inner_optimizer())
    trace, z_trace = [], []
    best, best_z, best_step = np.inf, z.data.copy(), 0
    reference, stale = np.inf, 0
    stop_reason = StopReason.MAX_STEPS
    step = 0
    while True:
        if keep_trace:
            z_trace.append(z.data.copy())
        z.zero_grad()
        with recording():
            loss = loss_fn(z)
            value = loss.item()
            if not np.isfinite(value):
                raise AdaptationError(
                    '[%s] non-finite loss %s at inner step %s'
                    % (label, value, step), step=step, z=z.data.copy())
            backward(loss)
        if grad_accumulator is not None:
            if step or not max_steps:
                grad_accumulator.collect()
            else:
                grad_accumulator.discard()
        trace.append(value)
        if value < best:
            best, best_z, best_step = value, z.data.copy(), step
        if value < reference - cfg.improvement_tol:
            reference, stale = value, 0
        else:
            stale += 1
        if step >= max_steps:
            break
        if patience and stale >= patience:
            stop_reason = StopReason.NO_IMPROVEMENT
            break
        optimizer.step([z.grad])
        step += 1
    logger.debug('[%s] inner loop: %s steps, %s, loss %.6g -> %.6g',
                 label, step, stop_reason, trace[0], best)
    return AdaptationResult(best_z, trace, step, stop_reason, best_step,
                            z_trace if keep_trace else None)


def adapt_task_embedding(params, batch, cfg, grad_accumulator=None,
                         max_steps=None, z_init=None, keep_trace=False):
    """Infer the task embedding of the examples in ``batch``.

    z starts at zero and only z is updated. Without ``grad_accumulator``
    the loop runs on a frozen view of ``params``; with one, ``params`` must
    require gradients and every evaluated loss adds its weight gradient to
    the buffer.

    Args:
        params (:class:`~tamlab.model.params.ModelParams`)
        batch (:class:`~tamlab.model.batching.Batch`): Examples of one task.
        cfg (:class:`~tamlab.meta.config.TamConfig`)

    Returns:
        :class:`AdaptationResult`
    """
    model = params if grad_accumulator is not None else params.frozen()
    if z_init is None:
        z_init = np.zeros(model.config.task_embedding_shape())
    return inner_loop(lambda z: nll_loss(model, z, batch), z_init, cfg,
                      max_steps, grad_accumulator, keep_trace)


def adapt_primitive_slot(params, batch, primitive_ids, unknown_slot, cfg,
                         grad_accumulator=None, max_steps=None, z_init=None,
                         keep_trace=False):
    """Infer the embedding of the primitive in ``unknown_slot``.

    The other two slots read their rows of ``primitive_embeddings``.
    """
    model = params if grad_accumulator is not None else params.frozen()
    if z_init is None:
        z_init = np.zeros(model.config.embed_dim)

    def loss_fn(z):
        block = primitive_block(model, primitive_ids, unknown_slot, z)
        return nll_loss(model, block, batch)
    return inner_loop(loss_fn, z_init, cfg, max_steps, grad_accumulator,
                      keep_trace, label='CompTAM')


class AdaptedState:
    """A model ready to score the query examples of one task.

    Attributes:
        params (:class:`~tamlab.model.params.ModelParams`): Frozen weights.
        condition (numpy.ndarray): What the forward pass conditions on:
            z, or the (3, D) primitive block of a compositional task.
        method (str): :class:`~tamlab.enums.AdaptMethod` value, or None for
            the unadapted state.
        result (:class:`AdaptationResult`): Inner loop outcome, if any.
    """
    def __init__(self, params, condition, method=None, result=None):
        self.params = params
        self.condition = np.asarray(condition, dtype=np.float64)
        self.method = method
        self.result = result

    @property
    def family(self):
        return self.params.config.family

    def conditioning(self):
        return Tensor(self.condition)


def _unknown_init(params):
    if 'unknown_primitive' in params:
        return params['unknown_primitive'].data.copy()
    return np.zeros(params.config.embed_dim)


def _block_array(params, primitive_ids, unseen_slot, z):
    frozen = params.frozen()
    return primitive_block(frozen, primitive_ids, unseen_slot,
                           Tensor(z)).data.copy()


def _unseen_slot(task):
    slot = task.spec.unseen_slot
    return 0 if slot is None else slot


def unadapted_state(params, task):
    """Evaluation without adaptation: z = 0, or the unknown-primitive
    vector in the unseen slot of a compositional task."""
    params = params.frozen()
    if params.config.compositional:
        condition = _block_array(params, task.spec.primitive_ids,
                                 _unseen_slot(task), _unknown_init(params))
    else:
        condition = zero_task_embedding(params.config).data
    return AdaptedState(params, condition)


def finetune_full(params, batch, cfg, condition, steps=None):
    """Fine-tune every weight and z on ``batch``.

    Early stopping follows :func:`inner_loop`; the weights of the lowest
    batch loss are kept.

    Returns:
        tuple: (ModelParams, condition array, AdaptationResult)
    """
    steps = cfg.finetune_steps if steps is None else steps
    model = params.clone(requires_grad=True)
    z = Tensor(np.array(condition, dtype=np.float64), requires_grad=True,
               name='z')
    tensors = list(model) + [z]
    optimizer = Adam(tensors, learning_rate=cfg.finetune_lr,
                     beta1=cfg.outer_beta1, beta2=cfg.outer_beta2,
                     epsilon=cfg.outer_eps)
    trace = []
    best = np.inf
    best_arrays, best_z, best_step = None, None, 0
    reference, stale = np.inf, 0
    stop_reason = StopReason.MAX_STEPS
    step = 0
    while True:
        optimizer.zero_grad()
        with recording():
            loss = nll_loss(model, z, batch)
            value = loss.item()
            if not np.isfinite(value):
                raise AdaptationError(
                    '[Finetune] non-finite loss %s at step %s'
                    % (value, step), step=step, z=z.data.copy())
            backward(loss)
        trace.append(value)
        if value < best:
            best, best_step = value, step
            best_arrays, best_z = model.arrays(), z.data.copy()
        if value < reference - cfg.improvement_tol:
            reference, stale = value, 0
        else:
            stale += 1
        if step >= steps:
            break
        if cfg.early_stop_patience and stale >= cfg.early_stop_patience:
            stop_reason = StopReason.NO_IMPROVEMENT
            break
        optimizer.step()
        step += 1
    for name, array in best_arrays.items():
        model[name].data[...] = array
    result = AdaptationResult(best_z, trace, step, stop_reason, best_step)
    return model.frozen(), best_z, result


def adapt_test_task(params, task, k, method, cfg):
    """Adapt a trained model to the first ``k`` examples of ``task``.

    tam-z infers z with the weights frozen; comp-slot infers only the
    unseen primitive's slot; finetune-full updates every weight for up to
    ``finetune_steps`` steps. The first two run ``adaptation_steps_at_test``
    updates at most.

    Args:
        params (:class:`~tamlab.model.params.ModelParams`)
        task (:class:`~tamlab.benchgen.tasks.TaskData`)
        k (int): Number of adaptation examples, taken from the start of the
            task's example list.
        method (str or :class:`~tamlab.enums.AdaptMethod`)
        cfg (:class:`~tamlab.meta.config.TamConfig`)

    Returns:
        :class:`AdaptedState`

    Raises:
        ValueError: If k < 1, the task has fewer than k examples or the
            method does not fit the model.
    """
    method = check_is_enum(AdaptMethod, method)
    if k < 1:
        raise ValueError('[Adapt] %s needs k >= 1, got %s; use '
                         'unadapted_state to evaluate without adaptation'
                         % (method, k))
    if len(task) < k:
        raise ValueError('[Adapt] task has %s examples, fewer than k=%s'
                         % (len(task), k))
    compositional = params.config.compositional
    if method == AdaptMethod.tam_z.value and compositional:
        raise ValueError('[Adapt] tam-z needs a non-compositional model')
    if method == AdaptMethod.comp_slot.value and not compositional:
        raise ValueError('[Adapt] comp-slot needs a compositional model')

    batch = collate(task.support(k), params.config.family)
    steps = cfg.adaptation_steps_at_test
    if method == AdaptMethod.tam_z.value:
        result = adapt_task_embedding(params, batch, cfg, max_steps=steps)
        return AdaptedState(params.frozen(), result.z_best, method, result)
    if method == AdaptMethod.comp_slot.value:
        ids, slot = task.spec.primitive_ids, _unseen_slot(task)
        result = adapt_primitive_slot(params, batch, ids, slot, cfg,
                                      max_steps=steps,
                                      z_init=_unknown_init(params))
        return AdaptedState(params.frozen(),
                            _block_array(params, ids, slot, result.z_best),
                            method, result)
    start = unadapted_state(params, task).condition
    model, condition, result = finetune_full(params, batch, cfg, start)
    return AdaptedState(model, condition, method, result)
