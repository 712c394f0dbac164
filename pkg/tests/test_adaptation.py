"""Test inner loops, test-time adaptation and fine-tuning."""
import numpy as np
import pytest

from tamlab.extra.const import StopReason
from tamlab.extra.exceptions import AdaptationError
from tamlab.meta import GradientBuffer, TamConfig, adapt_task_embedding,\
                        adapt_test_task, unadapted_state
from tamlab.meta.adaptation import inner_loop
from tamlab.meta.training import model_config_for
from tamlab.model import ModelParams, collate, nll_loss
from tamlab.numerics import Tensor, backward, ops, recording
from tests.conftest import MODEL_OVERRIDES, TAM_SETTINGS, tiny_model


def settings(**kwargs):
    return TamConfig.create(**dict(TAM_SETTINGS, **kwargs))


def constant_loss(z):
    return ops.add(ops.scale(ops.sum(z), 0.0), 2.0)


@pytest.fixture
def class_params():
    """Return a tiny classifier with a random head."""
    return ModelParams.init(tiny_model('classification', init_std=0.3,
                                       zero_init_output=False))


@pytest.fixture
def comp_params(path_comp_split):
    """Return a tiny compositional path-finding model."""
    cfg = model_config_for('comp-tam', path_comp_split.config,
                           **MODEL_OVERRIDES)
    return ModelParams.init(cfg)


def test_weights_stay_frozen(class_params, class_split):
    """Inferring z never touches the shared weights."""
    before = class_params.clone()
    batch = collate(class_split.train_tasks[0].examples[:16],
                    'classification')
    result = adapt_task_embedding(class_params, batch, settings())
    assert class_params.equal(before)
    assert all(t.grad is None for t in class_params)
    assert result.best_loss <= result.initial_loss


def test_no_inner_steps(class_params, class_split):
    """A budget of zero evaluates z = 0 once."""
    batch = collate(class_split.train_tasks[0].examples[:16],
                    'classification')
    result = adapt_task_embedding(class_params, batch, settings(),
                                  max_steps=0)
    assert result.steps_taken == 0
    assert len(result.loss_trace) == 1
    assert result.stop_reason == StopReason.MAX_STEPS
    np.testing.assert_array_equal(result.z_best, np.zeros(8))


def test_trace_and_best(class_params, class_split):
    """The trace has one entry per evaluation; the best is its minimum."""
    batch = collate(class_split.train_tasks[1].examples[:16],
                    'classification')
    result = adapt_task_embedding(class_params, batch,
                                  settings(early_stop_patience=0),
                                  keep_trace=True)
    assert result.steps_taken == 3
    assert len(result.loss_trace) == 4 == len(result.z_trace)
    assert result.best_step == int(np.argmin(result.loss_trace))
    assert result.best_loss == min(result.loss_trace)
    np.testing.assert_array_equal(result.z_best,
                                  result.z_trace[result.best_step])


def test_early_stop_on_flat_loss():
    """A flat loss stops after one stale evaluation."""
    result = inner_loop(constant_loss, np.zeros(3),
                        settings(max_inner_steps=5))
    assert result.stop_reason == StopReason.NO_IMPROVEMENT
    assert result.steps_taken == 1
    assert result.loss_trace == [2.0, 2.0]
    assert result.best_step == 0


def test_zero_patience_runs_every_step():
    """Patience 0 turns early stopping off."""
    result = inner_loop(constant_loss, np.zeros(3),
                        settings(max_inner_steps=5, early_stop_patience=0))
    assert result.stop_reason == StopReason.MAX_STEPS
    assert result.steps_taken == 5
    assert len(result.loss_trace) == 6


def test_converges_on_quadratic():
    """Adam on z finds the minimum of a quadratic."""
    target = np.array([1.0, -2.0, 0.5])

    def loss_fn(z):
        diff = ops.sub(z, target)
        return ops.sum(ops.mul(diff, diff))
    result = inner_loop(loss_fn, np.zeros(3),
                        settings(max_inner_steps=300, inner_lr=0.1,
                                 early_stop_patience=0))
    assert result.initial_loss == pytest.approx(5.25)
    np.testing.assert_allclose(result.z_best, target, atol=0.1)


def test_non_finite_loss():
    """A non-finite loss raises AdaptationError with step and z."""
    with pytest.raises(AdaptationError) as err:
        inner_loop(lambda z: ops.add(ops.sum(z), np.inf), np.zeros(2),
                   settings())
    assert err.value.step == 0
    np.testing.assert_array_equal(err.value.z, np.zeros(2))


def test_buffer_sums_updated_evaluations():
    """Every evaluation after an update adds its weight gradient."""
    w = Tensor([1.0, 2.0], requires_grad=True)
    buffer = GradientBuffer([w])

    def loss_fn(z):
        return ops.add(ops.sum(ops.mul(w, w)), ops.sum(ops.mul(z, z)))
    result = inner_loop(loss_fn, np.zeros(2),
                        settings(early_stop_patience=0), grad_accumulator=buffer)
    assert result.steps_taken == 3
    np.testing.assert_allclose(buffer.grads[0], 3 * np.array([2.0, 4.0]))
    assert w.grad is None
    buffer.zero()
    assert buffer.norm() == 0.0


@pytest.mark.parametrize('k', [0, 61])
def test_bad_k(class_params, class_split, k):
    """k must lie between 1 and the task size."""
    with pytest.raises(ValueError):
        adapt_test_task(class_params, class_split.test_tasks[0], k, 'tam-z',
                        settings())


def test_method_must_fit_model(class_params, comp_params, class_split,
                               path_comp_split):
    """tam-z needs a plain model, comp-slot a compositional one."""
    with pytest.raises(ValueError):
        adapt_test_task(comp_params, path_comp_split.test_tasks[0], 1,
                        'tam-z', settings())
    with pytest.raises(ValueError):
        adapt_test_task(class_params, class_split.test_tasks[0], 1,
                        'comp-slot', settings())


def test_tam_z_state(class_params, class_split):
    """tam-z returns the best z and frozen weights."""
    state = adapt_test_task(class_params, class_split.test_tasks[0], 5,
                            'tam-z', settings())
    assert state.method == 'tam-z'
    assert state.condition.shape == (8,)
    np.testing.assert_array_equal(state.condition, state.result.z_best)
    assert not any(t.requires_grad for t in state.params)


def test_comp_slot_keeps_known_rows(comp_params, path_comp_split):
    """Only the unseen slot of the primitive block is inferred."""
    task = path_comp_split.test_tasks[0]
    state = adapt_test_task(comp_params, task, 5, 'comp-slot', settings())
    table = comp_params['primitive_embeddings'].data
    slot = task.spec.unseen_slot
    assert state.condition.shape == (3, 8)
    for row, pid in enumerate(task.spec.primitive_ids):
        if row != slot:
            np.testing.assert_array_equal(state.condition[row], table[pid])
    np.testing.assert_array_equal(state.condition[slot], state.result.z_best)


def test_finetune_without_learning_rate(class_params, class_split):
    """Fine-tuning at learning rate 0 keeps every weight."""
    state = adapt_test_task(class_params, class_split.test_tasks[0], 5,
                            'finetune-full', settings(finetune_lr=0.0))
    assert state.params.equal(class_params)
    np.testing.assert_array_equal(state.condition, np.zeros(8))


def test_finetune_copies_weights(class_params, class_split):
    """Fine-tuning works on a copy of the weights."""
    before = class_params.clone()
    state = adapt_test_task(class_params, class_split.test_tasks[0], 5,
                            'finetune-full', settings(finetune_lr=0.05))
    assert class_params.equal(before)
    assert state.result.best_loss <= state.result.initial_loss


def test_unadapted_state(class_params, comp_params, class_split,
                         path_comp_split):
    """Without adaptation z is zero; the unseen slot holds the
    unknown-primitive vector."""
    state = unadapted_state(class_params, class_split.test_tasks[0])
    np.testing.assert_array_equal(state.condition, np.zeros(8))
    assert state.method is None
    task = path_comp_split.test_tasks[0]
    state = unadapted_state(comp_params, task)
    np.testing.assert_array_equal(state.condition[task.spec.unseen_slot],
                                  comp_params['unknown_primitive'].data)


def test_buffer_without_budget_keeps_start():
    """A zero budget collects the gradient at the starting z."""
    w = Tensor([1.0, -3.0], requires_grad=True)
    buffer = GradientBuffer([w])
    result = inner_loop(lambda z: ops.sum(ops.mul(w, ops.add(z, 1.0))),
                        np.zeros(2), settings(), max_steps=0,
                        grad_accumulator=buffer)
    assert result.steps_taken == 0
    np.testing.assert_array_equal(buffer.grads[0], [1.0, 1.0])


def test_outer_gradient_replays(class_params, class_split):
    """The collected gradient is the sum of the weight gradients
    recomputed at every z the inner loop stepped to."""
    cfg = settings(max_inner_steps=25, early_stop_patience=0)
    batch = collate(class_split.train_tasks[2].examples[:24],
                    'classification')
    tensors = class_params.trainable()
    buffer = GradientBuffer(tensors)
    result = adapt_task_embedding(class_params, batch, cfg,
                                  grad_accumulator=buffer, keep_trace=True)
    assert result.steps_taken == 25
    assert len(result.z_trace) == 26

    replay = GradientBuffer(tensors)
    for z in result.z_trace[1:]:
        with recording():
            backward(nll_loss(class_params, Tensor(z), batch))
        replay.collect()
    for ours, expected in zip(buffer.grads, replay.grads):
        np.testing.assert_allclose(ours, expected, rtol=0.0, atol=1e-9)
    assert buffer.norm() > 0.0
