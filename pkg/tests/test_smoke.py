# pylint: disable=redefined-outer-name
"""Statistical smoke runs on small benchmarks.

Deselected by default; run with ``pytest -m slow``.
"""
import numpy as np
import pytest

from tamlab.benchgen import GenConfig, build_split
from tamlab.meta import TamConfig, adapt_test_task, comp_tam_train,\
                        evaluate, model_config_for, summarize, tam_train,\
                        unadapted_state
from tamlab.model import collate, nll_loss
from tamlab.numerics import Tensor, no_grad

pytestmark = pytest.mark.slow

MODEL = {'num_layers': 2, 'embed_dim': 32, 'num_heads': 4,
         'feedforward_dim': 64, 'max_positions': 64,
         'adapter_bottleneck_dim': 4}

CLASS_SMOKE = {
    'family': 'classification', 'seed': 0, 'n_train': 32, 'n_val': 0,
    'n_test': 8, 'examples_per_task': 200, 'support_size': 20,
    'candidate_pool': 20000, 'probe_size': 256,
}

# patience 2 and a larger inner step keep z moving while the head is small
CLASS_TRAINING = {
    'max_inner_steps': 10, 'inner_lr': 0.05, 'early_stop_patience': 2,
    'outer_lr': 3e-3, 'examples_per_task': 100,
    'max_outer_iterations': 4000, 'k_values': [1, 20],
    'adaptation_steps_at_test': 25, 'seed': 0,
}


@pytest.fixture(scope='module')
def class_run():
    """Return the smoke classification split, its settings and weights."""
    split = build_split(GenConfig.create(**CLASS_SMOKE))
    cfg = TamConfig.create(**CLASS_TRAINING)
    model = model_config_for('tam', split.config, **MODEL)
    return split, cfg, tam_train(split, model, cfg)


def query_loss(params, condition, task, support_size):
    batch = collate(task.query(support_size), params.config.family)
    with no_grad():
        return nll_loss(params.frozen(), Tensor(condition), batch).item()


def test_tam_training_lowers_adapted_loss(class_run):
    """The loss at the inferred z falls over training."""
    _, _, result = class_run
    losses = result.log.losses('loss_best')
    assert np.mean(losses[-200:]) < np.mean(losses[:200])


def test_tam_adaptation_lowers_loss(class_run):
    """Adapting z helps on nearly every new task, and only z moves."""
    split, cfg, result = class_run
    params = result.params
    before = params.clone()
    results = [adapt_test_task(params, task, 20, 'tam-z', cfg).result
               for task in split.test_tasks]
    improved = [r.best_loss < r.initial_loss for r in results]
    assert np.mean(improved) >= 0.95
    assert params.equal(before)


def test_tam_accuracy_beats_baselines(class_run):
    """k = 20 reaches 0.60 accuracy and beats z = 0 and k = 1."""
    split, cfg, result = class_run
    params, tasks, support = result.params, split.test_tasks, split.support_size

    def accuracy(states):
        return summarize(evaluate(states, tasks, 'classification',
                                  support))['mean']
    zero = accuracy([unadapted_state(params, task) for task in tasks])
    one, twenty = [accuracy([adapt_test_task(params, task, k, 'tam-z', cfg)
                             for task in tasks]) for k in (1, 20)]
    assert twenty >= 0.60
    assert twenty > zero
    assert twenty > one


def test_comp_slot_adaptation():
    """Inferring the unseen primitive lowers the held-out loss."""
    split = build_split(GenConfig.create(
        family='pathfinding', mode='comp', seed=1, grid_size=5,
        num_obstacles=2, n_train=24, n_val=0, n_test=8, examples_per_task=24,
        support_size=8))
    cfg = TamConfig.create(max_inner_steps=10, inner_lr=0.05,
                           examples_per_task=16, max_outer_iterations=300,
                           k_values=[8], adaptation_steps_at_test=25)
    model = model_config_for('comp-tam', split.config, **MODEL)
    params = comp_tam_train(split, model, cfg).params
    before = params.clone()
    improved = []
    for task in split.test_tasks:
        state = adapt_test_task(params, task, 8, 'comp-slot', cfg)
        baseline = unadapted_state(params, task).condition
        slot = task.spec.unseen_slot
        known = [row for row in range(3) if row != slot]
        np.testing.assert_array_equal(state.condition[known],
                                      baseline[known])
        improved.append(
            query_loss(params, state.condition, task, split.support_size)
            < query_loss(params, baseline, task, split.support_size))
    assert np.mean(improved) >= 0.9
    assert params.equal(before)
